#ifndef XOVER_PCHIP_H_
#define XOVER_PCHIP_H_

#include <span>
#include <vector>

namespace xover {

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
// derivatives with the three-point end rule, as in MATLAB/SciPy pchip).
class PchipCurve {
 public:
  PchipCurve() = default;
  // Knots must be strictly increasing; at least two. Throws kTooFewPoints or
  // kInvalidArgument.
  PchipCurve(std::span<const double> x, std::span<const double> y);

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  const std::vector<double>& slopes() const { return d_; }

  // Throws kRangeOutsideDomain outside [x_min, x_max].
  double operator()(double x) const;
  double Derivative(double x) const;
  // Exact integral of the interpolant over [a, b] (signed; b < a allowed).
  double Integral(double a, double b) const;

 private:
  size_t Segment(double x) const;
  double Primitive(double x) const;  // integral from x_min to x

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
  std::vector<double> cumulative_;  // integral from x_min to each knot
};

// Pool-adjacent-violators fit of a non-decreasing sequence (unit weights).
std::vector<double> IsotonicIncreasing(std::span<const double> y);

}  // namespace xover

#endif  // XOVER_PCHIP_H_
