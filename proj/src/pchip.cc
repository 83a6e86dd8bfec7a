#include "xover/pchip.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

namespace {

double Sign(double v) { return (v > 0.0) - (v < 0.0); }

double EndSlope(double h0, double h1, double del0, double del1) {
  double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
  if (Sign(d) != Sign(del0)) {
    d = 0.0;
  } else if (Sign(del0) != Sign(del1) && std::abs(d) > std::abs(3.0 * del0)) {
    d = 3.0 * del0;
  }
  return d;
}

}  // namespace

PchipCurve::PchipCurve(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const size_t n = x_.size();
  if (n != y_.size()) throw Error(ErrorCode::kInvalidArgument, "x and y differ in length");
  if (n < 2) throw Error(ErrorCode::kTooFewPoints, "pchip needs at least 2 points");
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite knot");
    }
    if (i > 0 && !(x_[i] > x_[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "knots must be strictly increasing");
    }
  }

  std::vector<double> h(n - 1), del(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    del[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = del[0];
  } else {
    for (size_t k = 1; k + 1 < n; ++k) {
      if (del[k - 1] * del[k] <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d_[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    d_[0] = EndSlope(h[0], h[1], del[0], del[1]);
    d_[n - 1] = EndSlope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }

  cumulative_.assign(n, 0.0);
  for (size_t k = 0; k + 1 < n; ++k) {
    // Full-segment Hermite integral: h (y0 + y1) / 2 + h^2 (d0 - d1) / 12.
    cumulative_[k + 1] = cumulative_[k] + h[k] * (y_[k] + y_[k + 1]) / 2.0 +
                         h[k] * h[k] * (d_[k] - d_[k + 1]) / 12.0;
  }
}

size_t PchipCurve::Segment(double x) const {
  const double span = x_.back() - x_.front();
  const double slack = 1e-12 * span;
  if (!(x >= x_.front() - slack && x <= x_.back() + slack)) {
    throw Error(ErrorCode::kRangeOutsideDomain,
                FormatDouble(x) + " outside [" + FormatDouble(x_.front()) + ", " +
                    FormatDouble(x_.back()) + "]");
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const size_t idx = it == x_.begin() ? 0 : static_cast<size_t>(it - x_.begin()) - 1;
  return std::min(idx, x_.size() - 2);
}

double PchipCurve::operator()(double x) const {
  const size_t k = Segment(x);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * d_[k] +
         (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
}

double PchipCurve::Derivative(double x) const {
  const size_t k = Segment(x);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[k] + (-6 * t2 + 6 * t) * y_[k + 1]) / h +
         (3 * t2 - 4 * t + 1) * d_[k] + (3 * t2 - 2 * t) * d_[k + 1];
}

double PchipCurve::Primitive(double x) const {
  const size_t k = Segment(x);
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  return cumulative_[k] +
         h * (y_[k] * (t - t3 + t4 / 2) + h * d_[k] * (t2 / 2 - 2 * t3 / 3 + t4 / 4) +
              y_[k + 1] * (t3 - t4 / 2) + h * d_[k + 1] * (t4 / 4 - t3 / 3));
}

double PchipCurve::Integral(double a, double b) const { return Primitive(b) - Primitive(a); }

std::vector<double> IsotonicIncreasing(std::span<const double> y) {
  struct Block {
    double sum;
    int count;
    double mean() const { return sum / count; }
  };
  std::vector<Block> blocks;
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      blocks[blocks.size() - 2].sum += blocks.back().sum;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), static_cast<size_t>(b.count), b.mean());
  return out;
}

}  // namespace xover
