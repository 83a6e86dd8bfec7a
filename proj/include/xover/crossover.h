#ifndef XOVER_CROSSOVER_H_
#define XOVER_CROSSOVER_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "xover/pchip.h"
#include "xover/pcm.h"
#include "xover/scaling.h"

namespace xover {

struct RdPoint {
  double bitrate_kbps;
  double quality;
};

// Rate-quality samples of one (content, resolution, source). Source is
// "subjective" or "metric:<name>".
struct RdCurve {
  std::string content_id;
  int resolution = 0;
  std::string source = "subjective";
  std::vector<RdPoint> points;  // strictly increasing bitrate

  // Throws kTooFewPoints / kInvalidArgument on a broken invariant.
  void Validate() const;
};

struct FitOptions {
  // Replace the qualities by their isotonic (non-decreasing) fit first.
  bool enforce_monotone = false;
};

PchipCurve FitPchip(const RdCurve& curve, const FitOptions& options = {});

struct CrossoverOptions {
  int grid_points = 2048;
  double relative_tolerance = 1e-9;
};

struct CrossoverResult {
  int r1 = 0;  // higher resolution
  int r2 = 0;
  std::optional<double> bitrate;  // min root; absent = no cross-over
  std::vector<double> all_roots;  // ascending
  double domain_lo = 0.0;
  double domain_hi = 0.0;
  // Sign of f1 - f2 over the domain when there is no root: +1 when the higher
  // resolution is ahead everywhere, -1 when behind, 0 when identical.
  int dominant_sign = 0;

  // Mean of the smallest and largest root (reporting only).
  std::optional<double> MidRange() const;
};

// Roots of f1 - f2 on the intersection of both domains: sign changes on a
// uniform grid refined by bisection. Touches without a sign change are not
// roots. Throws kNoDomainOverlap.
CrossoverResult FindCrossover(const PchipCurve& f1, const PchipCurve& f2,
                              const CrossoverOptions& options = {});

double DeltaBitrate(double c, double c_hat);

// | |int_c^c_hat f1| - |int_c^c_hat f2| | on subjective curves. Throws
// kRangeOutsideDomain when [min, max] of (c, c_hat) leaves either domain.
double Rcql(const PchipCurve& f1, const PchipCurve& f2, double c, double c_hat);

// rcql_s / delta_bitrate, or 0 when delta_bitrate is 0.
double RcqlAvg(double rcql_s, double delta_bitrate);

enum class RcqlFlag { kNone, kClamped, kBothAbsent };
const char* RcqlFlagName(RcqlFlag flag);

struct RcqlReport {
  std::string content_id;
  int r1 = 0;
  int r2 = 0;
  std::string metric;
  std::optional<double> c;      // subjective cross-over as found
  std::optional<double> c_hat;  // metric cross-over as found
  double c_used = 0.0;          // after the missing-cross-over policy
  double c_hat_used = 0.0;
  double delta_bitrate = 0.0;
  double rcql_s = 0.0;
  double rcql_avg = 0.0;
  RcqlFlag flag = RcqlFlag::kNone;
};

// Full comparison for one resolution pair. A missing cross-over is placed
// at the domain end on the side where the curves would meet (lower end when
// the higher resolution is ahead everywhere, upper end otherwise) and the row
// is flagged clamped; when both are missing the row is zero and flagged
// both-absent.
RcqlReport EvaluateRcql(const PchipCurve& subj_r1, const PchipCurve& subj_r2,
                        const PchipCurve& metric_r1, const PchipCurve& metric_r2,
                        const CrossoverOptions& options = {});

// Key: (content_id, resolution, source).
using CurveKey = std::tuple<std::string, int, std::string>;
using CurveSet = std::map<CurveKey, RdCurve>;

// content_id,resolution,source,bitrate_kbps,quality
CurveSet LoadRdCurves(const std::string& path);
CurveSet ParseRdCurves(std::istream& in, const std::string& source_name);
void WriteRdCurves(std::ostream& out, const CurveSet& curves);

// Groups a content's per-condition values into one curve per resolution.
// Conditions without a value are skipped.
std::vector<RdCurve> CurvesFromValues(const std::vector<Condition>& conditions,
                                      const std::string& content_id,
                                      const std::map<std::string, double>& value_by_condition,
                                      const std::string& source);

// Adjacent resolution pairs (higher, lower), highest first.
std::vector<std::pair<int, int>> AdjacentResolutionPairs(std::vector<int> resolutions);

// content_id,r1,r2,source,crossover_kbps,flags
void WriteCrossoverHeader(std::ostream& out);
void WriteCrossoverRow(std::ostream& out, const std::string& content_id, const std::string& source,
                       const CrossoverResult& result, bool report_mid_range = false);
// content_id,r1,r2,metric,c_kbps,c_hat_kbps,delta_bitrate,rcql_s,rcql_avg,flags
void WriteRcqlHeader(std::ostream& out);
void WriteRcqlRow(std::ostream& out, const RcqlReport& report);

}  // namespace xover

#endif  // XOVER_CROSSOVER_H_
