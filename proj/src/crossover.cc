#include "xover/crossover.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

void RdCurve::Validate() const {
  const std::string what = "curve (" + content_id + ", " + std::to_string(resolution) + ", " +
                           source + ")";
  if (points.size() < 2) {
    throw Error(ErrorCode::kTooFewPoints, what + " has " + std::to_string(points.size()) +
                                              " point(s), needs 2");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].bitrate_kbps > 0.0) || !std::isfinite(points[i].bitrate_kbps)) {
      throw Error(ErrorCode::kInvalidArgument, what + ": bitrate must be positive");
    }
    if (std::isnan(points[i].quality) || !std::isfinite(points[i].quality)) {
      throw Error(ErrorCode::kInvalidArgument, what + ": quality is not finite");
    }
    if (i > 0 && !(points[i].bitrate_kbps > points[i - 1].bitrate_kbps)) {
      throw Error(ErrorCode::kInvalidArgument, what + ": bitrates not strictly increasing");
    }
  }
}

PchipCurve FitPchip(const RdCurve& curve, const FitOptions& options) {
  curve.Validate();
  std::vector<double> x, y;
  for (const auto& p : curve.points) {
    x.push_back(p.bitrate_kbps);
    y.push_back(p.quality);
  }
  if (options.enforce_monotone) y = IsotonicIncreasing(y);
  return PchipCurve(x, y);
}

std::optional<double> CrossoverResult::MidRange() const {
  if (all_roots.empty()) return std::nullopt;
  return 0.5 * (all_roots.front() + all_roots.back());
}

CrossoverResult FindCrossover(const PchipCurve& f1, const PchipCurve& f2,
                              const CrossoverOptions& options) {
  CrossoverResult result;
  result.domain_lo = std::max(f1.x_min(), f2.x_min());
  result.domain_hi = std::min(f1.x_max(), f2.x_max());
  if (!(result.domain_hi > result.domain_lo)) {
    throw Error(ErrorCode::kNoDomainOverlap,
                "curve domains [" + FormatDouble(f1.x_min()) + ", " + FormatDouble(f1.x_max()) +
                    "] and [" + FormatDouble(f2.x_min()) + ", " + FormatDouble(f2.x_max()) +
                    "] do not overlap");
  }
  if (options.grid_points < 2) throw Error(ErrorCode::kInvalidArgument, "grid_points < 2");

  const double lo = result.domain_lo;
  const double hi = result.domain_hi;
  const double span = hi - lo;
  const int n = options.grid_points;
  auto grid_x = [&](int k) { return k == n - 1 ? hi : lo + span * k / (n - 1); };
  auto diff = [&](double x) { return f1(x) - f2(x); };
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };

  int last_sign = 0;
  int last_index = -1;
  int sign_total = 0;
  for (int k = 0; k < n; ++k) {
    const double x = grid_x(k);
    const int s = sign(diff(x));
    if (s == 0) continue;
    sign_total += s;
    if (last_sign != 0 && s != last_sign) {
      if (last_index == k - 1) {
        double a = grid_x(last_index);
        double b = x;
        const double tol = options.relative_tolerance * span;
        while (b - a > tol) {
          const double mid = 0.5 * (a + b);
          if (sign(diff(mid)) == last_sign) {
            a = mid;
          } else {
            b = mid;
          }
        }
        result.all_roots.push_back(0.5 * (a + b));
      } else {
        // The curves coincide on grid points between the two signs; the
        // crossing starts at the first of them.
        result.all_roots.push_back(grid_x(last_index + 1));
      }
    }
    last_sign = s;
    last_index = k;
  }
  if (!result.all_roots.empty()) {
    result.bitrate = result.all_roots.front();
  } else {
    result.dominant_sign = sign(sign_total);
  }
  return result;
}

double DeltaBitrate(double c, double c_hat) { return std::abs(c - c_hat); }

double Rcql(const PchipCurve& f1, const PchipCurve& f2, double c, double c_hat) {
  const double lo = std::min(c, c_hat);
  const double hi = std::max(c, c_hat);
  for (const PchipCurve* f : {&f1, &f2}) {
    if (lo < f->x_min() || hi > f->x_max()) {
      throw Error(ErrorCode::kRangeOutsideDomain,
                  "[" + FormatDouble(lo) + ", " + FormatDouble(hi) + "] not inside [" +
                      FormatDouble(f->x_min()) + ", " + FormatDouble(f->x_max()) + "]");
    }
  }
  return std::abs(std::abs(f1.Integral(c, c_hat)) - std::abs(f2.Integral(c, c_hat)));
}

double RcqlAvg(double rcql_s, double delta_bitrate) {
  if (delta_bitrate < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative delta bitrate");
  return delta_bitrate == 0.0 ? 0.0 : rcql_s / delta_bitrate;
}

const char* RcqlFlagName(RcqlFlag flag) {
  switch (flag) {
    case RcqlFlag::kNone: return "";
    case RcqlFlag::kClamped: return "clamped";
    case RcqlFlag::kBothAbsent: return "both-absent";
  }
  return "";
}

namespace {

double ClampedCrossover(const CrossoverResult& r) {
  if (r.bitrate) return *r.bitrate;
  return r.dominant_sign >= 0 ? r.domain_lo : r.domain_hi;
}

}  // namespace

RcqlReport EvaluateRcql(const PchipCurve& subj_r1, const PchipCurve& subj_r2,
                        const PchipCurve& metric_r1, const PchipCurve& metric_r2,
                        const CrossoverOptions& options) {
  const CrossoverResult subjective = FindCrossover(subj_r1, subj_r2, options);
  const CrossoverResult predicted = FindCrossover(metric_r1, metric_r2, options);
  RcqlReport report;
  report.c = subjective.bitrate;
  report.c_hat = predicted.bitrate;
  if (!report.c && !report.c_hat) {
    report.flag = RcqlFlag::kBothAbsent;
    return report;
  }
  report.c_used = ClampedCrossover(subjective);
  report.c_hat_used = ClampedCrossover(predicted);
  if (!report.c || !report.c_hat) report.flag = RcqlFlag::kClamped;
  // The loss integral lives on the subjective curves.
  const double lo = subjective.domain_lo;
  const double hi = subjective.domain_hi;
  const double limited = std::clamp(report.c_hat_used, lo, hi);
  if (limited != report.c_hat_used) {
    report.c_hat_used = limited;
    report.flag = RcqlFlag::kClamped;
  }
  report.delta_bitrate = DeltaBitrate(report.c_used, report.c_hat_used);
  report.rcql_s = Rcql(subj_r1, subj_r2, report.c_used, report.c_hat_used);
  report.rcql_avg = RcqlAvg(report.rcql_s, report.delta_bitrate);
  return report;
}

CurveSet ParseRdCurves(std::istream& in, const std::string& source_name) {
  const CsvTable table = CsvTable::Parse(in, source_name);
  const size_t content_col = table.RequireColumn("content_id");
  const size_t res_col = table.RequireColumn("resolution");
  const size_t source_col = table.RequireColumn("source");
  const size_t rate_col = table.RequireColumn("bitrate_kbps");
  const size_t quality_col = table.RequireColumn("quality");
  CurveSet curves;
  for (size_t i = 0; i < table.rows().size(); ++i) {
    const auto& row = table.rows()[i];
    const std::string where = source_name + ": row " + std::to_string(i + 2);
    const int resolution = static_cast<int>(ParseInt(row[res_col], where));
    const std::string source = row[source_col].empty() ? "subjective" : row[source_col];
    RdCurve& curve = curves[{row[content_col], resolution, source}];
    curve.content_id = row[content_col];
    curve.resolution = resolution;
    curve.source = source;
    curve.points.push_back({ParseDouble(row[rate_col], where), ParseDouble(row[quality_col], where)});
  }
  for (auto& [key, curve] : curves) {
    std::sort(curve.points.begin(), curve.points.end(),
              [](const RdPoint& a, const RdPoint& b) { return a.bitrate_kbps < b.bitrate_kbps; });
    try {
      curve.Validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, source_name + ": " + e.what());
    }
  }
  return curves;
}

CurveSet LoadRdCurves(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open curve file " + path);
  return ParseRdCurves(in, path);
}

void WriteRdCurves(std::ostream& out, const CurveSet& curves) {
  out << "content_id,resolution,source,bitrate_kbps,quality\n";
  for (const auto& [key, curve] : curves) {
    for (const auto& p : curve.points) {
      out << CsvEscape(curve.content_id) << ',' << curve.resolution << ','
          << CsvEscape(curve.source) << ',' << FormatDouble(p.bitrate_kbps) << ','
          << FormatDouble(p.quality) << '\n';
    }
  }
}

std::vector<RdCurve> CurvesFromValues(const std::vector<Condition>& conditions,
                                      const std::string& content_id,
                                      const std::map<std::string, double>& value_by_condition,
                                      const std::string& source) {
  std::map<int, RdCurve> by_resolution;
  for (const auto& c : conditions) {
    if (c.content_id != content_id) continue;
    auto it = value_by_condition.find(c.condition_id);
    if (it == value_by_condition.end()) continue;
    RdCurve& curve = by_resolution[c.resolution];
    curve.content_id = content_id;
    curve.resolution = c.resolution;
    curve.source = source;
    curve.points.push_back({c.bitrate_kbps, it->second});
  }
  std::vector<RdCurve> out;
  for (auto& [res, curve] : by_resolution) {
    std::sort(curve.points.begin(), curve.points.end(),
              [](const RdPoint& a, const RdPoint& b) { return a.bitrate_kbps < b.bitrate_kbps; });
    out.push_back(std::move(curve));
  }
  return out;
}

std::vector<std::pair<int, int>> AdjacentResolutionPairs(std::vector<int> resolutions) {
  std::sort(resolutions.begin(), resolutions.end(), std::greater<>());
  resolutions.erase(std::unique(resolutions.begin(), resolutions.end()), resolutions.end());
  std::vector<std::pair<int, int>> pairs;
  for (size_t i = 0; i + 1 < resolutions.size(); ++i) {
    pairs.emplace_back(resolutions[i], resolutions[i + 1]);
  }
  return pairs;
}

void WriteCrossoverHeader(std::ostream& out) {
  out << "content_id,r1,r2,source,crossover_kbps,flags\n";
}

void WriteCrossoverRow(std::ostream& out, const std::string& content_id, const std::string& source,
                       const CrossoverResult& result, bool report_mid_range) {
  std::optional<double> value = report_mid_range ? result.MidRange() : result.bitrate;
  std::string flags;
  if (result.all_roots.size() > 1) flags = report_mid_range ? "multiple;mid-range" : "multiple";
  out << CsvEscape(content_id) << ',' << result.r1 << ',' << result.r2 << ','
      << CsvEscape(source) << ',' << (value ? FormatDouble(*value) : std::string()) << ','
      << flags << '\n';
}

void WriteRcqlHeader(std::ostream& out) {
  out << "content_id,r1,r2,metric,c_kbps,c_hat_kbps,delta_bitrate,rcql_s,rcql_avg,flags\n";
}

void WriteRcqlRow(std::ostream& out, const RcqlReport& r) {
  out << CsvEscape(r.content_id) << ',' << r.r1 << ',' << r.r2 << ',' << CsvEscape(r.metric)
      << ',' << (r.c ? FormatDouble(*r.c) : std::string()) << ','
      << (r.c_hat ? FormatDouble(*r.c_hat) : std::string()) << ','
      << FormatDouble(r.delta_bitrate) << ',' << FormatDouble(r.rcql_s) << ','
      << FormatDouble(r.rcql_avg) << ',' << RcqlFlagName(r.flag) << '\n';
}

}  // namespace xover
