#ifndef XOVER_BENCHMARK_H_
#define XOVER_BENCHMARK_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "xover/crossover.h"
#include "xover/pcm.h"
#include "xover/scaling.h"

namespace xover {

// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> FractionalRanks(std::span<const double> values);

// Both throw kInvalidArgument on length mismatch or fewer than 2 points and
// kDegenerateInput when either side is constant.
double Plcc(std::span<const double> x, std::span<const double> y);
double Srocc(std::span<const double> x, std::span<const double> y);

// Four-parameter logistic b1 + (b2 - b1) / (1 + exp(-(x - b3) / |b4|)) fitted
// to (x, y) by Levenberg-Marquardt; returns the mapped x.
std::vector<double> LogisticMap(std::span<const double> x, std::span<const double> y);

// Scores of one objective metric, keyed by (content_id, condition_id).
struct MetricScores {
  std::string metric_name;
  std::map<std::pair<std::string, std::string>, double> scores;

  std::map<std::string, double> ForContent(const std::string& content_id) const;
};

// content_id,condition_id,metric,score; keyed by metric name. Every
// condition must exist in the manifest under the same content.
std::map<std::string, MetricScores> LoadMetricScores(const std::string& path,
                                                     const std::vector<Condition>& conditions);
std::map<std::string, MetricScores> ParseMetricScores(std::istream& in, const std::string& source,
                                                      const std::vector<Condition>& conditions);

struct CorrelationCell {
  std::string metric;
  std::string grouping;  // "<res>p" or "overall"
  std::optional<double> srocc;
  std::optional<double> plcc;
  int n_points = 0;
  std::string note;  // why a cell is empty
};

struct CorrelationOptions {
  bool logistic_fit = false;  // applied before PLCC only
};

// JOD is the y-variable. Per-resolution cells pool that resolution across
// contents; "overall" pools every condition with both values.
std::vector<CorrelationCell> CorrelationReport(const std::map<std::string, QualityScale>& scales,
                                               const std::map<std::string, MetricScores>& metrics,
                                               const std::vector<Condition>& conditions,
                                               const CorrelationOptions& options = {});

struct MonotonicityRow {
  std::string content_id;
  int resolution = 0;
  std::optional<double> srocc;
  int n_points = 0;
  std::string note;
};

// SROCC between bitrate and quality inside each (content, resolution).
std::vector<MonotonicityRow> BitrateMonotonicity(const std::vector<Condition>& conditions,
                                                 const std::map<std::string, double>& quality);
// Strict form for a single cell; throws kDegenerateInput when undefined.
double CellBitrateSrocc(const std::vector<Condition>& cell,
                           const std::map<std::string, double>& quality);

struct RcqlAggregate {
  std::string metric;
  int r1 = 0;
  int r2 = 0;
  double mean_delta_bitrate = 0.0;
  double mean_rcql_s = 0.0;
  double mean_rcql_avg = 0.0;
  int n_contents = 0;  // contributing to the means
  int n_clamped = 0;
  int n_both_absent = 0;  // excluded from the means
  int n_failed = 0;
};

struct RcqlBenchmarkResult {
  std::vector<RcqlReport> rows;
  std::vector<RcqlAggregate> aggregates;
  std::vector<std::string> failures;  // per-content problems, not fatal
};

struct RcqlBenchmarkOptions {
  FitOptions fit;
  CrossoverOptions crossover;
  // Empty: adjacent resolution pairs of the manifest.
  std::vector<std::pair<int, int>> pairs;
};

RcqlBenchmarkResult RcqlBenchmark(const std::map<std::string, QualityScale>& scales,
                                  const std::map<std::string, MetricScores>& metrics,
                                  const std::vector<Condition>& conditions,
                                  const RcqlBenchmarkOptions& options = {});

void WriteCorrelationCsv(std::ostream& out, const std::vector<CorrelationCell>& cells);
nlohmann::json CorrelationJson(const std::vector<CorrelationCell>& cells);
void WriteMonotonicityCsv(std::ostream& out, const std::vector<MonotonicityRow>& rows);
void WriteRcqlAggregateCsv(std::ostream& out, const std::vector<RcqlAggregate>& rows);
nlohmann::json RcqlBenchmarkJson(const RcqlBenchmarkResult& result);

}  // namespace xover

#endif  // XOVER_BENCHMARK_H_
