#include "xover/benchmark.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>

#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

namespace {

void CheckPaired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "correlation inputs differ in length");
  }
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "correlation needs >= 2 points");
}

}  // namespace

std::vector<double> FractionalRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Plcc(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::kDegenerateInput, "correlation of a constant vector");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double Srocc(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const auto rx = FractionalRanks(x);
  const auto ry = FractionalRanks(y);
  return Plcc(rx, ry);
}

std::vector<double> LogisticMap(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const size_t n = x.size();
  auto model = [](const Eigen::Vector4d& b, double v) {
    return b[1] + (b[0] - b[1]) / (1.0 + std::exp(-(v - b[2]) / std::abs(b[3])));
  };
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double sx = 0.0;
  for (double v : x) sx += (v - mx) * (v - mx);
  sx = std::sqrt(sx / static_cast<double>(n));
  if (sx == 0.0) throw Error(ErrorCode::kDegenerateInput, "logistic fit of a constant vector");
  Eigen::Vector4d b(*std::max_element(y.begin(), y.end()), *std::min_element(y.begin(), y.end()),
                    mx, sx);
  auto sse = [&](const Eigen::Vector4d& p) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::pow(y[i] - model(p, x[i]), 2);
    return s;
  };
  double lambda = 1e-3;
  double current = sse(b);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd jac(n, 4);
    Eigen::VectorXd resid(n);
    for (size_t i = 0; i < n; ++i) {
      resid[static_cast<Eigen::Index>(i)] = y[i] - model(b, x[i]);
      for (int k = 0; k < 4; ++k) {
        Eigen::Vector4d bp = b;
        const double h = 1e-7 * std::max(1.0, std::abs(b[k]));
        bp[k] += h;
        jac(static_cast<Eigen::Index>(i), k) = (model(bp, x[i]) - model(b, x[i])) / h;
      }
    }
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d jtr = jac.transpose() * resid;
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector4d step = damped.ldlt().solve(jtr);
      const Eigen::Vector4d candidate = b + step;
      const double value = sse(candidate);
      if (std::isfinite(value) && value < current) {
        const double gain = current - value;
        b = candidate;
        current = value;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (gain < 1e-14 * std::max(1.0, current)) iter = 200;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  std::vector<double> mapped(n);
  for (size_t i = 0; i < n; ++i) mapped[i] = model(b, x[i]);
  return mapped;
}

std::map<std::string, double> MetricScores::ForContent(const std::string& content_id) const {
  std::map<std::string, double> out;
  for (const auto& [key, value] : scores) {
    if (key.first == content_id) out.emplace(key.second, value);
  }
  return out;
}

std::map<std::string, MetricScores> ParseMetricScores(std::istream& in, const std::string& source,
                                                      const std::vector<Condition>& conditions) {
  std::map<std::string, const Condition*> by_id;
  for (const auto& c : conditions) by_id.emplace(c.condition_id, &c);
  const CsvTable table = CsvTable::Parse(in, source);
  const size_t content_col = table.RequireColumn("content_id");
  const size_t id_col = table.RequireColumn("condition_id");
  const size_t metric_col = table.RequireColumn("metric");
  const size_t score_col = table.RequireColumn("score");
  std::map<std::string, MetricScores> out;
  for (size_t i = 0; i < table.rows().size(); ++i) {
    const auto& row = table.rows()[i];
    const std::string where = source + ": row " + std::to_string(i + 2);
    auto it = by_id.find(row[id_col]);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kUnknownCondition, where + ": unknown condition '" + row[id_col] + "'");
    }
    if (it->second->content_id != row[content_col]) {
      throw Error(ErrorCode::kCrossContentVote, where + ": condition '" + row[id_col] +
                                                    "' belongs to '" + it->second->content_id + "'");
    }
    MetricScores& m = out[row[metric_col]];
    m.metric_name = row[metric_col];
    if (!m.scores.emplace(std::make_pair(row[content_col], row[id_col]),
                          ParseDouble(row[score_col], where))
             .second) {
      throw Error(ErrorCode::kDuplicateId, where + ": repeated score");
    }
  }
  return out;
}

std::map<std::string, MetricScores> LoadMetricScores(const std::string& path,
                                                     const std::vector<Condition>& conditions) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open metric scores " + path);
  return ParseMetricScores(in, path, conditions);
}

namespace {

void FillCell(CorrelationCell& cell, const std::vector<double>& metric,
              const std::vector<double>& jod, const CorrelationOptions& options) {
  cell.n_points = static_cast<int>(metric.size());
  if (metric.size() < 2) {
    cell.note = "InsufficientOverlap";
    return;
  }
  try {
    cell.srocc = Srocc(metric, jod);
    cell.plcc = options.logistic_fit ? Plcc(LogisticMap(metric, jod), jod) : Plcc(metric, jod);
  } catch (const Error& e) {
    cell.srocc.reset();
    cell.plcc.reset();
    cell.note = ErrorCodeName(e.code());
  }
}

}  // namespace

std::vector<CorrelationCell> CorrelationReport(const std::map<std::string, QualityScale>& scales,
                                               const std::map<std::string, MetricScores>& metrics,
                                               const std::vector<Condition>& conditions,
                                               const CorrelationOptions& options) {
  std::set<int, std::greater<>> resolutions;
  for (const auto& c : conditions) resolutions.insert(c.resolution);
  std::vector<CorrelationCell> cells;
  for (const auto& [name, metric] : metrics) {
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> per_res;
    std::pair<std::vector<double>, std::vector<double>> overall;
    for (const auto& c : conditions) {
      auto s = scales.find(c.content_id);
      if (s == scales.end()) continue;
      auto j = s->second.jod.find(c.condition_id);
      auto m = metric.scores.find({c.content_id, c.condition_id});
      if (j == s->second.jod.end() || m == metric.scores.end()) continue;
      per_res[c.resolution].first.push_back(m->second);
      per_res[c.resolution].second.push_back(j->second);
      overall.first.push_back(m->second);
      overall.second.push_back(j->second);
    }
    for (int res : resolutions) {
      CorrelationCell cell{name, std::to_string(res) + "p", {}, {}, 0, {}};
      FillCell(cell, per_res[res].first, per_res[res].second, options);
      cells.push_back(std::move(cell));
    }
    CorrelationCell cell{name, "overall", {}, {}, 0, {}};
    FillCell(cell, overall.first, overall.second, options);
    cells.push_back(std::move(cell));
  }
  return cells;
}

double CellBitrateSrocc(const std::vector<Condition>& cell,
                           const std::map<std::string, double>& quality) {
  std::vector<double> rate, q;
  for (const auto& c : cell) {
    auto it = quality.find(c.condition_id);
    if (it == quality.end()) continue;
    rate.push_back(c.bitrate_kbps);
    q.push_back(it->second);
  }
  if (rate.size() < 2) {
    throw Error(ErrorCode::kDegenerateInput, "monotonicity needs >= 2 conditions in a cell");
  }
  return Srocc(rate, q);
}

std::vector<MonotonicityRow> BitrateMonotonicity(const std::vector<Condition>& conditions,
                                                 const std::map<std::string, double>& quality) {
  std::map<std::pair<std::string, int>, std::vector<Condition>> cells;
  for (const auto& c : conditions) cells[{c.content_id, -c.resolution}].push_back(c);
  std::vector<MonotonicityRow> rows;
  for (const auto& [key, cell] : cells) {
    MonotonicityRow row;
    row.content_id = key.first;
    row.resolution = -key.second;
    for (const auto& c : cell) row.n_points += quality.count(c.condition_id) ? 1 : 0;
    try {
      row.srocc = CellBitrateSrocc(cell, quality);
    } catch (const Error& e) {
      row.note = ErrorCodeName(e.code());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RcqlBenchmarkResult RcqlBenchmark(const std::map<std::string, QualityScale>& scales,
                                  const std::map<std::string, MetricScores>& metrics,
                                  const std::vector<Condition>& conditions,
                                  const RcqlBenchmarkOptions& options) {
  std::vector<std::pair<int, int>> pairs = options.pairs;
  if (pairs.empty()) {
    std::vector<int> res;
    for (const auto& c : conditions) res.push_back(c.resolution);
    pairs = AdjacentResolutionPairs(res);
  }
  RcqlBenchmarkResult result;
  std::map<std::tuple<std::string, int, int>, RcqlAggregate> agg;
  for (const auto& [name, metric] : metrics) {
    for (const auto& [r1, r2] : pairs) agg[{name, r1, r2}] = RcqlAggregate{name, r1, r2};
  }
  for (const auto& [content, scale] : scales) {
    std::map<int, PchipCurve> subjective;
    std::string subjective_problem;
    try {
      for (const auto& curve : CurvesFromValues(conditions, content, scale.jod, "subjective")) {
        subjective.emplace(curve.resolution, FitPchip(curve, options.fit));
      }
    } catch (const Error& e) {
      subjective_problem = e.what();
    }
    for (const auto& [name, metric] : metrics) {
      std::map<int, PchipCurve> predicted;
      std::string problem = subjective_problem;
      if (problem.empty()) {
        try {
          for (const auto& curve : CurvesFromValues(conditions, content, metric.ForContent(content),
                                                    "metric:" + name)) {
            predicted.emplace(curve.resolution, FitPchip(curve, options.fit));
          }
        } catch (const Error& e) {
          problem = e.what();
        }
      }
      for (const auto& [r1, r2] : pairs) {
        RcqlAggregate& cell = agg[{name, r1, r2}];
        const std::string where = content + " " + name + " " + std::to_string(r1) + "p/" +
                                  std::to_string(r2) + "p: ";
        std::string why = problem;
        if (why.empty() && (!subjective.count(r1) || !subjective.count(r2) ||
                            !predicted.count(r1) || !predicted.count(r2))) {
          why = "missing curve";
        }
        if (why.empty()) {
          try {
            RcqlReport report = EvaluateRcql(subjective.at(r1), subjective.at(r2),
                                             predicted.at(r1), predicted.at(r2), options.crossover);
            report.content_id = content;
            report.r1 = r1;
            report.r2 = r2;
            report.metric = name;
            if (report.flag == RcqlFlag::kBothAbsent) {
              ++cell.n_both_absent;
            } else {
              if (report.flag == RcqlFlag::kClamped) ++cell.n_clamped;
              ++cell.n_contents;
              cell.mean_delta_bitrate += report.delta_bitrate;
              cell.mean_rcql_s += report.rcql_s;
              cell.mean_rcql_avg += report.rcql_avg;
            }
            result.rows.push_back(std::move(report));
          } catch (const Error& e) {
            why = e.what();
          }
        }
        if (!why.empty()) {
          ++cell.n_failed;
          result.failures.push_back(where + why);
        }
      }
    }
  }
  for (auto& [key, cell] : agg) {
    if (cell.n_contents > 0) {
      cell.mean_delta_bitrate /= cell.n_contents;
      cell.mean_rcql_s /= cell.n_contents;
      cell.mean_rcql_avg /= cell.n_contents;
    }
    result.aggregates.push_back(cell);
  }
  return result;
}

namespace {

std::string OptionalCell(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void WriteCorrelationCsv(std::ostream& out, const std::vector<CorrelationCell>& cells) {
  out << "metric,grouping,srocc,plcc,n_points,note\n";
  for (const auto& c : cells) {
    out << CsvEscape(c.metric) << ',' << c.grouping << ',' << OptionalCell(c.srocc) << ','
        << OptionalCell(c.plcc) << ',' << c.n_points << ',' << c.note << '\n';
  }
}

nlohmann::json CorrelationJson(const std::vector<CorrelationCell>& cells) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : cells) {
    j[c.metric][c.grouping] = {{"srocc", OptionalJson(c.srocc)},
                               {"plcc", OptionalJson(c.plcc)},
                               {"n_points", c.n_points}};
  }
  return j;
}

void WriteMonotonicityCsv(std::ostream& out, const std::vector<MonotonicityRow>& rows) {
  out << "content_id,resolution,srocc,n_points,note\n";
  for (const auto& r : rows) {
    out << CsvEscape(r.content_id) << ',' << r.resolution << ',' << OptionalCell(r.srocc) << ','
        << r.n_points << ',' << r.note << '\n';
  }
}

void WriteRcqlAggregateCsv(std::ostream& out, const std::vector<RcqlAggregate>& rows) {
  out << "metric,r1,r2,mean_delta_bitrate,mean_rcql_s,mean_rcql_avg,n_contents,n_clamped,"
         "n_both_absent,n_failed\n";
  for (const auto& r : rows) {
    out << CsvEscape(r.metric) << ',' << r.r1 << ',' << r.r2 << ','
        << FormatDouble(r.mean_delta_bitrate) << ',' << FormatDouble(r.mean_rcql_s) << ','
        << FormatDouble(r.mean_rcql_avg) << ',' << r.n_contents << ',' << r.n_clamped << ','
        << r.n_both_absent << ',' << r.n_failed << '\n';
  }
}

nlohmann::json RcqlBenchmarkJson(const RcqlBenchmarkResult& result) {
  nlohmann::json j;
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : result.aggregates) {
    j["aggregates"].push_back({{"metric", a.metric},
                               {"pair", std::to_string(a.r1) + "p vs " + std::to_string(a.r2) + "p"},
                               {"delta_bitrate", a.mean_delta_bitrate},
                               {"rcql_s", a.mean_rcql_s},
                               {"rcql_avg", a.mean_rcql_avg},
                               {"n_contents", a.n_contents},
                               {"n_clamped", a.n_clamped},
                               {"n_both_absent", a.n_both_absent},
                               {"n_failed", a.n_failed}});
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    j["rows"].push_back({{"content_id", r.content_id},
                         {"r1", r.r1},
                         {"r2", r.r2},
                         {"metric", r.metric},
                         {"c_kbps", OptionalJson(r.c)},
                         {"c_hat_kbps", OptionalJson(r.c_hat)},
                         {"delta_bitrate", r.delta_bitrate},
                         {"rcql_s", r.rcql_s},
                         {"rcql_avg", r.rcql_avg},
                         {"flags", RcqlFlagName(r.flag)}});
  }
  j["failures"] = result.failures;
  return j;
}

}  // namespace xover
