#include "xover/acr_sim.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

void SosModel::Validate() const {
  if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "SOS a must lie in [0, 1]");
  if (!(scale_high > scale_low)) {
    throw Error(ErrorCode::kInvalidArgument, "rating scale must have high > low");
  }
}

double SosSigma(const SosModel& model, double mu) {
  model.Validate();
  if (!(mu >= model.scale_low && mu <= model.scale_high)) {
    throw Error(ErrorCode::kOutOfScale, FormatDouble(mu) + " outside [" +
                                            FormatDouble(model.scale_low) + ", " +
                                            FormatDouble(model.scale_high) + "]");
  }
  const double variance =
      model.a * (-mu * mu + (model.scale_low + model.scale_high) * mu -
                 model.scale_low * model.scale_high);
  return std::sqrt(std::max(0.0, variance));
}

std::mt19937_64 RunStream(uint64_t seed, uint64_t run) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(run), static_cast<uint32_t>(run >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> SimulateMos(std::span<const double> ground_truth, const SosModel& model,
                                const AcrSimConfig& config, std::mt19937_64& rng) {
  if (config.n_observers < 1) throw Error(ErrorCode::kInvalidArgument, "n_observers must be >= 1");
  std::vector<double> mos;
  mos.reserve(ground_truth.size());
  for (double mu : ground_truth) {
    const double sigma = SosSigma(model, mu);
    if (sigma == 0.0) {
      mos.push_back(config.discretize ? std::round(mu) : mu);
      continue;
    }
    std::normal_distribution<double> rating(mu, sigma);
    double sum = 0.0;
    for (int i = 0; i < config.n_observers; ++i) {
      double r = rating(rng);
      if (config.clamp) r = std::clamp(r, model.scale_low, model.scale_high);
      if (config.discretize) r = std::round(r);
      sum += r;
    }
    mos.push_back(sum / config.n_observers);
  }
  return mos;
}

CurveSet SimulateCurves(const CurveSet& ground_truth, const SosModel& model,
                        const AcrSimConfig& config, uint64_t run) {
  std::mt19937_64 rng = RunStream(config.seed, run);
  CurveSet out = ground_truth;
  for (auto& [key, curve] : out) {
    std::vector<double> mu;
    for (const auto& p : curve.points) mu.push_back(p.quality);
    const std::vector<double> mos = SimulateMos(mu, model, config, rng);
    for (size_t i = 0; i < mos.size(); ++i) curve.points[i].quality = mos[i];
  }
  return out;
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const size_t below = static_cast<size_t>(std::floor(pos));
  const size_t above = std::min(below + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return values[below] + frac * (values[above] - values[below]);
}

namespace {

struct PairPlan {
  std::string content_id;
  int r1;
  int r2;
  CurveKey k1;
  CurveKey k2;
};

std::vector<PairPlan> PlanPairs(const CurveSet& curves) {
  std::map<std::string, std::vector<int>> resolutions;
  for (const auto& [key, curve] : curves) {
    if (std::get<2>(key) != "subjective") continue;
    resolutions[std::get<0>(key)].push_back(std::get<1>(key));
  }
  std::vector<PairPlan> plan;
  for (const auto& [content, res] : resolutions) {
    for (const auto& [r1, r2] : AdjacentResolutionPairs(res)) {
      plan.push_back({content, r1, r2, {content, r1, "subjective"}, {content, r2, "subjective"}});
    }
  }
  return plan;
}

}  // namespace

std::vector<CrossoverErrorSummary> CrossoverErrorExperiment(const CurveSet& ground_truth,
                                                            const SosModel& model,
                                                            const AcrSimConfig& config,
                                                            const CrossoverOptions& options) {
  model.Validate();
  if (config.n_runs < 1) throw Error(ErrorCode::kInvalidArgument, "n_runs must be >= 1");
  const std::vector<PairPlan> plan = PlanPairs(ground_truth);
  std::vector<CrossoverErrorSummary> rows;
  for (const auto& p : plan) {
    const CrossoverResult truth = FindCrossover(FitPchip(ground_truth.at(p.k1)),
                                                FitPchip(ground_truth.at(p.k2)), options);
    if (!truth.bitrate) {
      throw Error(ErrorCode::kMissingCrossover,
                  "ground truth of '" + p.content_id + "' has no cross-over between " +
                      std::to_string(p.r1) + "p and " + std::to_string(p.r2) + "p");
    }
    CrossoverErrorSummary row;
    row.content_id = p.content_id;
    row.r1 = p.r1;
    row.r2 = p.r2;
    row.true_crossover = *truth.bitrate;
    rows.push_back(std::move(row));
  }
  for (int run = 0; run < config.n_runs; ++run) {
    const CurveSet simulated = SimulateCurves(ground_truth, model, config, static_cast<uint64_t>(run));
    for (size_t i = 0; i < plan.size(); ++i) {
      const CrossoverResult r = FindCrossover(FitPchip(simulated.at(plan[i].k1)),
                                              FitPchip(simulated.at(plan[i].k2)), options);
      auto& row = rows[i];
      ++row.n_runs;
      if (!r.bitrate) {
        ++row.n_no_crossover;
        continue;
      }
      row.simulated.push_back(*r.bitrate);
      row.abs_delta.push_back(DeltaBitrate(*r.bitrate, row.true_crossover));
    }
  }
  for (auto& row : rows) {
    if (row.abs_delta.empty()) continue;
    row.median = Percentile(row.abs_delta, 50.0);
    row.p05 = Percentile(row.abs_delta, 5.0);
    row.p95 = Percentile(row.abs_delta, 95.0);
  }
  return rows;
}

void WriteErrorSummary(std::ostream& out, const std::vector<CrossoverErrorSummary>& rows) {
  out << "content_id,r1,r2,true_crossover_kbps,n_runs,n_no_crossover,median_abs_delta,"
         "p05_abs_delta,p95_abs_delta\n";
  for (const auto& r : rows) {
    const bool any = !r.abs_delta.empty();
    out << CsvEscape(r.content_id) << ',' << r.r1 << ',' << r.r2 << ','
        << FormatDouble(r.true_crossover) << ',' << r.n_runs << ',' << r.n_no_crossover << ','
        << (any ? FormatDouble(r.median) : "") << ',' << (any ? FormatDouble(r.p05) : "") << ','
        << (any ? FormatDouble(r.p95) : "") << '\n';
  }
}

void WritePlotData(std::ostream& out, const CurveSet& ground_truth, const SosModel& model,
                   const AcrSimConfig& config, int grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::kInvalidArgument, "grid_points must be >= 2");
  out << "content_id,resolution,curve,bitrate_kbps,quality\n";
  const CurveSet simulated = SimulateCurves(ground_truth, model, config, 0);
  for (const auto* set : {&ground_truth, &simulated}) {
    const char* label = set == &ground_truth ? "ground_truth" : "simulated_run0";
    for (const auto& [key, curve] : *set) {
      const PchipCurve f = FitPchip(curve);
      for (int k = 0; k < grid_points; ++k) {
        const double x = f.x_min() + (f.x_max() - f.x_min()) * k / (grid_points - 1);
        out << CsvEscape(curve.content_id) << ',' << curve.resolution << ',' << label << ','
            << FormatDouble(x) << ',' << FormatDouble(f(x)) << '\n';
      }
    }
  }
}

}  // namespace xover
