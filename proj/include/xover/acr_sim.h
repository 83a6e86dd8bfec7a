#ifndef XOVER_ACR_SIM_H_
#define XOVER_ACR_SIM_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "xover/crossover.h"

namespace xover {

// Standard deviation of opinion scores as a function of the mean:
//   sigma(mu)^2 = a * (-mu^2 + (L + H) mu - L H)
// which vanishes at both scale ends.
struct SosModel {
  double a = 0.25;  // tunable; 0 turns the noise off
  double scale_low = 0.0;
  double scale_high = 8.0;

  void Validate() const;
};

double SosSigma(const SosModel& model, double mu);

struct AcrSimConfig {
  int n_observers = 33;
  uint64_t seed = 1;
  bool clamp = true;  // clamp every rating to [L, H]
  bool discretize = false;  // round every rating to the nearest integer
  int n_runs = 100;
};

// Random stream for run `run` of an experiment seeded with `seed`.
std::mt19937_64 RunStream(uint64_t seed, uint64_t run);

// One simulated MOS per ground-truth value: the mean of n_observers
// ratings drawn from N(mu, SosSigma(mu)).
std::vector<double> SimulateMos(std::span<const double> ground_truth, const SosModel& model,
                                const AcrSimConfig& config, std::mt19937_64& rng);

// Same, applied to every point of every curve (run index selects the stream).
CurveSet SimulateCurves(const CurveSet& ground_truth, const SosModel& model,
                        const AcrSimConfig& config, uint64_t run);

struct CrossoverErrorSummary {
  std::string content_id;
  int r1 = 0;
  int r2 = 0;
  double true_crossover = 0.0;
  int n_runs = 0;
  int n_no_crossover = 0;
  std::vector<double> simulated;    // per run with a cross-over, in run order
  std::vector<double> abs_delta;    // |simulated - true|, same order
  double median = 0.0;
  double p05 = 0.0;
  double p95 = 0.0;
};

// Simulates n_runs ACR studies on the subjective ground-truth curves and
// reports, per content and adjacent resolution pair, the distribution of
// |cross-over error|. Throws kMissingCrossover when the ground truth itself
// has no cross-over for a pair.
std::vector<CrossoverErrorSummary> CrossoverErrorExperiment(const CurveSet& ground_truth,
                                                            const SosModel& model,
                                                            const AcrSimConfig& config,
                                                            const CrossoverOptions& options = {});

// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double Percentile(std::vector<double> values, double q);

// content_id,r1,r2,true_crossover_kbps,n_runs,n_no_crossover,median_abs_delta,p05_abs_delta,p95_abs_delta
void WriteErrorSummary(std::ostream& out, const std::vector<CrossoverErrorSummary>& rows);

// content_id,resolution,curve,bitrate_kbps,quality for the ground truth and
// the first simulated run, sampled on `grid_points` bitrates per curve.
void WritePlotData(std::ostream& out, const CurveSet& ground_truth, const SosModel& model,
                   const AcrSimConfig& config, int grid_points);

}  // namespace xover

#endif  // XOVER_ACR_SIM_H_
