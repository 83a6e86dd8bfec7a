#ifndef XOVER_SAMPLER_H_
#define XOVER_SAMPLER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "xover/pcm.h"
#include "xover/scaling.h"

namespace xover {

// Ground truth for simulated observers.
struct ObserverModel {
  std::map<std::string, double> true_jod;
  // A simulated observer answers TIE when its perceived difference is
  // smaller than this (JOD units).
  double tie_band = 0.0;
};

enum class Strategy { kActive, kRandom };
Strategy ParseStrategy(const std::string& name);
const char* StrategyName(Strategy strategy);

// Live state of one content's comparison study: the tallies so far and the
// most recent scale estimate (absent until the comparison graph connects).
class SamplerState {
 public:
  SamplerState(std::string content_id, std::vector<Condition> conditions,
               ScalingOptions scaling = {});
  explicit SamplerState(PairCountMatrix pcm, ScalingOptions scaling = {});

  const PairCountMatrix& pcm() const { return pcm_; }
  const std::optional<QualityScale>& scale() const { return scale_; }
  // Number of votes recorded so far.
  int iteration() const { return iteration_; }
  // Votes between scale refreshes: max(1, k / 2) for k conditions.
  int refresh_interval() const;

  // Tallies a vote and refreshes the scale when due.
  void Record(const std::string& cond_x, const std::string& cond_y, Choice choice);
  // Forces a re-scale now (no-op while the graph is disconnected).
  void Refresh();

 private:
  PairCountMatrix pcm_;
  ScalingOptions scaling_;
  std::optional<QualityScale> scale_;
  int iteration_ = 0;
  int since_refresh_ = 0;
};

// Expected-information score of comparing two conditions whose current
// estimated JOD difference is `delta_jod` and which have `r` ratings:
//   p (1 - p) / (r + 1) * (d p / d delta)^2,  p = PrefProbability(delta).
double PairInformation(double delta_jod, int r);

// Most informative pair under the current estimate. Ties go to the pair with
// fewer ratings, then to canonical order. While the comparison graph is
// disconnected, returns the first bitrate-adjacent pair that joins two
// components. Deterministic in the state.
PairKey NextPair(const SamplerState& state);

// Uniform over all unordered pairs.
PairKey RandomPair(const SamplerState& state, std::mt19937_64& rng);
PairKey RandomPair(const SamplerState& state, uint64_t seed);

// One simulated vote on (cond_x, cond_y) as (A, B).
Choice SimulateVote(const ObserverModel& model, const std::string& cond_x,
                    const std::string& cond_y, std::mt19937_64& rng);

PairKey SelectPair(const SamplerState& state, Strategy strategy, std::mt19937_64& rng);

// Runs a simulated study of `n_votes` votes on one content.
PairCountMatrix SimulateStudy(const ObserverModel& model, const std::vector<Condition>& conditions,
                              int n_votes, Strategy strategy, uint64_t seed);

struct StudyShape {
  int n_observers = 30;
  int votes_per_observer = 55;
  Strategy strategy = Strategy::kActive;
};

// Multi-observer, multi-content simulation emitting a vote log. Observers
// take turns; each observer's votes rotate over the contents round-robin
// and draw pairs from that content's shared state.
std::vector<Vote> SimulateStudyVotes(const ObserverModel& model,
                                     const std::vector<Condition>& conditions,
                                     const StudyShape& shape, uint64_t seed);

}  // namespace xover

#endif  // XOVER_SAMPLER_H_
