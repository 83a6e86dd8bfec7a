#include "xover/sampler.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "xover/error.h"

namespace xover {

Strategy ParseStrategy(const std::string& name) {
  if (name == "active") return Strategy::kActive;
  if (name == "random") return Strategy::kRandom;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + name + "'");
}

const char* StrategyName(Strategy strategy) {
  return strategy == Strategy::kActive ? "active" : "random";
}

SamplerState::SamplerState(std::string content_id, std::vector<Condition> conditions,
                           ScalingOptions scaling)
    : SamplerState(PairCountMatrix(std::move(content_id), std::move(conditions)),
                   std::move(scaling)) {}

SamplerState::SamplerState(PairCountMatrix pcm, ScalingOptions scaling)
    : pcm_(std::move(pcm)), scaling_(std::move(scaling)) {
  iteration_ = static_cast<int>(pcm_.TotalVotes());
  Refresh();
}

int SamplerState::refresh_interval() const {
  return std::max(1, static_cast<int>(pcm_.size()) / 2);
}

void SamplerState::Record(const std::string& cond_x, const std::string& cond_y, Choice choice) {
  pcm_.Record(cond_x, cond_y, choice);
  ++iteration_;
  ++since_refresh_;
  if (!scale_ || since_refresh_ >= refresh_interval()) Refresh();
}

void SamplerState::Refresh() {
  if (pcm_.size() < 2 || ComparisonComponents(pcm_).size() != 1) return;
  scale_ = ScaleJod(pcm_, scaling_);
  since_refresh_ = 0;
}

double PairInformation(double delta_jod, int r) {
  const double p = PrefProbability(delta_jod);
  const double slope = kJodZ75 * NormalPdf(kJodZ75 * delta_jod);
  return p * (1.0 - p) / (r + 1.0) * slope * slope;
}

namespace {

void RequirePairs(const SamplerState& state) {
  if (state.pcm().size() < 2) {
    throw Error(ErrorCode::kTooFewConditions,
                "content '" + state.pcm().content_id() + "' needs at least 2 conditions");
  }
}

PairKey ColdStartPair(const SamplerState& state) {
  const auto& pcm = state.pcm();
  const auto components = ComparisonComponents(pcm);
  std::map<std::string, size_t> component_of;
  for (size_t c = 0; c < components.size(); ++c) {
    for (const auto& id : components[c]) component_of[id] = c;
  }
  std::vector<const Condition*> order;
  for (const auto& c : pcm.conditions()) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Condition* x, const Condition* y) {
    return std::tie(x->bitrate_kbps, x->resolution, x->condition_id) <
           std::tie(y->bitrate_kbps, y->resolution, y->condition_id);
  });
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    const auto& x = order[i]->condition_id;
    const auto& y = order[i + 1]->condition_id;
    if (component_of[x] != component_of[y]) return PairKey::Of(x, y);
  }
  // Unreachable for a disconnected graph: the bitrate chain spans every node.
  return PairKey::Of(order[0]->condition_id, order[1]->condition_id);
}

}  // namespace

PairKey NextPair(const SamplerState& state) {
  RequirePairs(state);
  const auto& pcm = state.pcm();
  if (pcm.size() == 2) {
    return PairKey::Of(pcm.conditions()[0].condition_id, pcm.conditions()[1].condition_id);
  }
  if (!state.scale()) return ColdStartPair(state);

  const auto& jod = state.scale()->jod;
  std::vector<std::string> ids;
  for (const auto& c : pcm.conditions()) ids.push_back(c.condition_id);
  std::sort(ids.begin(), ids.end());

  std::optional<PairKey> best;
  double best_info = -1.0;
  int best_r = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    for (size_t j = i + 1; j < ids.size(); ++j) {
      const int r = pcm.Counts(ids[i], ids[j]).r();
      const double info = PairInformation(jod.at(ids[i]) - jod.at(ids[j]), r);
      const double tol = 1e-12 * std::max(info, best_info);
      // Pairs are visited in canonical order, so the first of equals wins.
      const bool better = info > best_info + tol ||
                          (std::abs(info - best_info) <= tol && r < best_r);
      if (!best || better) {
        best = PairKey{ids[i], ids[j]};
        best_info = info;
        best_r = r;
      }
    }
  }
  return *best;
}

PairKey RandomPair(const SamplerState& state, std::mt19937_64& rng) {
  RequirePairs(state);
  const auto& conds = state.pcm().conditions();
  const size_t k = conds.size();
  std::uniform_int_distribution<size_t> draw(0, k * (k - 1) / 2 - 1);
  size_t index = draw(rng);
  for (size_t i = 0; i < k; ++i) {
    const size_t row = k - 1 - i;
    if (index < row) {
      return PairKey::Of(conds[i].condition_id, conds[i + 1 + index].condition_id);
    }
    index -= row;
  }
  return PairKey::Of(conds[0].condition_id, conds[1].condition_id);
}

PairKey RandomPair(const SamplerState& state, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return RandomPair(state, rng);
}

Choice SimulateVote(const ObserverModel& model, const std::string& cond_x,
                    const std::string& cond_y, std::mt19937_64& rng) {
  const double delta = model.true_jod.at(cond_x) - model.true_jod.at(cond_y);
  // Perceived difference ~ N(delta, 1 / z75^2), so P(d > 0) = PrefProbability(delta).
  std::normal_distribution<double> noise(0.0, 1.0 / kJodZ75);
  const double perceived = delta + noise(rng);
  if (std::abs(perceived) < model.tie_band) return Choice::kTie;
  return perceived > 0.0 ? Choice::kA : Choice::kB;
}

PairKey SelectPair(const SamplerState& state, Strategy strategy, std::mt19937_64& rng) {
  return strategy == Strategy::kActive ? NextPair(state) : RandomPair(state, rng);
}

PairCountMatrix SimulateStudy(const ObserverModel& model, const std::vector<Condition>& conditions,
                              int n_votes, Strategy strategy, uint64_t seed) {
  if (n_votes < 1) throw Error(ErrorCode::kInvalidArgument, "n_votes must be >= 1");
  if (model.tie_band < 0.0) throw Error(ErrorCode::kInvalidArgument, "tie_band must be >= 0");
  if (conditions.empty()) throw Error(ErrorCode::kTooFewConditions, "no conditions");
  SamplerState state(conditions.front().content_id, conditions);
  std::mt19937_64 rng(seed);
  for (int v = 0; v < n_votes; ++v) {
    const PairKey pair = SelectPair(state, strategy, rng);
    state.Record(pair.first, pair.second, SimulateVote(model, pair.first, pair.second, rng));
  }
  return state.pcm();
}

std::vector<Vote> SimulateStudyVotes(const ObserverModel& model,
                                     const std::vector<Condition>& conditions,
                                     const StudyShape& shape, uint64_t seed) {
  if (shape.n_observers < 1 || shape.votes_per_observer < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one observer and one vote each");
  }
  const auto contents = ContentIds(conditions);
  if (contents.empty()) throw Error(ErrorCode::kTooFewConditions, "no conditions");
  std::vector<SamplerState> states;
  for (const auto& content : contents) {
    states.emplace_back(content, ConditionsOfContent(conditions, content));
  }
  std::mt19937_64 rng(seed);
  std::vector<Vote> votes;
  votes.reserve(static_cast<size_t>(shape.n_observers) * shape.votes_per_observer);
  int64_t clock = 0;
  for (int o = 0; o < shape.n_observers; ++o) {
    const std::string observer = "obs_" + std::to_string(o + 1);
    for (int v = 0; v < shape.votes_per_observer; ++v) {
      SamplerState& state = states[static_cast<size_t>(o + v) % states.size()];
      const PairKey pair = SelectPair(state, shape.strategy, rng);
      const Choice choice = SimulateVote(model, pair.first, pair.second, rng);
      state.Record(pair.first, pair.second, choice);
      votes.push_back({observer, state.pcm().content_id(), pair.first, pair.second, choice,
                       ++clock});
    }
  }
  return votes;
}

}  // namespace xover
