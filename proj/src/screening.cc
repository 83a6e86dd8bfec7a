#include "xover/screening.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

double Ambiguity(const PairCounts& counts) {
  if (counts.r() <= 0) throw Error(ErrorCode::kEmptyPair, "ambiguity of a pair with no ratings");
  return std::abs(counts.a - counts.b) / static_cast<double>(counts.r());
}

double Agreement(Choice choice, const PairCounts& counts) {
  if (counts.r() <= 0) throw Error(ErrorCode::kEmptyPair, "agreement on a pair with no ratings");
  const double r = counts.r();
  switch (choice) {
    case Choice::kA: return counts.a / r;
    case Choice::kB: return counts.b / r;
    case Choice::kTie: return counts.t / r;
  }
  return 0.0;
}

namespace {

int& CountFor(PairCounts& counts, Choice choice) {
  switch (choice) {
    case Choice::kA: return counts.a;
    case Choice::kB: return counts.b;
    case Choice::kTie: break;
  }
  return counts.t;
}

}  // namespace

ObserverConsistency ConsistencyOrUndefined(const std::string& observer_id,
                                           const std::vector<Vote>& votes, const PcmSet& pcms,
                                           const ConsistencyOptions& options) {
  ObserverConsistency result;
  result.observer_id = observer_id;
  double numerator = 0.0;
  double denominator = 0.0;
  for (const auto& v : votes) {
    if (v.observer_id != observer_id) continue;
    auto it = pcms.find(v.content_id);
    if (it == pcms.end()) {
      throw Error(ErrorCode::kUnknownCondition, "no matrix for content '" + v.content_id + "'");
    }
    // Orient the tallies so that `a` counts votes for this vote's cond_a.
    const PairCounts counts = it->second.Oriented(v.cond_a, v.cond_b);
    ++result.n_pairs_voted;
    const int r = counts.r();
    if (r <= 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "vote by '" + observer_id + "' is not contained in the matrix");
    }
    if (r == 1) {
      ++result.n_pairs_excluded;
      continue;
    }
    double agreement;
    if (options.leave_one_out) {
      PairCounts others = counts;
      int& own = CountFor(others, v.choice);
      if (own <= 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "vote by '" + observer_id + "' is not contained in the matrix");
      }
      --own;
      agreement = Agreement(v.choice, others);
    } else {
      agreement = Agreement(v.choice, counts);
    }
    const double weight = r - 1;
    numerator += weight * Ambiguity(counts) * agreement;
    denominator += weight;
  }
  if (denominator > 0.0) result.c_i = numerator / denominator;
  return result;
}

ObserverConsistency Consistency(const std::string& observer_id, const std::vector<Vote>& votes,
                                const PcmSet& pcms, const ConsistencyOptions& options) {
  ObserverConsistency result = ConsistencyOrUndefined(observer_id, votes, pcms, options);
  if (!result.defined()) {
    throw Error(ErrorCode::kAllPairsSingleton,
                "observer '" + observer_id + "' has no pair rated by anyone else");
  }
  return result;
}

const char* ScreenFlagName(ScreenFlag flag) {
  switch (flag) {
    case ScreenFlag::kOk: return "ok";
    case ScreenFlag::kOutlier: return "outlier";
    case ScreenFlag::kInsufficient: return "insufficient";
  }
  return "?";
}

std::vector<std::string> ObserverIds(const std::vector<Vote>& votes) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& v : votes) {
    if (seen.insert(v.observer_id).second) ids.push_back(v.observer_id);
  }
  return ids;
}

ScreeningResult ScreenObservers(const std::vector<Vote>& all_votes, const PcmSet& pcms,
                                double threshold, const ConsistencyOptions& options) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1)");
  }
  // Group once so each observer's pass is linear in its own votes.
  std::unordered_map<std::string, std::vector<Vote>> by_observer;
  for (const auto& v : all_votes) by_observer[v.observer_id].push_back(v);

  ScreeningResult result;
  for (const auto& id : ObserverIds(all_votes)) {
    ScreeningRow row;
    row.consistency = ConsistencyOrUndefined(id, by_observer[id], pcms, options);
    if (!row.consistency.defined()) {
      row.flag = ScreenFlag::kInsufficient;
      result.insufficient.push_back(id);
    } else if (*row.consistency.c_i < threshold) {
      row.flag = ScreenFlag::kOutlier;
      result.outliers.push_back(id);
    } else {
      result.retained.push_back(id);
    }
    result.table.push_back(std::move(row));
  }
  return result;
}

void WriteConsistencyTable(std::ostream& out, const ScreeningResult& result) {
  out << "observer_id,c_i,n_pairs,n_excluded,flag\n";
  for (const auto& row : result.table) {
    const auto& c = row.consistency;
    out << CsvEscape(c.observer_id) << ',' << (c.c_i ? FormatDouble(*c.c_i) : std::string())
        << ',' << c.n_pairs_voted << ',' << c.n_pairs_excluded << ','
        << ScreenFlagName(row.flag) << '\n';
  }
}

std::vector<Vote> InjectSpammers(const std::vector<Vote>& votes, int k, uint64_t seed) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "spammer count must be >= 0");
  std::vector<Vote> out = votes;
  if (k == 0) return out;
  const std::vector<std::string> genuine = ObserverIds(votes);
  if (genuine.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot mimic observers of an empty vote list");
  }
  std::unordered_map<std::string, std::vector<const Vote*>> by_observer;
  for (const auto& v : votes) by_observer[v.observer_id].push_back(&v);
  std::set<std::string> taken(genuine.begin(), genuine.end());

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick_observer(0, genuine.size() - 1);
  std::uniform_int_distribution<int> pick_choice(0, 2);
  int suffix = 0;
  for (int s = 0; s < k; ++s) {
    std::string id;
    do {
      id = "spammer_" + std::to_string(++suffix);
    } while (taken.count(id) > 0);
    taken.insert(id);
    const std::string& template_id = genuine[pick_observer(rng)];
    for (const Vote* v : by_observer[template_id]) {
      Vote fake = *v;
      fake.observer_id = id;
      fake.timestamp_ms = 0;
      fake.choice = static_cast<Choice>(pick_choice(rng));
      out.push_back(std::move(fake));
    }
  }
  return out;
}

}  // namespace xover
