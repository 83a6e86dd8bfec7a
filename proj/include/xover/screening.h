#ifndef XOVER_SCREENING_H_
#define XOVER_SCREENING_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xover/pcm.h"

namespace xover {

// |a - b| / r. 0 means a perfectly split pair, 1 a unanimous A or B.
double Ambiguity(const PairCounts& counts);

// Fraction of the pair's ratings that match `choice` (a/r, b/r or t/r),
// with a and b in the same orientation as `choice`.
double Agreement(Choice choice, const PairCounts& counts);

struct ConsistencyOptions {
  // Remove the observer's own vote from the agreement term. Off by default:
  // the agreement term uses the full tallies.
  bool leave_one_out = false;
};

struct ObserverConsistency {
  std::string observer_id;
  // Unset when every voted pair has a single rating (insufficient overlap).
  std::optional<double> c_i;
  int n_pairs_voted = 0;
  int n_pairs_excluded = 0;  // pairs with r_n == 1

  bool defined() const { return c_i.has_value(); }
};

using PcmSet = std::map<std::string, PairCountMatrix>;

// Weighted consistency of one observer with the crowd:
//   sum_n (r_n - 1) * ambiguity_n * agreement_n / sum_n (r_n - 1)
// over every vote the observer cast, across all contents. Throws
// kAllPairsSingleton when the denominator is zero; see
// ConsistencyOrUndefined() for the non-throwing form.
ObserverConsistency Consistency(const std::string& observer_id, const std::vector<Vote>& votes,
                                const PcmSet& pcms, const ConsistencyOptions& options = {});
ObserverConsistency ConsistencyOrUndefined(const std::string& observer_id,
                                           const std::vector<Vote>& votes, const PcmSet& pcms,
                                           const ConsistencyOptions& options = {});

enum class ScreenFlag { kOk, kOutlier, kInsufficient };
const char* ScreenFlagName(ScreenFlag flag);

struct ScreeningRow {
  ObserverConsistency consistency;
  ScreenFlag flag = ScreenFlag::kOk;
};

struct ScreeningResult {
  std::vector<std::string> retained;
  std::vector<std::string> outliers;
  std::vector<std::string> insufficient;  // reported, never removed
  std::vector<ScreeningRow> table;        // in first-seen observer order
};

constexpr double kDefaultScreeningThreshold = 0.3;

ScreeningResult ScreenObservers(const std::vector<Vote>& all_votes, const PcmSet& pcms,
                                double threshold = kDefaultScreeningThreshold,
                                const ConsistencyOptions& options = {});

// observer_id,c_i,n_pairs,n_excluded,flag
void WriteConsistencyTable(std::ostream& out, const ScreeningResult& result);

// Appends k synthetic observers. Each copies the (content, pair) sequence of
// a uniformly drawn genuine observer and answers every pair with a uniform
// draw from {A, B, TIE}. Deterministic for a given seed.
std::vector<Vote> InjectSpammers(const std::vector<Vote>& votes, int k, uint64_t seed);

std::vector<std::string> ObserverIds(const std::vector<Vote>& votes);

}  // namespace xover

#endif  // XOVER_SCREENING_H_
