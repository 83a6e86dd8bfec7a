#ifndef XOVER_PCM_H_
#define XOVER_PCM_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace xover {

// One encoded representation of a content.
struct Condition {
  std::string condition_id;
  std::string content_id;
  int resolution = 0;  // vertical pixel count
  double bitrate_kbps = 0.0;
  std::string media_url;  // optional, only used by the study service

  bool operator==(const Condition&) const = default;
};

enum class Choice { kA, kB, kTie };

const char* ChoiceName(Choice choice);
// Case-insensitive "A", "B" or "TIE"; throws kParseError otherwise.
Choice ParseChoice(const std::string& text);

struct Vote {
  std::string observer_id;
  std::string content_id;
  std::string cond_a;
  std::string cond_b;
  Choice choice = Choice::kTie;
  int64_t timestamp_ms = 0;

  bool operator==(const Vote&) const = default;
};

struct PairCounts {
  int a = 0;
  int b = 0;
  int t = 0;

  int r() const { return a + b + t; }
  // Counts as seen from the other orientation (a and b swapped).
  PairCounts Swapped() const { return {b, a, t}; }
  bool operator==(const PairCounts&) const = default;
};

// Unordered condition pair in canonical (lexicographic) order.
struct PairKey {
  std::string first;
  std::string second;

  static PairKey Of(const std::string& x, const std::string& y);
  auto operator<=>(const PairKey&) const = default;
};

// Per-content tallies of A/B/tie votes for each unordered condition pair.
// The a/b columns always refer to the canonical PairKey order.
class PairCountMatrix {
 public:
  PairCountMatrix() = default;
  PairCountMatrix(std::string content_id, std::vector<Condition> conditions);

  const std::string& content_id() const { return content_id_; }
  const std::vector<Condition>& conditions() const { return conditions_; }
  size_t size() const { return conditions_.size(); }
  bool HasCondition(const std::string& condition_id) const;
  size_t IndexOf(const std::string& condition_id) const;

  // Records one vote where `choice` refers to (cond_x, cond_y) as (A, B).
  void Record(const std::string& cond_x, const std::string& cond_y, Choice choice);

  // Canonical-order counts; zero for never-compared pairs.
  PairCounts Counts(const std::string& cond_x, const std::string& cond_y) const;
  // Counts oriented so that `a` counts votes for cond_x.
  PairCounts Oriented(const std::string& cond_x, const std::string& cond_y) const;

  const std::map<PairKey, PairCounts>& pairs() const { return counts_; }
  int64_t TotalVotes() const;

  bool operator==(const PairCountMatrix& other) const {
    return content_id_ == other.content_id_ && conditions_ == other.conditions_ &&
           counts_ == other.counts_;
  }

 private:
  std::string content_id_;
  std::vector<Condition> conditions_;
  std::unordered_map<std::string, size_t> index_;
  std::map<PairKey, PairCounts> counts_;
};

// Reads a manifest from CSV (header condition_id,content_id,resolution,
// bitrate_kbps[,media_url]) or JSON lines with the same keys.
std::vector<Condition> LoadManifest(const std::string& path);
std::vector<Condition> ParseManifest(std::istream& in, const std::string& source_name);

std::vector<Vote> LoadVotes(const std::string& path);
std::vector<Vote> ParseVotes(std::istream& in, const std::string& source_name);
void WriteVotes(std::ostream& out, const std::vector<Vote>& votes);
void WriteVoteHeader(std::ostream& out);
std::string FormatVoteRow(const Vote& vote);

// Checks every vote against the manifest. Strict mode throws on the first
// unknown-condition or cross-content vote; lenient mode drops such votes
// and appends a message per drop to `warnings` (when non-null).
std::vector<Vote> ValidateVotes(const std::vector<Vote>& votes,
                                const std::vector<Condition>& conditions, bool lenient,
                                std::vector<std::string>* warnings = nullptr);

// Tallies the votes of `content_id`. Votes for other contents are ignored;
// a vote tagged with `content_id` that references an unknown condition or a
// condition of another content is an error.
PairCountMatrix BuildPcm(const std::vector<Vote>& votes,
                         const std::vector<Condition>& conditions,
                         const std::string& content_id);

// One matrix per content present in the manifest, keyed by content id.
std::map<std::string, PairCountMatrix> BuildAllPcms(const std::vector<Vote>& votes,
                                                    const std::vector<Condition>& conditions);

std::vector<Condition> ConditionsOfContent(const std::vector<Condition>& conditions,
                                           const std::string& content_id);
std::vector<std::string> ContentIds(const std::vector<Condition>& conditions);

}  // namespace xover

#endif  // XOVER_PCM_H_
