#ifndef XOVER_TESTS_TEST_UTIL_H_
#define XOVER_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xover/benchmark.h"
#include "xover/crossover.h"
#include "xover/pcm.h"
#include "xover/scaling.h"

namespace xover::testing {

// Conditions "<content>_<res>_<rate>" for every resolution x bitrate.
std::vector<Condition> Ladder(const std::string& content, const std::vector<int>& resolutions,
                              const std::vector<double>& bitrates);

// Conditions c0..c{n-1} of one content at one resolution, bitrate 100*(i+1).
std::vector<Condition> Chain(const std::string& content, int n);

// A matrix over two conditions "lo" (anchor) and "hi" with the given counts,
// where `a` counts votes preferring "hi".
PairCountMatrix TwoConditionMatrix(int a, int b, int t);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Screening scenario: `genuine` Thurstone observers (55 randomly paired votes
// each over three 4-condition contents whose true JODs span 3 units) plus
// `spammers` uniform random observers named spammer_*.
struct SpammerScenario {
  std::vector<Condition> conditions;
  std::vector<Vote> votes;
};
SpammerScenario MakeSpammerScenario(uint64_t seed, int genuine = 30, int spammers = 10);

// Three-condition matrix (Chain ids c0..c2) with up to 30 votes per pair,
// drawn from random true JODs in [-1.5, 1.5] with ~10% ties. Always
// connected.
PairCountMatrix RandomThreeConditionMatrix(uint64_t seed);

// Two convex increasing curves sampled on 25 shared knots whose underlying
// functions cross exactly at `roots` (ascending). f1 is the steeper one
// after the first root.
struct SyntheticPair {
  std::vector<double> x, y1, y2;
  std::vector<double> roots;
  double span() const { return x.back() - x.front(); }
};
SyntheticPair SingleCrossing(uint64_t seed);
SyntheticPair DoubleCrossing(uint64_t seed);

// Subjective ground truth for content "gt" at 1080p and 720p on a 0..8
// rating scale, crossing exactly at the 1400 kbps knot.
CurveSet CrossingGroundTruth();

// Contents b0..b{n-1}, each a 540/720/1080 ladder over eight bitrates with
// JOD values (shifted per content) that cross once for every adjacent
// resolution pair.
struct BenchScenario {
  std::vector<Condition> conditions;
  std::map<std::string, QualityScale> scales;
};
BenchScenario MakeBenchScenario(int n_contents);

// Metric scores equal to slope[k] * jod + offset[k] for content k.
MetricScores AffineMetric(const BenchScenario& s, const std::string& name,
                          const std::vector<double>& slope, const std::vector<double>& offset);

void WriteText(const std::string& path, const std::string& text);
std::string ReadText(const std::string& path);

}  // namespace xover::testing

#endif  // XOVER_TESTS_TEST_UTIL_H_
