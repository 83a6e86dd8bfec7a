#ifndef XOVER_SCALING_H_
#define XOVER_SCALING_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xover/pcm.h"

namespace xover {

// Standard normal quantile at 0.75. A one-unit JOD difference maps to a 75%
// preference, i.e. the Case V observer noise is 1 / kJodZ75 ~= 1.4826.
inline constexpr double kJodZ75 = 0.67448975019608171;

double NormalCdf(double x);
double NormalPdf(double x);

// P(first preferred over second) for a JOD difference q_first - q_second.
double PrefProbability(double delta_jod);

// Per-content JOD values. The anchor condition is pinned at exactly 0.
struct QualityScale {
  std::string content_id;
  std::string anchor;
  std::map<std::string, double> jod;
  std::map<std::string, double> std_error;  // empty unless bootstrapped
  int iterations = 0;
  double gradient_norm = 0.0;  // infinity norm at return
};

struct ScalingOptions {
  // Pseudo-count added to both sides of every observed pair so unanimous
  // pairs keep a finite optimum.
  double prior_count = 0.5;
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
  // Overrides the default anchor (lowest resolution, then lowest bitrate).
  std::optional<std::string> anchor;
};

// Default anchor: lowest resolution, then lowest bitrate, then id.
std::string DefaultAnchor(const std::vector<Condition>& conditions);

// Connected components of the comparison graph (edges = pairs with r >= 1),
// each listed in condition order; components ordered by first member.
std::vector<std::vector<std::string>> ComparisonComponents(const PairCountMatrix& pcm);

// Maximum-likelihood JOD scale under Thurstone Case V. Ties are split half
// to each side. Throws kDisconnectedGraph or kNonConvergence.
QualityScale ScaleJod(const PairCountMatrix& pcm, const ScalingOptions& options = {});

// Point estimate plus per-condition standard deviation of the JOD across
// `n_boot` resampled matrices (each pair's r_n votes redrawn with
// replacement). Deterministic for a given seed.
QualityScale BootstrapStderr(const PairCountMatrix& pcm, int n_boot, uint64_t seed,
                             const ScalingOptions& options = {});

// content_id,condition_id,jod,stderr
void WriteJodTable(std::ostream& out, const std::vector<QualityScale>& scales);
// Keyed by content id. Missing stderr cells leave std_error empty.
std::map<std::string, QualityScale> LoadJodTable(const std::string& path);
std::map<std::string, QualityScale> ParseJodTable(std::istream& in, const std::string& source);

}  // namespace xover

#endif  // XOVER_SCALING_H_
