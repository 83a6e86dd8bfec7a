#include "xover/scaling.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

#include "xover/csv.h"
#include "xover/error.h"

namespace xover {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log Phi(u), accurate far into the lower tail.
double LogNormalCdf(double u) {
  if (u > -30.0) return std::log(0.5 * std::erfc(-u / kSqrt2));
  const double u2 = u * u;
  return -0.5 * u2 - std::log(-u) - kLogSqrt2Pi + std::log1p(-1.0 / u2 + 3.0 / (u2 * u2));
}

// phi(u) / Phi(u)
double InverseMills(double u) {
  if (u > -30.0) return NormalPdf(u) / NormalCdf(u);
  const double u2 = u * u;
  return -u / (1.0 - 1.0 / u2 + 3.0 / (u2 * u2));
}

struct Edge {
  size_t i;  // canonical first condition
  size_t j;
  double wins_i;  // a + t/2 + prior
  double wins_j;  // b + t/2 + prior
};

std::vector<Edge> Edges(const PairCountMatrix& pcm, double prior) {
  std::vector<Edge> edges;
  for (const auto& [key, counts] : pcm.pairs()) {
    if (counts.r() == 0) continue;
    edges.push_back({pcm.IndexOf(key.first), pcm.IndexOf(key.second),
                     counts.a + 0.5 * counts.t + prior, counts.b + 0.5 * counts.t + prior});
  }
  return edges;
}

double LogLikelihood(const std::vector<Edge>& edges, const Eigen::VectorXd& q) {
  double total = 0.0;
  for (const auto& e : edges) {
    const double u = kJodZ75 * (q[e.i] - q[e.j]);
    total += e.wins_i * LogNormalCdf(u) + e.wins_j * LogNormalCdf(-u);
  }
  return total;
}

void GradientAndHessian(const std::vector<Edge>& edges, const Eigen::VectorXd& q,
                        Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  grad.setZero();
  hess.setZero();
  for (const auto& e : edges) {
    const double u = kJodZ75 * (q[e.i] - q[e.j]);
    const double lp = InverseMills(u);
    const double lm = InverseMills(-u);
    const double d1 = kJodZ75 * (e.wins_i * lp - e.wins_j * lm);
    const double d2 =
        -kJodZ75 * kJodZ75 * (e.wins_i * lp * (u + lp) + e.wins_j * lm * (-u + lm));
    grad[e.i] += d1;
    grad[e.j] -= d1;
    hess(e.i, e.i) += d2;
    hess(e.j, e.j) += d2;
    hess(e.i, e.j) -= d2;
    hess(e.j, e.i) -= d2;
  }
}

}  // namespace

double NormalCdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double NormalPdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double PrefProbability(double delta_jod) { return NormalCdf(delta_jod * kJodZ75); }

std::string DefaultAnchor(const std::vector<Condition>& conditions) {
  if (conditions.empty()) throw Error(ErrorCode::kTooFewConditions, "no conditions");
  const auto it = std::min_element(
      conditions.begin(), conditions.end(), [](const Condition& x, const Condition& y) {
        return std::tie(x.resolution, x.bitrate_kbps, x.condition_id) <
               std::tie(y.resolution, y.bitrate_kbps, y.condition_id);
      });
  return it->condition_id;
}

std::vector<std::vector<std::string>> ComparisonComponents(const PairCountMatrix& pcm) {
  const size_t n = pcm.size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [key, counts] : pcm.pairs()) {
    if (counts.r() == 0) continue;
    const size_t a = find(pcm.IndexOf(key.first));
    const size_t b = find(pcm.IndexOf(key.second));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<std::string>> components;
  std::vector<int> slot(n, -1);
  for (size_t i = 0; i < n; ++i) {
    const size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(components.size());
      components.emplace_back();
    }
    components[static_cast<size_t>(slot[root])].push_back(pcm.conditions()[i].condition_id);
  }
  return components;
}

QualityScale ScaleJod(const PairCountMatrix& pcm, const ScalingOptions& options) {
  const size_t n = pcm.size();
  if (n == 0) throw Error(ErrorCode::kTooFewConditions, "content '" + pcm.content_id() + "'");

  const auto components = ComparisonComponents(pcm);
  if (components.size() > 1) {
    std::string listing;
    for (const auto& comp : components) {
      listing += " {";
      for (size_t i = 0; i < comp.size(); ++i) listing += (i ? "," : "") + comp[i];
      listing += "}";
    }
    throw Error(ErrorCode::kDisconnectedGraph,
                "content '" + pcm.content_id() + "' has " + std::to_string(components.size()) +
                    " components:" + listing);
  }

  QualityScale scale;
  scale.content_id = pcm.content_id();
  scale.anchor = options.anchor ? *options.anchor : DefaultAnchor(pcm.conditions());
  const size_t anchor = pcm.IndexOf(scale.anchor);

  const std::vector<Edge> edges = Edges(pcm, options.prior_count);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);

  // Free parameters: every condition but the anchor.
  std::vector<Eigen::Index> free;
  for (size_t i = 0; i < n; ++i) {
    if (i != anchor) free.push_back(static_cast<Eigen::Index>(i));
  }
  const auto m = static_cast<Eigen::Index>(free.size());

  double loglik = LogLikelihood(edges, q);
  bool converged = m == 0;
  int iter = 0;
  for (; !converged && iter < options.max_iterations; ++iter) {
    GradientAndHessian(edges, q, grad, hess);
    Eigen::VectorXd g(m);
    Eigen::MatrixXd neg_h(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      g[r] = grad[free[r]];
      for (Eigen::Index c = 0; c < m; ++c) neg_h(r, c) = -hess(free[r], free[c]);
    }
    scale.gradient_norm = g.lpNorm<Eigen::Infinity>();
    if (scale.gradient_norm <= options.gradient_tolerance) {
      converged = true;
      break;
    }
    const Eigen::VectorXd step = neg_h.ldlt().solve(g);
    // Step halving until the log-likelihood does not decrease.
    double alpha = 1.0;
    Eigen::VectorXd trial = q;
    double trial_loglik = loglik;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      trial = q;
      for (Eigen::Index r = 0; r < m; ++r) trial[free[r]] += alpha * step[r];
      trial_loglik = LogLikelihood(edges, trial);
      if (trial_loglik >= loglik - 1e-12 * std::abs(loglik)) break;
    }
    q = trial;
    loglik = trial_loglik;
  }
  if (!converged) {
    GradientAndHessian(edges, q, grad, hess);
    double norm = 0.0;
    for (Eigen::Index idx : free) norm = std::max(norm, std::abs(grad[idx]));
    scale.gradient_norm = norm;
    if (norm > options.gradient_tolerance) {
      throw Error(ErrorCode::kNonConvergence,
                  "content '" + pcm.content_id() + "': gradient norm " + FormatDouble(norm) +
                      " after " + std::to_string(options.max_iterations) + " iterations");
    }
  }
  scale.iterations = iter;
  for (size_t i = 0; i < n; ++i) {
    scale.jod[pcm.conditions()[i].condition_id] = i == anchor ? 0.0 : q[static_cast<Eigen::Index>(i)];
  }
  return scale;
}

QualityScale BootstrapStderr(const PairCountMatrix& pcm, int n_boot, uint64_t seed,
                             const ScalingOptions& options) {
  if (n_boot < 2) throw Error(ErrorCode::kInvalidArgument, "n_boot must be >= 2");
  QualityScale point = ScaleJod(pcm, options);
  ScalingOptions pinned = options;
  pinned.anchor = point.anchor;

  const size_t n = pcm.size();
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  constexpr int kMaxRetries = 10;
  for (int b = 0; b < n_boot; ++b) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(b)};
    std::mt19937_64 rng(seq);
    QualityScale replicate;
    bool ok = false;
    for (int attempt = 0; attempt <= kMaxRetries && !ok; ++attempt) {
      PairCountMatrix resampled(pcm.content_id(), pcm.conditions());
      for (const auto& [key, counts] : pcm.pairs()) {
        if (counts.r() == 0) continue;
        std::discrete_distribution<int> draw({static_cast<double>(counts.a),
                                              static_cast<double>(counts.b),
                                              static_cast<double>(counts.t)});
        for (int k = 0; k < counts.r(); ++k) {
          resampled.Record(key.first, key.second, static_cast<Choice>(draw(rng)));
        }
      }
      try {
        replicate = ScaleJod(resampled, pinned);
        ok = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDisconnectedGraph) throw;
      }
    }
    if (!ok) {
      throw Error(ErrorCode::kDisconnectedGraph,
                  "bootstrap resample " + std::to_string(b) + " stayed disconnected");
    }
    for (size_t i = 0; i < n; ++i) {
      const double v = replicate.jod.at(pcm.conditions()[i].condition_id);
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / n_boot;
    const double var = std::max(0.0, (sum_sq[i] - n_boot * mean * mean) / (n_boot - 1));
    const std::string& id = pcm.conditions()[i].condition_id;
    point.std_error[id] = id == point.anchor ? 0.0 : std::sqrt(var);
  }
  return point;
}

void WriteJodTable(std::ostream& out, const std::vector<QualityScale>& scales) {
  out << "content_id,condition_id,jod,stderr\n";
  for (const auto& s : scales) {
    for (const auto& [id, value] : s.jod) {
      auto it = s.std_error.find(id);
      out << CsvEscape(s.content_id) << ',' << CsvEscape(id) << ',' << FormatDouble(value)
          << ',' << (it == s.std_error.end() ? std::string() : FormatDouble(it->second)) << '\n';
    }
  }
}

std::map<std::string, QualityScale> ParseJodTable(std::istream& in, const std::string& source) {
  const CsvTable table = CsvTable::Parse(in, source);
  const size_t content_col = table.RequireColumn("content_id");
  const size_t id_col = table.RequireColumn("condition_id");
  const size_t jod_col = table.RequireColumn("jod");
  const int se_col = table.Column("stderr");
  std::map<std::string, QualityScale> out;
  for (size_t i = 0; i < table.rows().size(); ++i) {
    const auto& row = table.rows()[i];
    const std::string where = source + ": row " + std::to_string(i + 2);
    QualityScale& s = out[row[content_col]];
    s.content_id = row[content_col];
    const double value = ParseDouble(row[jod_col], where);
    if (!s.jod.emplace(row[id_col], value).second) {
      throw Error(ErrorCode::kDuplicateId, where + ": condition '" + row[id_col] + "' repeated");
    }
    if (value == 0.0 && s.anchor.empty()) s.anchor = row[id_col];
    if (se_col >= 0 && !row[static_cast<size_t>(se_col)].empty()) {
      s.std_error[row[id_col]] = ParseDouble(row[static_cast<size_t>(se_col)], where);
    }
  }
  return out;
}

std::map<std::string, QualityScale> LoadJodTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open JOD table " + path);
  return ParseJodTable(in, path);
}

}  // namespace xover
