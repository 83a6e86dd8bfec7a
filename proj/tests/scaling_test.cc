#include "xover/scaling.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.h"
#include "test_util.h"
#include "xover/error.h"

namespace xover {
namespace {

using testing::TwoConditionMatrix;

TEST(NormalTest, KnownValues) {
  EXPECT_NEAR(NormalCdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(NormalCdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_NEAR(NormalPdf(0.0), 1.0 / std::sqrt(2.0 * M_PI), 1e-15);
  EXPECT_NEAR(PrefProbability(1.0), 0.75, 1e-12);
  EXPECT_NEAR(PrefProbability(-1.0), 0.25, 1e-12);
  EXPECT_NEAR(PrefProbability(0.0), 0.5, 1e-15);
}

TEST(ScaleJodTest, SeventyFivePercentIsOneJod) {
  const QualityScale s = ScaleJod(TwoConditionMatrix(75, 25, 0));
  EXPECT_EQ(s.anchor, "lo");
  EXPECT_EQ(s.jod.at("lo"), 0.0);
  EXPECT_NEAR(s.jod.at("hi"), 1.0, 0.05);
  // Pseudo-counts pull slightly toward zero.
  EXPECT_LT(s.jod.at("hi"), 1.0);
}

TEST(ScaleJodTest, EvenSplitIsZero) {
  EXPECT_NEAR(ScaleJod(TwoConditionMatrix(50, 50, 0)).jod.at("hi"), 0.0, 1e-6);
  EXPECT_NEAR(ScaleJod(TwoConditionMatrix(10, 10, 30)).jod.at("hi"), 0.0, 1e-6);
}

TEST(ScaleJodTest, TwoConditionClosedForm) {
  // With a single pair the optimum solves Phi(z d) = a' / (a' + b').
  for (auto [a, b, t] : {std::tuple{7, 2, 1}, {1, 9, 0}, {12, 3, 6}, {0, 4, 0}}) {
    const double wa = a + 0.5 * t + 0.5, wb = b + 0.5 * t + 0.5;
    const double p = wa / (wa + wb);
    const QualityScale s = ScaleJod(TwoConditionMatrix(a, b, t));
    EXPECT_NEAR(PrefProbability(s.jod.at("hi")), p, 1e-9) << a << " " << b << " " << t;
  }
}

TEST(ScaleJodTest, UnanimousPairStaysFinite) {
  const QualityScale s = ScaleJod(TwoConditionMatrix(40, 0, 0));
  EXPECT_TRUE(std::isfinite(s.jod.at("hi")));
  EXPECT_GT(s.jod.at("hi"), 2.0);
}

TEST(ScaleJodTest, ConvergesBelowTolerance) {
  const QualityScale s = ScaleJod(testing::RandomThreeConditionMatrix(3));
  EXPECT_LE(s.gradient_norm, 1e-8);
  EXPECT_GT(s.iterations, 0);
  EXPECT_LE(s.iterations, 500);
}

TEST(ScaleJodTest, TooFewIterationsIsNonConvergence) {
  ScalingOptions opt;
  opt.max_iterations = 1;
  opt.gradient_tolerance = 1e-300;
  try {
    ScaleJod(TwoConditionMatrix(30, 3, 0), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonConvergence);
  }
}

TEST(ScaleJodTest, DefaultAnchorIsLowestResolutionThenBitrate) {
  std::vector<Condition> conds = {{"z", "x", 1080, 100, ""},
                                  {"y", "x", 720, 900, ""},
                                  {"w", "x", 720, 300, ""}};
  EXPECT_EQ(DefaultAnchor(conds), "w");
  PairCountMatrix pcm("x", conds);
  pcm.Record("z", "y", Choice::kA);
  pcm.Record("y", "w", Choice::kA);
  const QualityScale s = ScaleJod(pcm);
  EXPECT_EQ(s.anchor, "w");
  EXPECT_EQ(s.jod.at("w"), 0.0);
}

TEST(ScaleJodTest, AnchorOverrideShiftsScale) {
  const PairCountMatrix pcm = testing::RandomThreeConditionMatrix(11);
  const QualityScale base = ScaleJod(pcm);
  ScalingOptions opt;
  opt.anchor = "c2";
  const QualityScale moved = ScaleJod(pcm, opt);
  EXPECT_EQ(moved.jod.at("c2"), 0.0);
  const double shift = base.jod.at("c2");
  for (const auto& [id, q] : base.jod) EXPECT_NEAR(moved.jod.at(id), q - shift, 1e-7) << id;
}

TEST(ScaleJodTest, DisconnectedGraphNamesComponents) {
  const auto conds = testing::Chain("x", 4);
  PairCountMatrix pcm("x", conds);
  pcm.Record("c0", "c1", Choice::kA);
  pcm.Record("c2", "c3", Choice::kB);
  const auto comps = ComparisonComponents(pcm);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0], (std::vector<std::string>{"c0", "c1"}));
  EXPECT_EQ(comps[1], (std::vector<std::string>{"c2", "c3"}));
  try {
    ScaleJod(pcm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDisconnectedGraph);
    EXPECT_NE(std::string(e.what()).find("c2"), std::string::npos);
  }
}

TEST(ScaleJodTest, MatchesGridSearchOracle) {
  int checked = 0;
  for (uint64_t seed = 100; seed < 110; ++seed) {
    const PairCountMatrix pcm = testing::RandomThreeConditionMatrix(seed);
    const oracle::GridFit fit = oracle::GridSearchJod(pcm);
    if (fit.on_boundary) continue;
    ++checked;
    const QualityScale s = ScaleJod(pcm);
    for (const auto& [id, q] : fit.jod) EXPECT_NEAR(s.jod.at(id), q, 0.02) << seed << " " << id;
  }
  EXPECT_GE(checked, 8);
}

TEST(ScaleJodTest, RecordingOrientationDoesNotMatter) {
  std::mt19937_64 rng(5);
  const auto conds = testing::Chain("x", 5);
  PairCountMatrix fwd("x", conds), rev("x", conds);
  std::uniform_int_distribution<int> pick(0, 4), ch(0, 2);
  for (int v = 0; v < 300; ++v) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const Choice c = static_cast<Choice>(ch(rng));
    const Choice flipped = c == Choice::kA ? Choice::kB : c == Choice::kB ? Choice::kA : c;
    fwd.Record(conds[i].condition_id, conds[j].condition_id, c);
    rev.Record(conds[j].condition_id, conds[i].condition_id, flipped);
  }
  const QualityScale a = ScaleJod(fwd), b = ScaleJod(rev);
  for (const auto& [id, q] : a.jod) EXPECT_DOUBLE_EQ(b.jod.at(id), q);
}

TEST(ScaleJodTest, MoreWinsRaiseTheWinner) {
  double prev = -1e9;
  for (int a = 0; a <= 20; a += 2) {
    const double q = ScaleJod(TwoConditionMatrix(a, 10, 0)).jod.at("hi");
    EXPECT_GT(q, prev);
    prev = q;
  }
}

TEST(BootstrapTest, DeterministicWithAnchorAtZero) {
  const PairCountMatrix pcm = testing::RandomThreeConditionMatrix(21);
  const QualityScale a = BootstrapStderr(pcm, 50, 9);
  const QualityScale b = BootstrapStderr(pcm, 50, 9);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.std_error.at(a.anchor), 0.0);
  for (const auto& [id, se] : a.std_error) {
    if (id != a.anchor) EXPECT_GT(se, 0.0) << id;
  }
  EXPECT_EQ(a.jod, ScaleJod(pcm).jod);
  EXPECT_THROW(BootstrapStderr(pcm, 1, 9), Error);
}

TEST(BootstrapTest, ShrinksWithMoreVotes) {
  const double small = BootstrapStderr(TwoConditionMatrix(15, 5, 0), 200, 4).std_error.at("hi");
  const double large =
      BootstrapStderr(TwoConditionMatrix(150, 50, 0), 200, 4).std_error.at("hi");
  EXPECT_LT(large, small);
}

TEST(JodTableTest, RoundTrip) {
  QualityScale s = BootstrapStderr(testing::RandomThreeConditionMatrix(2), 20, 1);
  std::ostringstream out;
  WriteJodTable(out, {s});
  std::istringstream in(out.str());
  const auto back = ParseJodTable(in, "mem");
  ASSERT_EQ(back.count("r"), 1u);
  EXPECT_EQ(back.at("r").jod, s.jod);
  EXPECT_EQ(back.at("r").std_error, s.std_error);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "content_id,condition_id,jod,stderr");
}

}  // namespace
}  // namespace xover
