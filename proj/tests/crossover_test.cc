#include "xover/crossover.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.h"
#include "test_util.h"
#include "xover/error.h"

namespace xover {
namespace {

PchipCurve Curve(std::vector<double> x, std::vector<double> y) { return PchipCurve(x, y); }

// f1: q = x and f2: q = 2x - 1 sampled on {0, 1, 2}.
PchipCurve LineA() { return Curve({0, 1, 2}, {0, 1, 2}); }
PchipCurve LineB() { return Curve({0, 1, 2}, {-1, 1, 3}); }

TEST(FindCrossoverTest, LinearIntersection) {
  const CrossoverResult r = FindCrossover(LineA(), LineB());
  ASSERT_TRUE(r.bitrate);
  EXPECT_NEAR(*r.bitrate, 1.0, 1e-6);
  EXPECT_EQ(r.all_roots.size(), 1u);
  EXPECT_EQ(r.domain_lo, 0.0);
  EXPECT_EQ(r.domain_hi, 2.0);
}

TEST(FindCrossoverTest, NoCrossoverReportsDominantSide) {
  const PchipCurve hi = Curve({100, 500, 900}, {2, 3, 4});
  const PchipCurve lo = Curve({100, 500, 900}, {1, 2, 2.5});
  const CrossoverResult above = FindCrossover(hi, lo);
  EXPECT_FALSE(above.bitrate);
  EXPECT_TRUE(above.all_roots.empty());
  EXPECT_EQ(above.dominant_sign, 1);
  EXPECT_EQ(FindCrossover(lo, hi).dominant_sign, -1);
  EXPECT_EQ(FindCrossover(lo, lo).dominant_sign, 0);
}

TEST(FindCrossoverTest, TangentTouchIsNotARoot) {
  const PchipCurve bowl = Curve({0, 0.5, 1, 1.5, 2}, {1, 0.25, 0, 0.25, 1});
  const PchipCurve zero = Curve({0, 2}, {0, 0});
  const CrossoverResult r = FindCrossover(bowl, zero);
  EXPECT_FALSE(r.bitrate);
  EXPECT_EQ(r.dominant_sign, 1);
}

TEST(FindCrossoverTest, EndpointZeroIsNotARoot) {
  const CrossoverResult r = FindCrossover(Curve({1, 2}, {1, 3}), Curve({1, 2}, {1, 2}));
  EXPECT_FALSE(r.bitrate);
  EXPECT_EQ(r.dominant_sign, 1);
}

TEST(FindCrossoverTest, UsesDomainIntersection) {
  const PchipCurve a = Curve({0, 10}, {0, 10});
  const PchipCurve b = Curve({4, 20}, {8, 8});
  const CrossoverResult r = FindCrossover(a, b);
  EXPECT_EQ(r.domain_lo, 4.0);
  EXPECT_EQ(r.domain_hi, 10.0);
  ASSERT_TRUE(r.bitrate);
  EXPECT_NEAR(*r.bitrate, 8.0, 1e-8);
}

TEST(FindCrossoverTest, DisjointDomainsThrow) {
  try {
    FindCrossover(Curve({0, 1}, {0, 1}), Curve({2, 3}, {0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoDomainOverlap);
  }
}

TEST(FindCrossoverTest, SingleCrossingsMatchAnalyticAndScan) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = testing::SingleCrossing(seed);
    const PchipCurve f1(p.x, p.y1), f2(p.x, p.y2);
    const CrossoverResult r = FindCrossover(f1, f2);
    ASSERT_TRUE(r.bitrate) << seed;
    EXPECT_LE(std::abs(*r.bitrate - p.roots[0]), 1e-3 * p.span()) << seed;
    const auto scan = oracle::ScanRoots([&](double x) { return f1(x) - f2(x); }, p.x.front(),
                                        p.x.back(), 100000);
    ASSERT_EQ(scan.size(), 1u) << seed;
    EXPECT_LE(std::abs(*r.bitrate - scan[0]), 1e-5 * p.span()) << seed;
  }
}

TEST(FindCrossoverTest, DoubleCrossingReturnsSmallerRoot) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = testing::DoubleCrossing(seed);
    const PchipCurve f1(p.x, p.y1), f2(p.x, p.y2);
    const CrossoverResult r = FindCrossover(f1, f2);
    ASSERT_EQ(r.all_roots.size(), 2u) << seed;
    EXPECT_EQ(*r.bitrate, r.all_roots[0]);
    EXPECT_LT(r.all_roots[0], r.all_roots[1]);
    for (int i = 0; i < 2; ++i) {
      EXPECT_LE(std::abs(r.all_roots[i] - p.roots[i]), 1e-3 * p.span()) << seed;
    }
    ASSERT_TRUE(r.MidRange());
    EXPECT_DOUBLE_EQ(*r.MidRange(), 0.5 * (r.all_roots[0] + r.all_roots[1]));
  }
}

TEST(FindCrossoverTest, ZeroRunBetweenSignsStartsTheCrossing) {
  // f1 - f2 is 0 on [1, 2], negative before, positive after.
  const PchipCurve f1 = Curve({0, 1, 2, 3}, {-1, 0, 0, 1});
  const PchipCurve f2 = Curve({0, 3}, {0, 0});
  CrossoverOptions opt;
  opt.grid_points = 4;
  const CrossoverResult r = FindCrossover(f1, f2, opt);
  ASSERT_TRUE(r.bitrate);
  EXPECT_EQ(*r.bitrate, 1.0);
}

TEST(DeltaBitrateTest, Values) {
  EXPECT_EQ(DeltaBitrate(1400, 900), 500);
  EXPECT_EQ(DeltaBitrate(900, 1400), 500);
  EXPECT_EQ(DeltaBitrate(5660, 5950), 290);
  EXPECT_EQ(DeltaBitrate(700, 700), 0);
}

TEST(RcqlTest, LinearClosedForm) {
  // int_1^2 x dx = 1.5, int_1^2 (2x - 1) dx = 2.
  EXPECT_NEAR(Rcql(LineA(), LineB(), 1, 2), 0.5, 1e-9);
  EXPECT_NEAR(Rcql(LineA(), LineB(), 2, 1), 0.5, 1e-9);
  EXPECT_EQ(Rcql(LineA(), LineB(), 1.3, 1.3), 0.0);
}

TEST(RcqlTest, OutsideDomainThrows) {
  try {
    Rcql(LineA(), LineB(), 1, 2.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRangeOutsideDomain);
  }
}

TEST(RcqlTest, SymmetricAndMatchesQuadrature) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    const auto p = testing::SingleCrossing(seed);
    const PchipCurve f1(p.x, p.y1), f2(p.x, p.y2);
    const double c = p.x.front() + u(rng) * p.span();
    const double ch = p.x.front() + u(rng) * p.span();
    const double v = Rcql(f1, f2, c, ch);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(Rcql(f1, f2, ch, c), v, 1e-9 * std::max(1.0, v));
    EXPECT_NEAR(Rcql(f2, f1, c, ch), v, 1e-9 * std::max(1.0, v));
    if (seed <= 10) {
      auto g1 = [&](double x) { return f1(x); };
      auto g2 = [&](double x) { return f2(x); };
      const double want = std::abs(std::abs(oracle::Simpson(g1, c, ch)) -
                                   std::abs(oracle::Simpson(g2, c, ch)));
      EXPECT_NEAR(v, want, 1e-6 * std::max(1.0, std::abs(ch - c)));
    }
  }
}

TEST(RcqlAvgTest, Definition) {
  EXPECT_EQ(RcqlAvg(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(RcqlAvg(12.5, 50), 0.25);
  EXPECT_THROW(RcqlAvg(1, -1), Error);
}

TEST(EvaluateRcqlTest, PerfectMetricHasNoLoss) {
  const auto p = testing::SingleCrossing(3);
  const PchipCurve f1(p.x, p.y1), f2(p.x, p.y2);
  std::vector<double> m1, m2;
  for (double y : p.y1) m1.push_back(3 * y + 10);
  for (double y : p.y2) m2.push_back(3 * y + 10);
  const RcqlReport r = EvaluateRcql(f1, f2, PchipCurve(p.x, m1), PchipCurve(p.x, m2));
  EXPECT_EQ(r.flag, RcqlFlag::kNone);
  EXPECT_NEAR(r.delta_bitrate, 0.0, 1e-6 * p.span());
  EXPECT_NEAR(r.rcql_s, 0.0, 1e-6);
}

TEST(EvaluateRcqlTest, ShiftedMetricInvariant) {
  const auto p = testing::SingleCrossing(4);
  const PchipCurve f1(p.x, p.y1), f2(p.x, p.y2);
  std::vector<double> m2;
  for (double y : p.y2) m2.push_back(y + 0.1);
  const RcqlReport r = EvaluateRcql(f1, f2, f1, PchipCurve(p.x, m2));
  ASSERT_TRUE(r.c && r.c_hat);
  EXPECT_GT(r.delta_bitrate, 0.0);
  EXPECT_NEAR(r.rcql_avg * r.delta_bitrate, r.rcql_s, 1e-12 * std::max(1.0, r.rcql_s));
  EXPECT_NEAR(r.delta_bitrate, std::abs(*r.c - *r.c_hat), 1e-12);
}

TEST(EvaluateRcqlTest, MissingMetricCrossoverIsClamped) {
  const PchipCurve s1 = LineB(), s2 = LineA();   // cross at 1
  const PchipCurve above = Curve({0, 2}, {5, 6});  // metric: r1 always ahead
  const PchipCurve below = Curve({0, 2}, {0, 1});
  const RcqlReport ahead = EvaluateRcql(s1, s2, above, below);
  EXPECT_EQ(ahead.flag, RcqlFlag::kClamped);
  EXPECT_EQ(ahead.c_hat_used, 0.0);
  EXPECT_NEAR(ahead.delta_bitrate, 1.0, 1e-6);
  const RcqlReport behind = EvaluateRcql(s1, s2, below, above);
  EXPECT_EQ(behind.c_hat_used, 2.0);
  EXPECT_STREQ(RcqlFlagName(behind.flag), "clamped");
}

TEST(EvaluateRcqlTest, BothMissing) {
  const PchipCurve a = Curve({0, 2}, {5, 6}), b = Curve({0, 2}, {0, 1});
  const RcqlReport r = EvaluateRcql(a, b, a, b);
  EXPECT_EQ(r.flag, RcqlFlag::kBothAbsent);
  EXPECT_EQ(r.rcql_s, 0.0);
  EXPECT_STREQ(RcqlFlagName(r.flag), "both-absent");
}

TEST(RdCurveTest, Validation) {
  RdCurve c{"x", 1080, "subjective", {{100, 1}}};
  EXPECT_THROW(c.Validate(), Error);
  c.points = {{100, 1}, {100, 2}};
  EXPECT_THROW(c.Validate(), Error);
  c.points = {{0, 1}, {100, 2}};
  EXPECT_THROW(c.Validate(), Error);
  c.points = {{100, 1}, {200, std::nan("")}};
  EXPECT_THROW(c.Validate(), Error);
  c.points = {{100, 1}, {200, 0.5}};
  EXPECT_NO_THROW(c.Validate());
}

TEST(FitPchipTest, EnforceMonotone) {
  RdCurve c{"x", 1080, "subjective", {{100, 1}, {200, 3}, {300, 2}, {400, 4}}};
  const PchipCurve raw = FitPchip(c);
  EXPECT_EQ(raw(300), 2.0);
  FitOptions opt;
  opt.enforce_monotone = true;
  const PchipCurve mono = FitPchip(c, opt);
  EXPECT_EQ(mono(200), 2.5);
  EXPECT_EQ(mono(300), 2.5);
}

TEST(CurveIoTest, RoundTripAndGrouping) {
  const std::string text =
      "content_id,resolution,source,bitrate_kbps,quality\n"
      "A,1080,subjective,500,1.5\nA,1080,subjective,1500,3\n"
      "A,720,subjective,500,2\nA,720,subjective,1500,2.5\n"
      "A,720,metric:vmaf,500,60\nA,720,metric:vmaf,1500,70\n";
  std::istringstream in(text);
  const CurveSet set = ParseRdCurves(in, "mem");
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set.at({"A", 720, "metric:vmaf"}).points[1].quality, 70);
  std::ostringstream out;
  WriteRdCurves(out, set);
  std::istringstream again(out.str());
  const CurveSet back = ParseRdCurves(again, "mem");
  ASSERT_EQ(back.size(), set.size());
  for (const auto& [k, c] : set) {
    ASSERT_EQ(back.at(k).points.size(), c.points.size());
    for (size_t i = 0; i < c.points.size(); ++i) {
      EXPECT_EQ(back.at(k).points[i].bitrate_kbps, c.points[i].bitrate_kbps);
      EXPECT_EQ(back.at(k).points[i].quality, c.points[i].quality);
    }
  }
}

TEST(CurveIoTest, BadRowsAreParseErrors) {
  std::istringstream in("content_id,resolution,source,bitrate_kbps,quality\nA,1080,subjective,abc,1\n");
  try {
    ParseRdCurves(in, "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
}

TEST(CurvesFromValuesTest, GroupsByResolution) {
  const auto conds = testing::Ladder("A", {540, 1080}, {300, 900, 2700});
  std::map<std::string, double> v;
  for (const auto& c : conds) v[c.condition_id] = c.resolution / 1000.0 + c.bitrate_kbps / 1e4;
  v.erase("A_540_900");
  const auto curves = CurvesFromValues(conds, "A", v, "subjective");
  ASSERT_EQ(curves.size(), 2u);
  for (const auto& c : curves) {
    EXPECT_EQ(c.points.size(), c.resolution == 540 ? 2u : 3u);
    EXPECT_TRUE(std::is_sorted(c.points.begin(), c.points.end(),
                               [](auto& a, auto& b) { return a.bitrate_kbps < b.bitrate_kbps; }));
  }
}

TEST(AdjacentPairsTest, HighestFirst) {
  const auto pairs = AdjacentResolutionPairs({540, 1080, 720, 720});
  EXPECT_EQ(pairs, (std::vector<std::pair<int, int>>{{1080, 720}, {720, 540}}));
  EXPECT_TRUE(AdjacentResolutionPairs({1080}).empty());
}

TEST(CrossoverCsvTest, MultipleRootsFlagged) {
  const auto p = testing::DoubleCrossing(1);
  CrossoverResult r = FindCrossover(PchipCurve(p.x, p.y1), PchipCurve(p.x, p.y2));
  r.r1 = 1080;
  r.r2 = 720;
  std::ostringstream out;
  WriteCrossoverHeader(out);
  WriteCrossoverRow(out, "A", "subjective", r, false);
  WriteCrossoverRow(out, "A", "subjective", r, true);
  const std::string s = out.str();
  EXPECT_NE(s.find(",multiple\n"), std::string::npos);
  EXPECT_NE(s.find(",multiple;mid-range\n"), std::string::npos);
}

}  // namespace
}  // namespace xover
