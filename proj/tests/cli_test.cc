#include "xover/cli.h"

#include <gtest/gtest.h>

#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "test_util.h"
#include "xover/csv.h"
#include "xover/scaling.h"

namespace xover {
namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

int CountLines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

class CliPipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scenario_ = testing::MakeBenchScenario(2);
    std::ostringstream manifest;
    manifest << "condition_id,content_id,resolution,bitrate_kbps,media_url\n";
    for (const auto& c : scenario_.conditions) {
      manifest << c.condition_id << ',' << c.content_id << ',' << c.resolution << ','
               << c.bitrate_kbps << ',' << c.media_url << '\n';
    }
    testing::WriteText(F("manifest.csv"), manifest.str());
    std::vector<QualityScale> truth;
    for (const auto& [k, s] : scenario_.scales) truth.push_back(s);
    std::ostringstream jod;
    WriteJodTable(jod, truth);
    testing::WriteText(F("truth.csv"), jod.str());
    std::ostringstream metrics;
    metrics << "content_id,condition_id,metric,score\n";
    for (const auto& c : scenario_.conditions) {
      const double q = scenario_.scales.at(c.content_id).jod.at(c.condition_id);
      metrics << c.content_id << ',' << c.condition_id << ",lin," << 12 * q + 3 << '\n';
      metrics << c.content_id << ',' << c.condition_id << ",rate," << c.bitrate_kbps << '\n';
    }
    testing::WriteText(F("metrics.csv"), metrics.str());
  }

  std::string F(const std::string& name) const { return dir_.File(name); }

  testing::TempDir dir_;
  testing::BenchScenario scenario_;
};

TEST_F(CliPipelineTest, EndToEnd) {
  CliRun r = Cli({"simulate-study", "--manifest", F("manifest.csv"), "--true-jod", F("truth.csv"),
               "--observers", "20", "--votes-per-observer", "40", "--seed", "3", "--out",
               F("votes.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountLines(testing::ReadText(F("votes.csv"))), 1 + 800);

  r = Cli({"screen", "--votes", F("votes.csv"), "--manifest", F("manifest.csv"),
           "--inject-spammers", "3", "--out", F("consistency.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string table = testing::ReadText(F("consistency.csv"));
  EXPECT_EQ(table.substr(0, table.find('\n')), "observer_id,c_i,n_pairs,n_excluded,flag");
  EXPECT_EQ(CountLines(table), 1 + 23);
  EXPECT_NE(r.err.find("retained"), std::string::npos);

  r = Cli({"scale", "--votes", F("votes.csv"), "--manifest", F("manifest.csv"), "--drop-outliers",
           F("consistency.csv"), "--bootstrap", "5", "--out", F("jod.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto scales = LoadJodTable(F("jod.csv"));
  ASSERT_EQ(scales.size(), 2u);
  EXPECT_EQ(scales.at("b0").jod.size(), 24u);
  EXPECT_FALSE(scales.at("b0").std_error.empty());

  r = Cli({"crossover", "--jod", F("truth.csv"), "--metrics", F("metrics.csv"), "--manifest",
           F("manifest.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  // 2 contents x 3 sources x 2 adjacent pairs
  EXPECT_EQ(CountLines(r.out), 1 + 12);
  EXPECT_NE(r.out.find("b0,1080,720,subjective,"), std::string::npos);

  r = Cli({"crossover", "--jod", F("truth.csv"), "--manifest", F("manifest.csv"), "--pairs",
           "1080:540"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountLines(r.out), 1 + 2);

  r = Cli({"rcql", "--jod", F("truth.csv"), "--metrics", F("metrics.csv"), "--manifest",
           F("manifest.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "content_id,r1,r2,metric,c_kbps,c_hat_kbps,delta_bitrate,rcql_s,rcql_avg,flags");
  EXPECT_EQ(CountLines(r.out), 1 + 8);

  r = Cli({"bench-rcql", "--jod", F("truth.csv"), "--metrics", F("metrics.csv"), "--manifest",
           F("manifest.csv"), "--json", F("rcql.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountLines(r.out), 1 + 4);
  EXPECT_NE(testing::ReadText(F("rcql.json")).find("\"rows\""), std::string::npos);

  r = Cli({"bench-corr", "--jod", F("jod.csv"), "--metrics", F("metrics.csv"), "--manifest",
           F("manifest.csv"), "--logistic-fit", "--monotonicity", F("mono.csv"), "--json",
           F("corr.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountLines(r.out), 1 + 8);
  EXPECT_EQ(CountLines(testing::ReadText(F("mono.csv"))), 1 + 6);
}

TEST_F(CliPipelineTest, VotesTotalTruncates) {
  CliRun r = Cli({"simulate-study", "--manifest", F("manifest.csv"), "--true-jod", F("truth.csv"),
               "--observers", "7", "--votes-total", "100", "--strategy", "random"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(CountLines(r.out), 101);
  r = Cli({"simulate-study", "--manifest", F("manifest.csv"), "--true-jod", F("truth.csv"),
           "--votes-total", "100", "--votes-per-observer", "3"});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliPipelineTest, DataErrorsExitTwo) {
  CliRun r = Cli({"rcql", "--metrics", F("metrics.csv"), "--manifest", F("manifest.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--jod"), std::string::npos);
  r = Cli({"scale", "--votes", F("missing.csv"), "--manifest", F("manifest.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.csv"), std::string::npos);
  testing::WriteText(F("bad_votes.csv"),
                     "observer_id,content_id,cond_a,cond_b,choice,timestamp_ms\n"
                     "o,b0,b0_720_300,nowhere,A,0\n");
  r = Cli({"screen", "--votes", F("bad_votes.csv"), "--manifest", F("manifest.csv")});
  EXPECT_EQ(r.code, 2);
  r = Cli({"screen", "--votes", F("bad_votes.csv"), "--manifest", F("manifest.csv"), "--lenient"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning:"), std::string::npos);
  EXPECT_EQ(CountLines(r.out), 1);
  r = Cli({"simulate-study", "--manifest", F("manifest.csv"), "--true-jod", F("truth.csv"),
           "--strategy", "greedy"});
  EXPECT_EQ(r.code, 2);
}

TEST(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(Cli({}).code, 1);
  EXPECT_EQ(Cli({"frobnicate"}).code, 1);
  const CliRun r = Cli({"screen", "--votes", "v.csv"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--manifest"), std::string::npos);
  EXPECT_NE(r.err.find("content_id,condition_id,jod,stderr"), std::string::npos);
}

TEST(CliTest, HelpExitsZero) {
  const CliRun r = Cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulate-acr"), std::string::npos);
  EXPECT_NE(r.out.find("observer_id,content_id,cond_a,cond_b,choice,timestamp_ms"),
            std::string::npos);
}

TEST(CliTest, SimulateAcr) {
  testing::TempDir dir;
  std::ostringstream gt;
  WriteRdCurves(gt, testing::CrossingGroundTruth());
  testing::WriteText(dir.File("gt.csv"), gt.str());
  CliRun r = Cli({"simulate-acr", "--ground-truth", dir.File("gt.csv"), "--runs", "10", "--a", "0",
               "--plot-data", dir.File("plot.csv"), "--plot-grid", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const CsvTable t = [&] {
    std::istringstream in(r.out);
    return CsvTable::Parse(in, "out");
  }();
  ASSERT_EQ(t.rows().size(), 1u);
  EXPECT_EQ(t.rows()[0][t.RequireColumn("median_abs_delta")], "0");
  EXPECT_EQ(t.rows()[0][t.RequireColumn("n_runs")], "10");
  EXPECT_EQ(CountLines(testing::ReadText(dir.File("plot.csv"))), 1 + 2 * 2 * 5);
  r = Cli({"simulate-acr", "--ground-truth", dir.File("gt.csv"), "--a", "3"});
  EXPECT_EQ(r.code, 2);
}

TEST(CliTest, ServeUntilSignalled) {
  testing::TempDir dir;
  std::ostringstream manifest;
  manifest << "condition_id,content_id,resolution,bitrate_kbps,media_url\n"
           << "x0,x,720,500,a.mp4\nx1,x,720,900,b.mp4\n";
  testing::WriteText(dir.File("m.csv"), manifest.str());
  testing::WriteText(dir.File("study.json"),
                     R"({"study_id":"cli","manifest":"m.csv","quota":2,"media_base_url":"/media/"})");
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  ASSERT_GT(port, 0);
  CliRun result{};
  std::thread t([&] {
    result = Cli({"serve", "--config", dir.File("study.json"), "--host", "127.0.0.1", "--port",
                  std::to_string(port)});
  });
  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    res = client.Post("/studies/cli/sessions", R"({"observer_id":"p"})", "application/json");
    if (!res) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  std::raise(SIGTERM);
  t.join();
  EXPECT_EQ(result.code, 0) << result.err;
  EXPECT_NE(result.err.find("serving study 'cli'"), std::string::npos);
  EXPECT_TRUE(std::ifstream(dir.File("cli_votes.csv")).good());
}

}  // namespace
}  // namespace xover
