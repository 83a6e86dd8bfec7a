#include "xover/cli.h"

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "xover/acr_sim.h"
#include "xover/benchmark.h"
#include "xover/csv.h"
#include "xover/crossover.h"
#include "xover/error.h"
#include "xover/pcm.h"
#include "xover/sampler.h"
#include "xover/scaling.h"
#include "xover/screening.h"
#include "xover/server.h"
#include "xover/study.h"

namespace xover {

namespace {

constexpr const char* kSchemaHelp = R"(File formats (CSV with header unless noted):
  manifest   condition_id,content_id,resolution,bitrate_kbps[,media_url]  (or JSON lines)
  votes      observer_id,content_id,cond_a,cond_b,choice,timestamp_ms     choice in {A,B,TIE}
  jod        content_id,condition_id,jod,stderr
  curves     content_id,resolution,source,bitrate_kbps,quality
  metrics    content_id,condition_id,metric,score
  study      JSON {study_id, manifest, quota, media_base_url, strategy, vote_log, seed}
)";

// Writes to a file, or to `fallback` for "-" / empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::kIoError, "cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::vector<std::pair<int, int>> ParsePairs(const std::string& text) {
  std::vector<std::pair<int, int>> pairs;
  if (text.empty()) return pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "pair '" + item + "' is not HIGH:LOW");
    }
    const int hi = static_cast<int>(ParseInt(item.substr(0, colon), "--pairs"));
    const int lo = static_cast<int>(ParseInt(item.substr(colon + 1), "--pairs"));
    if (hi <= lo) throw Error(ErrorCode::kInvalidArgument, "pair '" + item + "' must be HIGH:LOW");
    pairs.emplace_back(hi, lo);
  }
  return pairs;
}

std::vector<Vote> LoadCheckedVotes(const std::string& votes_path,
                                   const std::vector<Condition>& conditions, bool lenient,
                                   std::ostream& err) {
  std::vector<std::string> warnings;
  auto votes = ValidateVotes(LoadVotes(votes_path), conditions, lenient, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return votes;
}

std::vector<Vote> DropObservers(std::vector<Vote> votes, const std::string& table_path) {
  if (table_path.empty()) return votes;
  const CsvTable table = CsvTable::ReadFile(table_path);
  const size_t id_col = table.RequireColumn("observer_id");
  const size_t flag_col = table.RequireColumn("flag");
  std::set<std::string> drop;
  for (const auto& row : table.rows()) {
    if (row[flag_col] == "outlier") drop.insert(row[id_col]);
  }
  std::erase_if(votes, [&](const Vote& v) { return drop.count(v.observer_id) > 0; });
  return votes;
}

std::map<std::string, QualityScale> LoadScalesChecked(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::kIoError, "missing subjective JOD file (--jod)");
  return LoadJodTable(path);
}

volatile std::sig_atomic_t g_stop_requested = 0;
StudyServer* g_server = nullptr;

void HandleSignal(int) {
  g_stop_requested = 1;
  if (g_server != nullptr) g_server->Stop();
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resolution cross-over analysis toolkit", "xover"};
  app.require_subcommand(1);
  app.footer(kSchemaHelp);

  std::string manifest_path, votes_path, out_path, jod_path, metrics_path, curves_path;
  std::string json_path, pairs_arg;
  bool lenient = false;
  bool enforce_monotone = false;
  uint64_t seed = 1;

  // screen
  auto* screen = app.add_subcommand("screen", "Observer consistency and outlier screening");
  double threshold = kDefaultScreeningThreshold;
  bool leave_one_out = false;
  int spammers = 0;
  screen->add_option("--votes", votes_path, "Vote CSV")->required();
  screen->add_option("--manifest", manifest_path, "Manifest")->required();
  screen->add_option("--threshold", threshold, "Outlier threshold on C_i");
  screen->add_flag("--leave-one-out", leave_one_out, "Exclude own vote from agreement");
  screen->add_flag("--lenient", lenient, "Drop votes on unknown conditions instead of failing");
  screen->add_option("--inject-spammers", spammers, "Append k random synthetic observers");
  screen->add_option("--seed", seed, "Seed for --inject-spammers");
  screen->add_option("--out", out_path, "Consistency table CSV (default stdout)");

  // scale
  auto* scale = app.add_subcommand("scale", "JOD scaling per content");
  int n_boot = 0;
  std::string drop_path;
  scale->add_option("--votes", votes_path, "Vote CSV")->required();
  scale->add_option("--manifest", manifest_path, "Manifest")->required();
  scale->add_option("--bootstrap", n_boot, "Bootstrap resamples for stderr (0 = none)");
  scale->add_option("--seed", seed, "Bootstrap seed");
  scale->add_option("--drop-outliers", drop_path, "Consistency table; drops observers flagged outlier");
  scale->add_flag("--lenient", lenient, "Drop votes on unknown conditions instead of failing");
  scale->add_option("--out", out_path, "JOD table CSV (default stdout)");

  // crossover
  auto* crossover = app.add_subcommand("crossover", "Cross-over bitrates per resolution pair");
  bool mid_range = false;
  int grid = 2048;
  crossover->add_option("--curves", curves_path, "Curve CSV");
  crossover->add_option("--jod", jod_path, "JOD table (with --manifest)");
  crossover->add_option("--manifest", manifest_path, "Manifest");
  crossover->add_option("--metrics", metrics_path, "Metric scores (with --manifest)");
  crossover->add_option("--pairs", pairs_arg, "Resolution pairs, e.g. 2160:1080,1080:720");
  crossover->add_flag("--enforce-monotone", enforce_monotone, "Isotonic pre-pass before fitting");
  crossover->add_flag("--mid-range", mid_range, "Report mean of min and max root");
  crossover->add_option("--grid", grid, "Sign-scan grid points");
  crossover->add_option("--out", out_path, "Cross-over CSV (default stdout)");

  // rcql
  auto* rcql = app.add_subcommand("rcql", "Per-content delta bitrate and RCQL");
  for (auto* sub : {rcql}) {
    sub->add_option("--jod", jod_path, "Subjective JOD table");
    sub->add_option("--manifest", manifest_path, "Manifest")->required();
    sub->add_option("--metrics", metrics_path, "Metric scores")->required();
    sub->add_option("--pairs", pairs_arg, "Resolution pairs, e.g. 2160:1080,1080:720");
    sub->add_flag("--enforce-monotone", enforce_monotone, "Isotonic pre-pass before fitting");
    sub->add_option("--out", out_path, "RCQL CSV (default stdout)");
  }

  // bench-corr
  auto* bench_corr = app.add_subcommand("bench-corr", "SROCC/PLCC of metrics against JOD");
  bool logistic = false;
  std::string monotonicity_path;
  bench_corr->add_option("--jod", jod_path, "Subjective JOD table");
  bench_corr->add_option("--manifest", manifest_path, "Manifest")->required();
  bench_corr->add_option("--metrics", metrics_path, "Metric scores")->required();
  bench_corr->add_flag("--logistic-fit", logistic, "Logistic mapping before PLCC");
  bench_corr->add_option("--monotonicity", monotonicity_path,
                         "Also write bitrate-vs-JOD SROCC per (content, resolution)");
  bench_corr->add_option("--json", json_path, "JSON mirror of the table");
  bench_corr->add_option("--out", out_path, "Correlation CSV (default stdout)");

  // bench-rcql
  auto* bench_rcql = app.add_subcommand("bench-rcql", "Mean delta bitrate / RCQL per metric and pair");
  bench_rcql->add_option("--jod", jod_path, "Subjective JOD table");
  bench_rcql->add_option("--manifest", manifest_path, "Manifest")->required();
  bench_rcql->add_option("--metrics", metrics_path, "Metric scores")->required();
  bench_rcql->add_option("--pairs", pairs_arg, "Resolution pairs, e.g. 2160:1080,1080:720");
  bench_rcql->add_flag("--enforce-monotone", enforce_monotone, "Isotonic pre-pass before fitting");
  bench_rcql->add_option("--json", json_path, "JSON mirror including per-content rows");
  bench_rcql->add_option("--out", out_path, "Aggregate CSV (default stdout)");

  // simulate-acr
  auto* sim_acr = app.add_subcommand("simulate-acr", "Cross-over error under ACR rating noise");
  SosModel sos;
  AcrSimConfig acr;
  bool no_clamp = false;
  std::string plot_path;
  int plot_grid = 200;
  sim_acr->add_option("--ground-truth", curves_path, "Subjective ground-truth curve CSV")->required();
  sim_acr->add_option("--a", sos.a, "SOS parameter a");
  sim_acr->add_option("--scale-low", sos.scale_low, "Rating scale low end");
  sim_acr->add_option("--scale-high", sos.scale_high, "Rating scale high end");
  sim_acr->add_option("--observers", acr.n_observers, "Ratings per condition");
  sim_acr->add_option("--runs", acr.n_runs, "Simulated studies");
  sim_acr->add_option("--seed", acr.seed, "Seed");
  sim_acr->add_flag("--discretize", acr.discretize, "Round ratings to integers");
  sim_acr->add_flag("--no-clamp", no_clamp, "Do not clamp ratings to the scale");
  sim_acr->add_option("--grid", grid, "Sign-scan grid points");
  sim_acr->add_option("--plot-data", plot_path, "Grid-sampled curves for plotting");
  sim_acr->add_option("--plot-grid", plot_grid, "Samples per curve in --plot-data");
  sim_acr->add_option("--out", out_path, "Summary CSV (default stdout)");

  // simulate-study
  auto* sim_study = app.add_subcommand("simulate-study", "Simulated pairwise-comparison study");
  std::string truth_path, strategy_name = "active";
  int votes_total = 0, votes_per_observer = 55, observers = 30;
  double tie_band = 0.0;
  sim_study->add_option("--manifest", manifest_path, "Manifest")->required();
  sim_study->add_option("--true-jod", truth_path, "Ground-truth JOD table")->required();
  auto* total_opt = sim_study->add_option("--votes-total", votes_total, "Total votes across observers");
  sim_study->add_option("--votes-per-observer", votes_per_observer, "Votes per observer")
      ->excludes(total_opt);
  sim_study->add_option("--observers", observers, "Simulated observers");
  sim_study->add_option("--strategy", strategy_name, "active or random");
  sim_study->add_option("--tie-band", tie_band, "JOD band answered as TIE");
  sim_study->add_option("--seed", seed, "Seed");
  sim_study->add_option("--out", out_path, "Vote CSV (default stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run a live study service");
  std::string config_path, host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--config", config_path, "Study config JSON")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (screen->parsed()) {
      const auto conditions = LoadManifest(manifest_path);
      auto votes = LoadCheckedVotes(votes_path, conditions, lenient, err);
      votes = InjectSpammers(votes, spammers, seed);
      const auto pcms = BuildAllPcms(votes, conditions);
      const ScreeningResult result =
          ScreenObservers(votes, pcms, threshold, ConsistencyOptions{leave_one_out});
      Output o(out_path, out);
      WriteConsistencyTable(*o, result);
      err << "retained " << result.retained.size() << ", outliers " << result.outliers.size()
          << ", insufficient overlap " << result.insufficient.size() << '\n';
      for (const auto& id : result.outliers) err << "outlier: " << id << '\n';
    } else if (scale->parsed()) {
      const auto conditions = LoadManifest(manifest_path);
      const auto votes =
          DropObservers(LoadCheckedVotes(votes_path, conditions, lenient, err), drop_path);
      std::vector<QualityScale> scales;
      for (const auto& [content, pcm] : BuildAllPcms(votes, conditions)) {
        scales.push_back(n_boot > 0 ? BootstrapStderr(pcm, n_boot, seed) : ScaleJod(pcm));
      }
      Output o(out_path, out);
      WriteJodTable(*o, scales);
    } else if (crossover->parsed()) {
      CurveSet curves;
      if (!curves_path.empty()) {
        curves = LoadRdCurves(curves_path);
      } else {
        if (manifest_path.empty()) {
          throw Error(ErrorCode::kIoError, "crossover needs --curves or --jod/--metrics with --manifest");
        }
        const auto conditions = LoadManifest(manifest_path);
        auto add = [&](const std::string& content, const std::map<std::string, double>& values,
                       const std::string& source) {
          for (auto& c : CurvesFromValues(conditions, content, values, source)) {
            curves[{c.content_id, c.resolution, c.source}] = std::move(c);
          }
        };
        if (!jod_path.empty()) {
          for (const auto& [content, s] : LoadJodTable(jod_path)) add(content, s.jod, "subjective");
        }
        if (!metrics_path.empty()) {
          for (const auto& [name, m] : LoadMetricScores(metrics_path, conditions)) {
            for (const auto& content : ContentIds(conditions)) {
              add(content, m.ForContent(content), "metric:" + name);
            }
          }
        }
        if (jod_path.empty() && metrics_path.empty()) {
          throw Error(ErrorCode::kIoError, "crossover needs --jod or --metrics with --manifest");
        }
      }
      std::map<std::pair<std::string, std::string>, std::vector<int>> groups;
      for (const auto& [key, c] : curves) groups[{std::get<0>(key), std::get<2>(key)}].push_back(c.resolution);
      const auto fixed_pairs = ParsePairs(pairs_arg);
      Output o(out_path, out);
      WriteCrossoverHeader(*o);
      for (const auto& [group, resolutions] : groups) {
        const auto& [content, source] = group;
        for (const auto& [r1, r2] :
             fixed_pairs.empty() ? AdjacentResolutionPairs(resolutions) : fixed_pairs) {
          auto c1 = curves.find({content, r1, source});
          auto c2 = curves.find({content, r2, source});
          if (c1 == curves.end() || c2 == curves.end()) continue;
          CrossoverResult r = FindCrossover(FitPchip(c1->second, {enforce_monotone}),
                                            FitPchip(c2->second, {enforce_monotone}),
                                            CrossoverOptions{grid});
          r.r1 = r1;
          r.r2 = r2;
          WriteCrossoverRow(*o, content, source, r, mid_range);
        }
      }
    } else if (rcql->parsed() || bench_rcql->parsed()) {
      const auto scales = LoadScalesChecked(jod_path);
      const auto conditions = LoadManifest(manifest_path);
      const auto metrics = LoadMetricScores(metrics_path, conditions);
      RcqlBenchmarkOptions options;
      options.fit.enforce_monotone = enforce_monotone;
      options.pairs = ParsePairs(pairs_arg);
      const RcqlBenchmarkResult result = RcqlBenchmark(scales, metrics, conditions, options);
      for (const auto& f : result.failures) err << "warning: " << f << '\n';
      Output o(out_path, out);
      if (rcql->parsed()) {
        WriteRcqlHeader(*o);
        for (const auto& row : result.rows) WriteRcqlRow(*o, row);
      } else {
        WriteRcqlAggregateCsv(*o, result.aggregates);
        if (!json_path.empty()) {
          Output j(json_path, out);
          *j << RcqlBenchmarkJson(result).dump(2) << '\n';
        }
      }
    } else if (bench_corr->parsed()) {
      const auto scales = LoadScalesChecked(jod_path);
      const auto conditions = LoadManifest(manifest_path);
      const auto metrics = LoadMetricScores(metrics_path, conditions);
      const auto cells = CorrelationReport(scales, metrics, conditions, {logistic});
      {
        Output o(out_path, out);
        WriteCorrelationCsv(*o, cells);
      }
      if (!json_path.empty()) {
        Output j(json_path, out);
        *j << CorrelationJson(cells).dump(2) << '\n';
      }
      if (!monotonicity_path.empty()) {
        std::map<std::string, double> jod;
        for (const auto& [content, s] : scales) jod.insert(s.jod.begin(), s.jod.end());
        Output m(monotonicity_path, out);
        WriteMonotonicityCsv(*m, BitrateMonotonicity(conditions, jod));
      }
    } else if (sim_acr->parsed()) {
      acr.clamp = !no_clamp;
      const CurveSet truth = LoadRdCurves(curves_path);
      const auto rows = CrossoverErrorExperiment(truth, sos, acr, CrossoverOptions{grid});
      Output o(out_path, out);
      WriteErrorSummary(*o, rows);
      if (!plot_path.empty()) {
        Output p(plot_path, out);
        WritePlotData(*p, truth, sos, acr, plot_grid);
      }
    } else if (sim_study->parsed()) {
      const auto conditions = LoadManifest(manifest_path);
      ObserverModel model;
      model.tie_band = tie_band;
      for (const auto& [content, s] : LoadJodTable(truth_path)) {
        model.true_jod.insert(s.jod.begin(), s.jod.end());
      }
      for (const auto& c : conditions) {
        if (!model.true_jod.count(c.condition_id)) {
          throw Error(ErrorCode::kUnknownCondition,
                      "no true JOD for condition '" + c.condition_id + "'");
        }
      }
      StudyShape shape;
      shape.n_observers = observers;
      shape.strategy = ParseStrategy(strategy_name);
      shape.votes_per_observer =
          votes_total > 0 ? (votes_total + observers - 1) / std::max(1, observers) : votes_per_observer;
      auto votes = SimulateStudyVotes(model, conditions, shape, seed);
      if (votes_total > 0 && static_cast<int>(votes.size()) > votes_total) votes.resize(votes_total);
      Output o(out_path, out);
      WriteVotes(*o, votes);
    } else if (serve->parsed()) {
      const StudyConfig config = LoadStudyConfig(config_path);
      Study study(config, LoadManifest(config.manifest_path));
      StudyServer server(study);
      if (!server.Bind(host, port)) throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
      err << "serving study '" << config.study_id << "' on http://" << host << ':' << port
          << " (" << study.TotalVotes() << " votes replayed)\n";
      g_server = &server;
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      server.ListenAfterBind();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitOk;
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace xover
