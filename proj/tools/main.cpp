#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dmsim/engine.hpp"
#include "dmsim/ingest.hpp"
#include "dmsim/llm_policies.hpp"
#include "dmsim/logio.hpp"
#include "dmsim/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SimulateOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string policy = "mock";
  std::string transcript_path;  // replay input
  std::string out_dir = "run_out";
};

int run_simulate(const SimulateOptions& opt) {
  dmsim::SimConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = dmsim::load_config_file(opt.config_path);
  }
  if (opt.seed.has_value()) cfg.rng_seed = *opt.seed;

  fs::create_directories(opt.out_dir);
  const auto out = [&](const char* name) {
    return (fs::path(opt.out_dir) / name).string();
  };

  dmsim::PolicySet policies;
  std::unique_ptr<dmsim::TranscriptWriter> transcript;
  json provider{{"policy", opt.policy}};
  if (opt.policy == "mock") {
    policies = dmsim::make_mock_policies(cfg);
  } else if (opt.policy == "llm") {
    auto client = std::make_shared<dmsim::HttpCompletionClient>();
    provider["model"] = client->model();
    provider["endpoint"] = client->endpoint();
    transcript =
        std::make_unique<dmsim::TranscriptWriter>(out("transcript.jsonl"));
    policies = dmsim::make_llm_policies(cfg, client, transcript.get());
  } else if (opt.policy == "replay") {
    if (opt.transcript_path.empty()) {
      std::cerr << "error: --policy replay needs --transcript\n";
      return 1;
    }
    provider["transcript"] = opt.transcript_path;
    auto client =
        std::make_shared<dmsim::ReplayCompletionClient>(opt.transcript_path);
    policies = dmsim::make_llm_policies(cfg, client, nullptr);
  } else {
    std::cerr << "error: unknown policy '" << opt.policy << "'\n";
    return 1;
  }

  dmsim::FileEventSink events(out("events.jsonl"));
  dmsim::Engine engine(cfg, std::move(policies),
                       dmsim::make_embedder(cfg.embedder, cfg.embedding_dim,
                                            cfg.rng_seed),
                       &events);

  dmsim::TransactionCsvWriter tx_writer(out("transactions.csv"));
  std::size_t written = 0;
  engine.after_step = [&](const dmsim::MarketState& st) {
    for (; written < st.transactions.size(); ++written) {
      tx_writer.append(st.transactions[written]);
    }
  };

  const dmsim::RunStats stats = engine.run();

  json meta{{"config", cfg},
            {"seed", cfg.rng_seed},
            {"provider", provider},
            {"last_step", stats.last_step},
            {"halted_early", stats.halted_early},
            {"transactions", stats.total_transactions},
            {"buyers", engine.state().buyers.size()},
            {"sellers", engine.state().sellers.size()},
            {"datasets", engine.state().listings.size()}};
  std::ofstream(out("run_meta.json")) << meta.dump(2) << '\n';

  std::cout << "simulated " << stats.last_step << " steps: "
            << stats.total_transactions << " transactions, "
            << engine.state().buyers.size() << " buyers, "
            << engine.state().sellers.size() << " sellers, "
            << engine.state().listings.size() << " datasets"
            << (stats.halted_early ? " (market emptied early)" : "") << '\n'
            << "outputs in " << opt.out_dir << '\n';
  return 0;
}

struct AnalyzeOptions {
  std::string input;
  std::string out_dir;
};

int run_analyze(const AnalyzeOptions& opt) {
  fs::path input(opt.input);
  std::string events_path, csv_path;
  if (fs::is_directory(input)) {
    if (fs::exists(input / "events.jsonl")) {
      events_path = (input / "events.jsonl").string();
    } else if (fs::exists(input / "transactions.csv")) {
      csv_path = (input / "transactions.csv").string();
    } else {
      std::cerr << "error: " << opt.input
                << " holds neither events.jsonl nor transactions.csv\n";
      return 1;
    }
  } else if (input.extension() == ".jsonl") {
    events_path = input.string();
  } else if (input.extension() == ".csv") {
    csv_path = input.string();
  } else {
    std::cerr << "error: expected a run directory, .jsonl or .csv, got "
              << opt.input << '\n';
    return 1;
  }

  dmsim::AnalysisInput analysis;
  if (!events_path.empty()) {
    analysis = dmsim::analysis_from_events(
        dmsim::read_events_file(events_path), events_path);
  } else {
    analysis = dmsim::analysis_from_transactions(
        dmsim::read_transactions_csv(csv_path), csv_path);
  }

  const json report = dmsim::build_report(analysis);

  std::string out_dir = opt.out_dir;
  if (out_dir.empty()) {
    out_dir = fs::is_directory(input) ? (input / "metrics").string()
                                      : input.stem().string() + "_metrics";
  }
  fs::create_directories(out_dir);
  std::ofstream((fs::path(out_dir) / "metrics.json").string())
      << report.dump(2) << '\n';
  dmsim::write_metric_csvs(report, out_dir);

  const auto& fit = report.at("purchases_per_dataset").at("fit");
  std::cout << "transactions: "
            << report.at("totals").at("transactions").get<std::int64_t>()
            << "\npurchases/dataset fit: "
            << (fit.contains("alpha") ? fit.dump() : fit.at("error").dump())
            << "\npurchases/buyer mean: "
            << report.at("purchases_per_buyer").at("summary").at("mean")
            << "\naverage degree: " << report.at("degree").at("average")
            << "\nautocorr lag-1: " << report.at("autocorr_lag1").dump()
            << "\nreport in " << out_dir << '\n';
  return 0;
}

struct IngestOptions {
  std::string input;
  std::string format = "auto";
  std::string bin_width = "1d";
  std::string out = "transactions.csv";
};

int run_ingest(const IngestOptions& opt) {
  const std::int64_t width = dmsim::parse_bin_width(opt.bin_width);
  const dmsim::IngestResult result =
      dmsim::ingest_file(opt.input, opt.format, width);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  dmsim::write_transactions_csv(opt.out, result.txs);
  std::cout << "ingested " << result.txs.size() << " transactions ("
            << result.dropped_duplicates << " duplicates, "
            << result.dropped_malformed << " malformed rows dropped) -> "
            << opt.out << '\n';
  return 0;
}

struct CompareOptions {
  std::string a;
  std::string b;
  std::string out;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

int run_compare(const CompareOptions& opt) {
  const json a = load_json_file(opt.a);
  const json b = load_json_file(opt.b);
  const dmsim::ComparisonResult result = dmsim::compare_reports(a, b);

  std::cout << "metric                                   a            b"
               "            |delta|\n";
  for (const auto& row : result.table) {
    char line[160];
    const std::string metric = row.at("metric").get<std::string>();
    if (row.contains("error")) {
      std::snprintf(line, sizeof(line), "%-40s %s", metric.c_str(),
                    row.at("error").get<std::string>().c_str());
    } else {
      std::snprintf(line, sizeof(line), "%-40s %-12.6g %-12.6g %-12.6g",
                    metric.c_str(), row.at("a").get<double>(),
                    row.at("b").get<double>(),
                    row.at("abs_delta").get<double>());
    }
    std::cout << line << '\n';
  }
  if (!opt.out.empty()) {
    std::ofstream(opt.out) << json{{"a", opt.a},
                                   {"b", opt.b},
                                   {"rows", result.table}}
                                  .dump(2)
                           << '\n';
  }
  if (result.mismatch) {
    std::cerr << "error: reports are missing comparable metrics\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data marketplace simulator and analysis toolkit"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run a market simulation");
  simulate->add_option("--config", sim.config_path, "config JSON file");
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      simulate->add_option("--seed", seed_value, "override the RNG seed");
  simulate->add_option("--policy", sim.policy, "mock | llm | replay")
      ->check(CLI::IsMember({"mock", "llm", "replay"}));
  simulate->add_option("--transcript", sim.transcript_path,
                       "recorded transcript to replay");
  simulate->add_option("--out", sim.out_dir, "output directory");

  AnalyzeOptions ana;
  auto* analyze =
      app.add_subcommand("analyze", "compute metrics from a run or log");
  analyze->add_option("input", ana.input,
                      "run directory, events.jsonl or transactions.csv")
      ->required();
  analyze->add_option("--out", ana.out_dir, "output directory");

  IngestOptions ing;
  auto* ingest =
      app.add_subcommand("ingest", "normalize a marketplace export");
  ingest->add_option("input", ing.input, "raw CSV or JSONL export")
      ->required();
  ingest->add_option("--format", ing.format, "csv | jsonl | auto")
      ->check(CLI::IsMember({"csv", "jsonl", "auto"}));
  ingest->add_option("--bin-width", ing.bin_width,
                     "step width, e.g. 1d, 6h, 30m, 3600s");
  ingest->add_option("--out", ing.out, "normalized transaction CSV path");

  CompareOptions cmp;
  auto* compare =
      app.add_subcommand("compare", "line up two metrics reports");
  compare->add_option("a", cmp.a, "first metrics.json")->required();
  compare->add_option("b", cmp.b, "second metrics.json")->required();
  compare->add_option("--out", cmp.out, "comparison JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      if (seed_opt->count() > 0) sim.seed = seed_value;
      return run_simulate(sim);
    }
    if (analyze->parsed()) return run_analyze(ana);
    if (ingest->parsed()) return run_ingest(ing);
    if (compare->parsed()) return run_compare(cmp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
