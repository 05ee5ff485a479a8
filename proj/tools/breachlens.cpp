// breachlens: breach-record analytics pipeline driver.
//
//   breachlens ingest|engineer|analyze|train|forecast|report
//              --config <path> [--seed N] [--out DIR]
//
// Exit codes: 0 success, 2 input/parse error, 3 configuration or
// precondition error. BREACHLENS_SEED in the environment overrides the
// config seed; an explicit --seed flag overrides both.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "breachlens/pipeline.hpp"

namespace {

using breachlens::pipeline::RunConfig;

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
};

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = RunConfig::load(opts.config_path);
  if (const char* env = std::getenv("BREACHLENS_SEED")) {
    auto v = breachlens::strutil::parse_int(env);
    if (!v || *v < 0) {
      throw breachlens::config_error("BREACHLENS_SEED must be a non-negative integer");
    }
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (opts.seed_set) cfg.seed = opts.seed_override;
  if (!opts.out_override.empty()) cfg.output_dir = opts.out_override;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--seed", opts.seed_override, "Override the config seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--out", opts.out_override, "Override the output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"breach-record analytics pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto* cmd_ingest = app.add_subcommand("ingest", "Parse, impute, and filter incidents");
  auto* cmd_engineer = app.add_subcommand("engineer", "Derive text and temporal features");
  auto* cmd_analyze = app.add_subcommand("analyze", "EDA aggregations and hypothesis tests");
  auto* cmd_train = app.add_subcommand("train", "Train and evaluate the classifier suite");
  auto* cmd_forecast = app.add_subcommand("forecast", "Fit and project the annual series");
  auto* cmd_report = app.add_subcommand("report", "Assemble the consolidated report");
  for (auto* cmd : {cmd_ingest, cmd_engineer, cmd_analyze, cmd_train, cmd_forecast, cmd_report}) {
    add_common(cmd, opts);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(opts);
    breachlens::pipeline::DirLock lock{std::filesystem::path(cfg.output_dir)};
    if (cmd_ingest->parsed()) {
      auto out = breachlens::pipeline::run_ingest(cfg);
      std::cout << "ingest: " << out.report.input_count << " rows in, "
                << out.report.retained_count << " retained\n";
    } else if (cmd_engineer->parsed()) {
      auto engineered = breachlens::pipeline::run_engineer(cfg);
      std::cout << "engineer: " << engineered.size() << " incidents enriched\n";
    } else if (cmd_analyze->parsed()) {
      breachlens::pipeline::run_analyze(cfg);
      std::cout << "analyze: wrote monthly_counts.csv, distributions.json, "
                   "correlation.json, tests.json, outliers.json\n";
    } else if (cmd_train->parsed()) {
      auto out = breachlens::pipeline::run_train(cfg);
      std::cout << "train: " << out.presets.size() << " presets, best by ROC AUC: "
                << out.best_preset << "\n";
    } else if (cmd_forecast->parsed()) {
      breachlens::pipeline::run_forecast(cfg);
      std::cout << "forecast: wrote series.csv and forecast artifacts\n";
    } else if (cmd_report->parsed()) {
      breachlens::pipeline::run_report(cfg);
      std::cout << "report: wrote report.json and report.md\n";
    }
  } catch (const breachlens::parse_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const breachlens::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const breachlens::precondition_error& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
