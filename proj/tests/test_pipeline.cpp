#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "breachlens/pipeline.hpp"

using namespace breachlens;
using namespace breachlens::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
  if (const char* env = std::getenv("BREACHLENS_DATA_DIR")) return fs::path(env);
  if (fs::exists("data/fixtures")) return fs::path("data");
  return fs::path("../data");
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("breachlens_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig fixture_config(const std::string& tag, const std::string& file = "incidents_400.csv") {
  RunConfig cfg;
  cfg.input_path = (data_dir() / "fixtures" / file).string();
  cfg.input_format = "csv";
  cfg.feature_columns = RunConfig::default_feature_columns();
  cfg.seed = 42;
  cfg.output_dir = fresh_dir(tag).string();
  cfg.forecast.train_end_year = 2020;
  return cfg;
}

nlohmann::json manifest() {
  return nlohmann::json::parse(
      fsio::read_file((data_dir() / "fixtures" / "manifest.json").string()));
}

void run_all(const RunConfig& cfg) {
  run_ingest(cfg);
  run_engineer(cfg);
  run_analyze(cfg);
  run_train(cfg);
  run_forecast(cfg);
  run_report(cfg);
}

}  // namespace

TEST_CASE("config validation") {
  nlohmann::json j;
  j["input_path"] = "x.csv";
  auto cfg = RunConfig::from_json(j);
  CHECK(cfg.test_fraction == 0.2);
  CHECK(cfg.cv_folds == 5);
  CHECK(cfg.feature_columns.size() == 14);

  j["bogus_key"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(j), config_error);
  j.erase("bogus_key");
  j["test_fraction"] = 1.5;
  CHECK_THROWS_AS(RunConfig::from_json(j), config_error);
  j["test_fraction"] = 0.2;
  j["forecast"] = nlohmann::json{{"model", "prophet"}};
  CHECK_THROWS_AS(RunConfig::from_json(j), config_error);
  j["forecast"] = nlohmann::json{{"horizon", 0}};
  CHECK_THROWS_AS(RunConfig::from_json(j), config_error);
  CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::object()), config_error);
}

TEST_CASE("ingest matches the fixture manifest") {
  auto m = manifest();
  for (const char* name : {"incidents_20", "incidents_400"}) {
    const auto& expect = m.at(name);
    RunConfig cfg = fixture_config(std::string("ingest_") + name,
                                   expect.at("file").get<std::string>());
    auto out = run_ingest(cfg);
    CHECK(out.report.input_count == expect.at("rows").get<std::size_t>());
    CHECK(out.report.retained_count == expect.at("retained").get<std::size_t>());
    std::size_t dropped_action = out.report.dropped.count("missing_action")
                                     ? out.report.dropped.at("missing_action")
                                     : 0;
    CHECK(dropped_action == expect.at("dropped_missing_action").get<std::size_t>());
    CHECK(fs::exists(fs::path(cfg.output_dir) / "incidents.jsonl"));
    CHECK(fs::exists(fs::path(cfg.output_dir) / "ingest_report.json"));
  }
}

TEST_CASE("ingest: missing input file raises an input error") {
  RunConfig cfg = fixture_config("missing_input");
  cfg.input_path = "/nonexistent/input.csv";
  CHECK_THROWS_AS(run_ingest(cfg), parse_error);
}

TEST_CASE("ingest: header-only csv yields zero records") {
  RunConfig cfg = fixture_config("empty_input");
  fs::path input = fs::path(cfg.output_dir) / "empty.csv";
  fsio::write_file(input.string(), "incident_id,action,year,summary\r\n");
  cfg.input_path = input.string();
  auto out = run_ingest(cfg);
  CHECK(out.report.input_count == 0);
  CHECK(out.report.retained_count == 0);
}

TEST_CASE("analyze artifacts exist, parse, and re-run byte-identical") {
  RunConfig cfg = fixture_config("analyze");
  run_ingest(cfg);
  run_engineer(cfg);
  run_analyze(cfg);
  fs::path dir(cfg.output_dir);
  for (const char* f : {"monthly_counts.csv", "distributions.json", "correlation.json",
                        "tests.json", "outliers.json", "holiday_comparison.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  auto tests = nlohmann::json::parse(fsio::read_file((dir / "tests.json").string()));
  CHECK(tests.is_array());
  CHECK(tests.size() >= 3);  // anova, kruskal, holiday comparison
  for (const auto& t : tests) {
    if (t.contains("p_value")) {
      CHECK(t.at("p_value").get<double>() >= 0.0);
      CHECK(t.at("p_value").get<double>() <= 1.0);
    }
  }
  std::string first = fsio::read_file((dir / "tests.json").string());
  run_analyze(cfg);
  std::string second = fsio::read_file((dir / "tests.json").string());
  CHECK(first == second);
}

TEST_CASE("analyze: empty holiday group becomes a note, not a failure") {
  RunConfig cfg = fixture_config("analyze_empty_group");
  run_ingest(cfg);
  run_engineer(cfg);
  fs::path file = fs::path(cfg.output_dir) / "engineered.jsonl";
  auto rows = features::engineered_from_jsonl(fsio::read_file(file.string()));
  for (auto& e : rows) {
    e.base.incident_month = 3;  // every record lands outside the holiday set
    e.is_holiday_month = false;
    e.season = features::Season::Spring;
  }
  fsio::write_file(file.string(), features::engineered_to_jsonl(rows));
  run_analyze(cfg);  // must not throw
  auto tests = nlohmann::json::parse(
      fsio::read_file((fs::path(cfg.output_dir) / "tests.json").string()));
  bool skipped_note = false;
  for (const auto& t : tests) {
    if (t.contains("status") && t.at("status") == "skipped") skipped_note = true;
  }
  CHECK(skipped_note);
}

TEST_CASE("train: single-class target is a precondition error") {
  RunConfig cfg = fixture_config("single_class");
  run_ingest(cfg);
  run_engineer(cfg);
  // rewrite the engineered file with the PII flag forced on
  fs::path file = fs::path(cfg.output_dir) / "engineered.jsonl";
  auto rows = features::engineered_from_jsonl(fsio::read_file(file.string()));
  for (auto& e : rows) e.contains_pii_terms = true;
  fsio::write_file(file.string(), features::engineered_to_jsonl(rows));
  CHECK_THROWS_AS(run_train(cfg), precondition_error);
}

TEST_CASE("train on the fixture: balancing helps the linear baseline") {
  RunConfig cfg = fixture_config("train_fixture");
  run_ingest(cfg);
  run_engineer(cfg);
  auto out = run_train(cfg);
  const TrainedPreset* logistic = nullptr;
  for (const auto& tp : out.presets) {
    if (tp.name == "logistic") logistic = &tp;
  }
  REQUIRE(logistic != nullptr);
  CHECK(logistic->after.f1 >= logistic->before.f1);
  // artifacts
  fs::path dir(cfg.output_dir);
  for (const char* f : {"split_plan.json", "smote_report.json", "metrics_before.json",
                        "metrics_after.json", "importance.csv", "confusion.json",
                        "roc_points.csv", "encoders.json"}) {
    CHECK(fs::exists(dir / f));
  }
  for (const auto& preset : cfg.model_presets) {
    CHECK(fs::exists(dir / "models" / (preset + "_before.json")));
    CHECK(fs::exists(dir / "models" / (preset + "_after.json")));
  }
  // leakage guard, asserted from the artifacts alone
  auto plan = nlohmann::json::parse(fsio::read_file((dir / "split_plan.json").string()));
  auto smote = nlohmann::json::parse(fsio::read_file((dir / "smote_report.json").string()));
  std::set<std::size_t> test_rows(plan.at("test").begin(), plan.at("test").end());
  for (const auto& idx : smote.at("input_indices")) {
    CHECK(test_rows.count(idx.get<std::size_t>()) == 0);
  }
  // importance covers every feature once
  auto table = csv::parse_with_header(fsio::read_file((dir / "importance.csv").string()));
  CHECK(table.rows.size() == cfg.feature_columns.size());
}

TEST_CASE("forecast artifacts and the holdout boundary") {
  RunConfig cfg = fixture_config("forecast_fixture");
  run_ingest(cfg);
  run_engineer(cfg);
  cfg.forecast.train_end_year = 2020;
  run_forecast(cfg);
  fs::path dir(cfg.output_dir);
  for (const char* f : {"series.csv", "arima_fit.json", "arima_forecast.csv",
                        "trend_fit.json", "trend_forecast.csv", "forecast_metrics.json"}) {
    CHECK(fs::exists(dir / f));
  }
  auto metrics = nlohmann::json::parse(fsio::read_file((dir / "forecast_metrics.json").string()));
  CHECK(metrics.at("holdout").get<bool>());
  CHECK(metrics.at("arima").contains("rmse"));

  // train_end_year at (or beyond) the last observed year: no holdout block
  cfg.forecast.train_end_year = 2023;
  run_forecast(cfg);
  metrics = nlohmann::json::parse(fsio::read_file((dir / "forecast_metrics.json").string()));
  CHECK(!metrics.at("holdout").get<bool>());
  CHECK(!metrics.at("arima").contains("rmse"));
}

TEST_CASE("forecast: too-short series is a precondition error") {
  RunConfig cfg = fixture_config("forecast_short");
  run_ingest(cfg);
  run_engineer(cfg);
  fs::path file = fs::path(cfg.output_dir) / "engineered.jsonl";
  auto rows = features::engineered_from_jsonl(fsio::read_file(file.string()));
  std::vector<features::EngineeredIncident> few;
  for (auto& e : rows) {
    if (e.base.year >= 2019 && e.base.year <= 2022) few.push_back(e);
  }
  fsio::write_file(file.string(), features::engineered_to_jsonl(few));
  cfg.forecast.train_end_year = 0;
  cfg.forecast.model = "arima";
  CHECK_THROWS_AS(run_forecast(cfg), precondition_error);
  // four distinct years still satisfy the trend model's minimum
  cfg.forecast.model = "trend";
  run_forecast(cfg);
  CHECK(fs::exists(fs::path(cfg.output_dir) / "trend_forecast.csv"));
}

TEST_CASE("report: schema validation, missing sections, idempotent render") {
  RunConfig cfg = fixture_config("report_partial");
  run_ingest(cfg);
  run_engineer(cfg);
  run_analyze(cfg);
  // no train/forecast stage: those sections must carry status=missing
  auto report = run_report(cfg);
  CHECK(report.at("model_metrics").at("before").at("status") == "missing");
  bool forecast_missing = false;
  for (const auto& fc : report.at("forecasts")) {
    if (fc.contains("status") && fc.at("status") == "missing") forecast_missing = true;
  }
  CHECK(forecast_missing);

  auto schema = nlohmann::json::parse(
      fsio::read_file((data_dir() / "report_schema.json").string()));
  std::string error;
  CHECK(validate_report(report, schema, &error));
  CHECK(error.empty());

  // re-render without recompute: identical bytes
  fs::path path = fs::path(cfg.output_dir) / "report.json";
  std::string first = fsio::read_file(path.string());
  run_report(cfg);
  CHECK(first == fsio::read_file(path.string()));

  nlohmann::json broken = report;
  broken.erase("provenance");
  CHECK(!validate_report(broken, schema, &error));
}

TEST_CASE("end-to-end determinism: byte-identical artifacts for equal seeds") {
  RunConfig a = fixture_config("determinism_a");
  RunConfig b = fixture_config("determinism_b");
  run_all(a);
  run_all(b);
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(a.output_dir)) {
    if (entry.is_regular_file()) {
      files.push_back(fs::relative(entry.path(), a.output_dir).string());
    }
  }
  CHECK(files.size() >= 20);
  for (const auto& rel : files) {
    std::string left = fsio::read_file((fs::path(a.output_dir) / rel).string());
    std::string right = fsio::read_file((fs::path(b.output_dir) / rel).string());
    CHECK_MESSAGE(left == right, "artifact differs: ", rel);
  }
  // a full-run report validates against the shipped schema
  auto schema = nlohmann::json::parse(
      fsio::read_file((data_dir() / "report_schema.json").string()));
  auto report = nlohmann::json::parse(
      fsio::read_file((fs::path(a.output_dir) / "report.json").string()));
  std::string error;
  CHECK_MESSAGE(validate_report(report, schema, &error), error);

  // a different seed perturbs at least the split plan
  RunConfig c = fixture_config("determinism_c");
  c.seed = 43;
  run_ingest(c);
  run_engineer(c);
  run_train(c);
  std::string plan_a = fsio::read_file((fs::path(a.output_dir) / "split_plan.json").string());
  std::string plan_c = fsio::read_file((fs::path(c.output_dir) / "split_plan.json").string());
  CHECK(plan_a != plan_c);
}

TEST_CASE("output directory lock") {
  fs::path dir = fresh_dir("lock");
  DirLock lock(dir);
  CHECK_THROWS_AS(DirLock{dir}, config_error);
}

TEST_CASE("the xgb-like preset solves the XOR fixture") {
  Matrix x(0, 2);
  x.push_row({0, 0});
  x.push_row({0, 1});
  x.push_row({1, 0});
  x.push_row({1, 1});
  std::vector<int> y{0, 1, 1, 0};
  auto model = learn::train_gbdt(x, y, detail::gbdt_preset("xgb-like"));
  auto p = learn::predict_proba(model, x);
  for (std::size_t i = 0; i < 4; ++i) CHECK((p[i] >= 0.5) == (y[i] == 1));
}
