#ifndef BREACHLENS_PIPELINE_HPP
#define BREACHLENS_PIPELINE_HPP

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/arima.hpp"
#include "breachlens/core.hpp"
#include "breachlens/csv.hpp"
#include "breachlens/features.hpp"
#include "breachlens/forecast.hpp"
#include "breachlens/gbdt.hpp"
#include "breachlens/ingest.hpp"
#include "breachlens/logistic.hpp"
#include "breachlens/metrics.hpp"
#include "breachlens/resample.hpp"
#include "breachlens/shapley.hpp"
#include "breachlens/stats.hpp"
#include "breachlens/trend.hpp"

namespace breachlens::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ForecastConfig {
  int train_end_year = 0;  // 0 = use the whole series
  int horizon = 3;
  double level = 0.95;
  std::string model = "both";  // arima | trend | both
};

struct RunConfig {
  std::string input_path;
  std::string input_format = "csv";
  std::string lexicon_path;  // empty = shipped defaults
  std::vector<std::string> feature_columns = default_feature_columns();
  std::string target = "contains_pii_terms";
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  int cv_folds = 5;
  bool smote = true;
  std::vector<std::string> model_presets = {"logistic", "xgb-like", "lgbm-like"};
  ForecastConfig forecast;
  std::string output_dir = "out";
  std::vector<int> holiday_months = {6, 7, 11, 12};

  static const std::vector<std::string>& default_feature_columns() {
    static const std::vector<std::string> cols = {
        "industry",       "country",      "state",        "year",
        "actor_external", "action",       "confidentiality", "summary_length",
        "keyword_count",  "risk_terms_score", "victim_sector", "country_code",
        "region_group",   "threat_enrichment_score"};
    return cols;
  }

  json to_json() const {
    json j;
    j["input_path"] = input_path;
    j["input_format"] = input_format;
    j["lexicon_path"] = lexicon_path;
    j["feature_columns"] = feature_columns;
    j["target"] = target;
    j["seed"] = seed;
    j["test_fraction"] = test_fraction;
    j["cv_folds"] = cv_folds;
    j["smote"] = smote;
    j["model_presets"] = model_presets;
    j["forecast"] = json{{"train_end_year", forecast.train_end_year},
                         {"horizon", forecast.horizon},
                         {"level", forecast.level},
                         {"model", forecast.model}};
    j["output_dir"] = output_dir;
    j["holiday_months"] = holiday_months;
    return j;
  }

  // Hash of the result-affecting configuration; output placement excluded.
  std::string hash() const {
    json j = to_json();
    j.erase("output_dir");
    return fnv1a64_hex(j.dump());
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    static const std::set<std::string> known = {
        "input_path", "input_format", "lexicon_path", "feature_columns", "target",
        "seed", "test_fraction", "cv_folds", "smote", "model_presets", "forecast",
        "output_dir", "holiday_months"};
    for (const auto& [key, val] : j.items()) {
      if (!known.count(key)) throw config_error("unknown config key: " + key);
    }
    if (!j.contains("input_path")) throw config_error("config requires input_path");
    c.input_path = j.at("input_path").get<std::string>();
    c.input_format = j.value("input_format", c.input_format);
    ingest::parse_format(c.input_format);  // validates the tag
    c.lexicon_path = j.value("lexicon_path", c.lexicon_path);
    if (j.contains("feature_columns")) {
      c.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    }
    if (c.feature_columns.empty()) c.feature_columns = default_feature_columns();
    c.target = j.value("target", c.target);
    c.seed = j.value("seed", c.seed);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0))
      throw config_error("test_fraction must be in (0,1)");
    c.cv_folds = j.value("cv_folds", c.cv_folds);
    if (c.cv_folds < 2) throw config_error("cv_folds must be >= 2");
    c.smote = j.value("smote", c.smote);
    if (j.contains("model_presets")) {
      c.model_presets = j.at("model_presets").get<std::vector<std::string>>();
    }
    if (j.contains("forecast")) {
      const json& jf = j.at("forecast");
      c.forecast.train_end_year = jf.value("train_end_year", c.forecast.train_end_year);
      c.forecast.horizon = jf.value("horizon", c.forecast.horizon);
      c.forecast.level = jf.value("level", c.forecast.level);
      c.forecast.model = jf.value("model", c.forecast.model);
    }
    if (c.forecast.horizon < 1) throw config_error("forecast.horizon must be >= 1");
    if (c.forecast.model != "arima" && c.forecast.model != "trend" &&
        c.forecast.model != "both") {
      throw config_error("forecast.model must be arima, trend, or both");
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("holiday_months")) {
      c.holiday_months = j.at("holiday_months").get<std::vector<int>>();
    }
    return c;
  }

  static RunConfig load(const std::string& path) {
    json j = json::parse(fsio::read_file(path), nullptr, false);
    if (j.is_discarded()) throw config_error("config file is not valid JSON: " + path);
    return from_json(j);
  }
};

// One writer per output directory at a time.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".breachlens.lock") {
    fs::create_directories(dir);
    FILE* f = std::fopen(path_.string().c_str(), "wx");
    if (!f) throw config_error("output directory is locked: " + path_.string());
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

namespace detail {

inline void write_json(const fs::path& p, const json& j) {
  fsio::write_file(p.string(), j.dump(2) + "\n");
}

inline json read_json(const fs::path& p) {
  json j = json::parse(fsio::read_file(p.string()), nullptr, false);
  if (j.is_discarded()) throw parse_error("invalid JSON artifact: " + p.string());
  return j;
}

inline features::Lexicon load_lexicon(const RunConfig& cfg) {
  if (cfg.lexicon_path.empty()) return features::Lexicon::defaults();
  json j = json::parse(fsio::read_file(cfg.lexicon_path), nullptr, false);
  if (j.is_discarded()) throw config_error("lexicon file is not valid JSON");
  return features::Lexicon::from_json(j);
}

}  // namespace detail

struct IngestOutcome {
  std::vector<ingest::IncidentRecord> records;
  ingest::IngestReport report;
};

inline IngestOutcome run_ingest(const RunConfig& cfg) {
  std::string text = fsio::read_file(cfg.input_path);
  auto raw = ingest::parse_dataset(text, ingest::parse_format(cfg.input_format));
  auto imputed = ingest::impute(raw);
  auto filtered = ingest::filter_ecommerce(imputed.records);
  IngestOutcome out;
  out.records = std::move(filtered.records);
  out.report = filtered.report;
  out.report.input_count = raw.size();
  if (imputed.dropped_missing_action > 0)
    out.report.dropped["missing_action"] = imputed.dropped_missing_action;
  if (imputed.dropped_missing_year > 0)
    out.report.dropped["missing_year"] = imputed.dropped_missing_year;

  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  fsio::write_file((dir / "incidents.jsonl").string(), ingest::records_to_jsonl(out.records));
  detail::write_json(dir / "ingest_report.json", out.report.to_json());
  return out;
}

inline std::vector<features::EngineeredIncident> run_engineer(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  auto records = ingest::records_from_jsonl(fsio::read_file((dir / "incidents.jsonl").string()));
  features::Lexicon lexicon = detail::load_lexicon(cfg);
  auto engineered = features::engineer(records, lexicon, cfg.holiday_months);
  fsio::write_file((dir / "engineered.jsonl").string(),
                   features::engineered_to_jsonl(engineered));
  detail::write_json(dir / "lexicon_used.json", lexicon.to_json());
  return engineered;
}

inline std::vector<features::EngineeredIncident> load_engineered(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  return features::engineered_from_jsonl(
      fsio::read_file((dir / "engineered.jsonl").string()));
}

inline void run_analyze(const RunConfig& cfg) {
  auto engineered = load_engineered(cfg);
  fs::path dir(cfg.output_dir);

  // monthly counts
  auto counts = stats::monthly_counts(engineered);
  std::string mc_csv = csv::write_row({"month", "count"});
  for (const auto& [m, c] : counts) {
    mc_csv += csv::write_row({std::to_string(m), std::to_string(c)});
  }
  fsio::write_file((dir / "monthly_counts.csv").string(), mc_csv);

  // categorical distributions
  json dist;
  for (const char* field : {"action_type", "actor_external", "asset_category"}) {
    json jd = json::object();
    for (const auto& [label, share] : stats::categorical_distribution(engineered, field)) {
      jd[label] = json{{"count", share.count}, {"percent", share.percent}};
    }
    dist[field] = std::move(jd);
  }
  detail::write_json(dir / "distributions.json", dist);

  // correlation over the text-derived numeric features
  std::vector<std::string> corr_names = {"summary_length", "keyword_count",
                                         "risk_terms_score", "threat_enrichment_score",
                                         "contains_pii_terms"};
  std::vector<std::vector<double>> cols(corr_names.size());
  for (const auto& e : engineered) {
    cols[0].push_back(e.summary_length);
    cols[1].push_back(e.keyword_count);
    cols[2].push_back(e.risk_terms_score);
    cols[3].push_back(e.threat_enrichment_score);
    cols[4].push_back(e.contains_pii_terms ? 1.0 : 0.0);
  }
  detail::write_json(dir / "correlation.json",
                     stats::correlation_matrix(cols, corr_names).to_json());

  // hypothesis tests: seasonal groups of the enrichment score, plus the
  // holiday comparison
  json tests = json::array();
  {
    std::map<std::string, std::vector<double>> by_season;
    for (const auto& e : engineered) {
      if (e.season == features::Season::Unknown) continue;
      by_season[features::to_string(e.season)].push_back(
          static_cast<double>(e.threat_enrichment_score));
    }
    std::vector<std::vector<double>> groups;
    for (const auto& [name, g] : by_season) {
      if (!g.empty()) groups.push_back(g);
    }
    if (groups.size() >= 2) {
      json ja = stats::anova_oneway(groups).to_json();
      ja["grouping"] = "season";
      tests.push_back(std::move(ja));
      json jk = stats::kruskal_wallis(groups).to_json();
      jk["grouping"] = "season";
      tests.push_back(std::move(jk));
    } else {
      tests.push_back(json{{"method", "anova"}, {"status", "skipped"},
                           {"reason", "fewer than two seasonal groups"}});
    }
  }
  std::string hc_csv = csv::write_row({"group", "mean"});
  try {
    auto hc = stats::holiday_comparison(engineered);
    json jm = hc.test.test.to_json();
    jm["grouping"] = "holiday_vs_non_holiday";
    jm["u_min"] = hc.test.u_min;
    jm["mean_holiday"] = hc.mean_holiday;
    jm["mean_non_holiday"] = hc.mean_non_holiday;
    tests.push_back(std::move(jm));
    hc_csv += csv::write_row({"holiday", numfmt::format_double(hc.mean_holiday)});
    hc_csv += csv::write_row({"non_holiday", numfmt::format_double(hc.mean_non_holiday)});
  } catch (const std::domain_error& e) {
    tests.push_back(json{{"method", "mann_whitney"}, {"status", "skipped"},
                         {"reason", e.what()}});
  }
  fsio::write_file((dir / "holiday_comparison.csv").string(), hc_csv);
  detail::write_json(dir / "tests.json", tests);

  // IQR outliers over the four numeric columns the analysis tracks
  json outliers = json::array();
  struct NumCol { const char* name; std::vector<double> values; };
  std::vector<NumCol> numeric = {{"summary_length", {}},
                                 {"risk_terms_score", {}},
                                 {"year", {}},
                                 {"threat_enrichment_score", {}}};
  for (const auto& e : engineered) {
    numeric[0].values.push_back(e.summary_length);
    numeric[1].values.push_back(e.risk_terms_score);
    numeric[2].values.push_back(e.base.year);
    numeric[3].values.push_back(e.threat_enrichment_score);
  }
  for (auto& col : numeric) {
    if (col.values.empty()) continue;
    outliers.push_back(stats::iqr_outliers(col.values, col.name).to_json());
  }
  detail::write_json(dir / "outliers.json", outliers);
}

namespace detail {

inline bool is_numeric_feature(const std::string& name) {
  static const std::set<std::string> numeric = {
      "year", "incident_month", "incident_quarter", "summary_length", "keyword_count",
      "risk_terms_score", "threat_enrichment_score", "severity_score",
      "contains_pii_terms", "is_holiday_month", "high_severity"};
  return numeric.count(name) > 0;
}

inline double numeric_feature(const features::EngineeredIncident& e, const std::string& name) {
  if (name == "year") return e.base.year;
  if (name == "incident_month") return e.base.incident_month;
  if (name == "incident_quarter") return e.base.incident_quarter;
  if (name == "summary_length") return e.summary_length;
  if (name == "keyword_count") return e.keyword_count;
  if (name == "risk_terms_score") return e.risk_terms_score;
  if (name == "threat_enrichment_score") return e.threat_enrichment_score;
  if (name == "severity_score") return e.severity_score;
  if (name == "contains_pii_terms") return e.contains_pii_terms ? 1.0 : 0.0;
  if (name == "is_holiday_month") return e.is_holiday_month ? 1.0 : 0.0;
  if (name == "high_severity") return e.high_severity ? 1.0 : 0.0;
  throw config_error("unknown numeric feature: " + name);
}

inline std::string categorical_feature(const features::EngineeredIncident& e,
                                       const std::string& name) {
  if (name == "industry") return e.base.industry;
  if (name == "country") return e.base.country;
  if (name == "state") return e.base.state;
  if (name == "actor_external") return e.base.actor_external;
  if (name == "actor_internal") return e.base.actor_internal;
  if (name == "action") return e.base.action;
  if (name == "confidentiality") return e.base.confidentiality;
  if (name == "integrity") return e.base.integrity;
  if (name == "victim_sector") return e.base.victim_sector;
  if (name == "country_code") return e.base.country_code;
  if (name == "region_group") return e.base.region_group;
  if (name == "action_type") return features::to_string(e.action_type);
  if (name == "season") return features::to_string(e.season);
  throw config_error("unknown feature column: " + name);
}

inline int target_value(const features::EngineeredIncident& e, const std::string& target) {
  if (target == "contains_pii_terms") return e.contains_pii_terms ? 1 : 0;
  if (target == "high_severity") return e.high_severity ? 1 : 0;
  if (target == "is_holiday_month") return e.is_holiday_month ? 1 : 0;
  throw config_error("unsupported target: " + target);
}

}  // namespace detail

// Encoded learning matrix: label encoders fitted on the training rows only,
// unseen test categories fall back to "Unknown".
inline resample::DataMatrix build_matrix(const std::vector<features::EngineeredIncident>& rows,
                                         const std::vector<std::string>& feature_columns,
                                         const std::string& target,
                                         const std::vector<std::size_t>& fit_rows) {
  if (feature_columns.empty()) throw config_error("feature_columns must not be empty");
  resample::DataMatrix dm;
  dm.column_names = feature_columns;
  dm.rows = Matrix(rows.size(), feature_columns.size());
  for (std::size_t c = 0; c < feature_columns.size(); ++c) {
    const std::string& name = feature_columns[c];
    if (detail::is_numeric_feature(name)) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        dm.rows.at(r, c) = detail::numeric_feature(rows[r], name);
      }
    } else {
      std::vector<std::string> train_values;
      train_values.reserve(fit_rows.size());
      for (auto r : fit_rows) train_values.push_back(detail::categorical_feature(rows[r], name));
      dm.encoders.fit_label(name, train_values);
      const auto& m = dm.encoders.label_maps.at(name);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        std::string v = detail::categorical_feature(rows[r], name);
        auto it = m.find(v);
        dm.rows.at(r, c) = static_cast<double>(it != m.end() ? it->second : m.at("Unknown"));
      }
    }
  }
  dm.labels.reserve(rows.size());
  for (const auto& e : rows) dm.labels.push_back(detail::target_value(e, target));
  return dm;
}

struct TrainedPreset {
  std::string name;
  learn::Metrics before;
  learn::Metrics after;
  json model_before;
  json model_after;
  std::vector<double> test_probabilities_after;
};

struct TrainOutcome {
  resample::SplitPlan plan;
  std::vector<TrainedPreset> presets;
  std::string best_preset;
  std::vector<std::pair<std::string, double>> importance;
};

namespace detail {

struct PresetModels {
  std::optional<learn::LogisticModel> logistic;
  std::optional<learn::GbdtModel> gbdt;
};

inline learn::GbdtConfig gbdt_preset(const std::string& name) {
  learn::GbdtConfig cfg;
  cfg.rounds = 150;
  cfg.learning_rate = 0.1;
  cfg.min_leaf = 1;
  cfg.l2_lambda = 1.0;
  if (name == "xgb-like") {
    cfg.depth = 3;
    cfg.growth = learn::TreeGrowth::level_wise;
  } else if (name == "lgbm-like") {
    cfg.depth = 4;
    cfg.growth = learn::TreeGrowth::leaf_wise;
  } else {
    throw config_error("unknown model preset: " + name);
  }
  return cfg;
}

inline Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
  Matrix out(0, m.cols);
  for (auto i : idx) out.push_row(m.row_copy(i));
  return out;
}

}  // namespace detail

inline TrainOutcome run_train(const RunConfig& cfg) {
  auto engineered = load_engineered(cfg);
  if (engineered.empty()) throw precondition_error("train: no engineered incidents");
  std::vector<int> labels;
  labels.reserve(engineered.size());
  for (const auto& e : engineered) labels.push_back(detail::target_value(e, cfg.target));
  std::size_t positives = 0;
  for (int v : labels) positives += v;
  if (positives == 0 || positives == labels.size()) {
    throw precondition_error("train: target '" + cfg.target +
                             "' has a single class; nothing to learn");
  }

  TrainOutcome out;
  out.plan = resample::stratified_split(labels, cfg.test_fraction, cfg.seed);
  {
    std::vector<int> train_labels;
    for (auto i : out.plan.train_indices) train_labels.push_back(labels[i]);
    // folds are expressed in original row indices for auditability
    auto folds = resample::stratified_kfold(train_labels, cfg.cv_folds, cfg.seed + 1);
    for (auto& [tr, va] : folds) {
      std::vector<std::size_t> tr_orig, va_orig;
      for (auto i : tr) tr_orig.push_back(out.plan.train_indices[i]);
      for (auto i : va) va_orig.push_back(out.plan.train_indices[i]);
      out.plan.folds.emplace_back(std::move(tr_orig), std::move(va_orig));
    }
  }

  resample::DataMatrix dm =
      build_matrix(engineered, cfg.feature_columns, cfg.target, out.plan.train_indices);

  Matrix x_train = detail::take_rows(dm.rows, out.plan.train_indices);
  Matrix x_test = detail::take_rows(dm.rows, out.plan.test_indices);
  std::vector<int> y_train, y_test;
  for (auto i : out.plan.train_indices) y_train.push_back(labels[i]);
  for (auto i : out.plan.test_indices) y_test.push_back(labels[i]);

  // scaling parameters for the logistic preset, fitted on training data only
  std::vector<resample::MinMaxParams> scale_params(dm.rows.cols);
  for (std::size_t c = 0; c < dm.rows.cols; ++c) {
    std::vector<double> col;
    col.reserve(x_train.rows);
    for (std::size_t r = 0; r < x_train.rows; ++r) col.push_back(x_train.at(r, c));
    scale_params[c] = resample::minmax_fit(col);
  }
  auto scaled = [&](const Matrix& m) {
    Matrix s = m;
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t c = 0; c < s.cols; ++c) {
        s.at(r, c) = resample::minmax_apply_one(s.at(r, c), scale_params[c]);
      }
    }
    return s;
  };

  // SMOTE balancing of the training partition only
  std::vector<std::size_t> minority_rows, majority_rows;
  for (std::size_t r = 0; r < x_train.rows; ++r) {
    (y_train[r] == 1 ? minority_rows : majority_rows).push_back(r);
  }
  int minority_label = 1;
  if (minority_rows.size() > majority_rows.size()) {
    std::swap(minority_rows, majority_rows);
    minority_label = 0;
  }
  Matrix x_balanced = x_train;
  std::vector<int> y_balanced = y_train;
  std::size_t synthetic_count = 0;
  if (cfg.smote && !minority_rows.empty()) {
    Matrix minority = detail::take_rows(x_train, minority_rows);
    Matrix synth = resample::smote(minority, majority_rows.size(), 5, cfg.seed + 2);
    synthetic_count = synth.rows;
    for (std::size_t r = 0; r < synth.rows; ++r) {
      x_balanced.push_row(synth.row_copy(r));
      y_balanced.push_back(minority_label);
    }
  }

  // the balanced training pool is itself split 80:20 before fitting; the
  // held-out test partition never sees the balancing step
  Matrix x_fit_after = x_balanced;
  std::vector<int> y_fit_after = y_balanced;
  if (cfg.smote && synthetic_count > 0) {
    auto inner = resample::stratified_split(y_balanced, 0.2, cfg.seed + 3);
    x_fit_after = detail::take_rows(x_balanced, inner.train_indices);
    y_fit_after.clear();
    for (auto i : inner.train_indices) y_fit_after.push_back(y_balanced[i]);
  }

  fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "models");
  detail::write_json(dir / "split_plan.json", out.plan.to_json());
  {
    json smote_report;
    smote_report["enabled"] = cfg.smote;
    smote_report["minority_label"] = minority_label;
    smote_report["minority_count"] = minority_rows.size();
    smote_report["majority_count"] = majority_rows.size();
    smote_report["synthetic_rows"] = synthetic_count;
    std::vector<std::size_t> input_rows;  // original dataset indices fed to SMOTE
    for (auto r : out.plan.train_indices) input_rows.push_back(r);
    smote_report["input_indices"] = input_rows;
    json counts_after = json::object();
    std::size_t pos_after = 0;
    for (int v : y_balanced) pos_after += v;
    counts_after["0"] = y_balanced.size() - pos_after;
    counts_after["1"] = pos_after;
    smote_report["class_counts_after"] = counts_after;
    detail::write_json(dir / "smote_report.json", smote_report);
  }

  json metrics_before = json::object();
  json metrics_after = json::object();
  json confusion = json::object();
  double best_auc = -1;
  std::vector<double> best_probs;

  for (const auto& preset : cfg.model_presets) {
    TrainedPreset tp;
    tp.name = preset;
    if (preset == "logistic") {
      Matrix xs_train = scaled(x_train);
      Matrix xs_test = scaled(x_test);
      learn::LogisticConfig lc;
      lc.l2 = 1e-4;
      lc.step = 0.5;
      lc.epochs = 500;
      auto before = learn::train_logistic(xs_train, y_train, lc);
      tp.before = learn::evaluate(learn::predict_proba(before, xs_test), y_test);
      tp.model_before = before.to_json();
      Matrix xs_fit = scaled(x_fit_after);
      auto after = learn::train_logistic(xs_fit, y_fit_after, lc);
      tp.test_probabilities_after = learn::predict_proba(after, xs_test);
      tp.after = learn::evaluate(tp.test_probabilities_after, y_test);
      tp.model_after = after.to_json();
    } else {
      learn::GbdtConfig gc = detail::gbdt_preset(preset);
      auto before = learn::train_gbdt(x_train, y_train, gc);
      tp.before = learn::evaluate(learn::predict_proba(before, x_test), y_test);
      tp.model_before = before.to_json();
      auto after = learn::train_gbdt(x_fit_after, y_fit_after, gc);
      tp.test_probabilities_after = learn::predict_proba(after, x_test);
      tp.after = learn::evaluate(tp.test_probabilities_after, y_test);
      tp.model_after = after.to_json();
    }
    metrics_before[preset] = tp.before.to_json();
    metrics_after[preset] = tp.after.to_json();
    confusion[preset] = json{{"before", json{{"tp", tp.before.confusion.tp},
                                             {"tn", tp.before.confusion.tn},
                                             {"fp", tp.before.confusion.fp},
                                             {"fn", tp.before.confusion.fn}}},
                             {"after", json{{"tp", tp.after.confusion.tp},
                                            {"tn", tp.after.confusion.tn},
                                            {"fp", tp.after.confusion.fp},
                                            {"fn", tp.after.confusion.fn}}}};
    detail::write_json(dir / "models" / (preset + "_before.json"), tp.model_before);
    detail::write_json(dir / "models" / (preset + "_after.json"), tp.model_after);
    if (tp.after.roc_auc > best_auc) {
      best_auc = tp.after.roc_auc;
      out.best_preset = preset;
      best_probs = tp.test_probabilities_after;
    }
    out.presets.push_back(std::move(tp));
  }
  detail::write_json(dir / "metrics_before.json", metrics_before);
  detail::write_json(dir / "metrics_after.json", metrics_after);
  detail::write_json(dir / "confusion.json", confusion);

  // ROC points of the best preset on the held-out test rows
  {
    std::vector<std::pair<double, int>> scored;
    for (std::size_t i = 0; i < best_probs.size(); ++i) {
      scored.emplace_back(best_probs[i], y_test[i]);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first > b.first;
    });
    double n_pos = 0, n_neg = 0;
    for (const auto& [s, y] : scored) (y ? n_pos : n_neg) += 1;
    std::string roc = csv::write_row({"threshold", "fpr", "tpr"});
    double tp = 0, fp = 0;
    roc += csv::write_row({"inf", "0", "0"});
    for (std::size_t i = 0; i < scored.size();) {
      std::size_t j = i;
      while (j < scored.size() && scored[j].first == scored[i].first) {
        (scored[j].second ? tp : fp) += 1;
        ++j;
      }
      roc += csv::write_row({numfmt::format_double(scored[i].first),
                             numfmt::format_double(n_neg > 0 ? fp / n_neg : 0.0),
                             numfmt::format_double(n_pos > 0 ? tp / n_pos : 0.0)});
      i = j;
    }
    fsio::write_file((dir / "roc_points.csv").string(), roc);
  }

  // Shapley importance of the best preset's after-branch model, over a
  // seeded evaluation subsample against a training background
  {
    const TrainedPreset* best = nullptr;
    for (const auto& tp : out.presets) {
      if (tp.name == out.best_preset) best = &tp;
    }
    if (best) {
      Matrix background = learn::background_subsample(x_train, 64, cfg.seed + 4);
      Matrix eval_rows = learn::background_subsample(x_test, 16, cfg.seed + 5);
      std::vector<learn::ImportanceEntry> ranked;
      bool logistic = best->name == "logistic";
      learn::LogisticModel lm;
      learn::GbdtModel gm;
      if (logistic) lm = learn::LogisticModel::from_json(best->model_after);
      else gm = learn::GbdtModel::from_json(best->model_after);
      auto f = [&](const std::vector<double>& row) {
        if (logistic) {
          std::vector<double> s(row.size());
          for (std::size_t c = 0; c < row.size(); ++c) {
            s[c] = resample::minmax_apply_one(row[c], scale_params[c]);
          }
          return learn::sigmoid(lm.raw_score(s.data(), s.size()));
        }
        return learn::sigmoid(gm.raw_score(row.data()));
      };
      auto mode = dm.rows.cols <= 10 ? learn::ShapleyMode::exact : learn::ShapleyMode::sampled;
      ranked = learn::global_importance(f, eval_rows, background, mode, 32, cfg.seed + 6);
      std::string imp = csv::write_row({"feature", "mean_abs_shap"});
      for (const auto& entry : ranked) {
        out.importance.emplace_back(dm.column_names[entry.feature], entry.mean_abs_shap);
        imp += csv::write_row({dm.column_names[entry.feature],
                               numfmt::format_double(entry.mean_abs_shap)});
      }
      fsio::write_file((dir / "importance.csv").string(), imp);
    }
  }
  detail::write_json(dir / "encoders.json", dm.encoders.to_json());
  return out;
}

inline void run_forecast(const RunConfig& cfg) {
  auto engineered = load_engineered(cfg);
  auto series = forecast::aggregate_annual(engineered);
  fs::path dir(cfg.output_dir);

  std::string series_csv = csv::write_row({"year", "mean_risk_terms_score", "filled"});
  for (std::size_t i = 0; i < series.years.size(); ++i) {
    series_csv += csv::write_row({std::to_string(series.years[i]),
                                  numfmt::format_double(series.values[i]),
                                  series.filled[i] ? "1" : "0"});
  }
  fsio::write_file((dir / "series.csv").string(), series_csv);

  // training window
  std::vector<double> train_values = series.values;
  std::vector<int> train_years = series.years;
  bool has_holdout = false;
  std::vector<double> holdout_values;
  if (cfg.forecast.train_end_year > 0 && cfg.forecast.train_end_year < series.years.back()) {
    train_values.clear();
    train_years.clear();
    for (std::size_t i = 0; i < series.years.size(); ++i) {
      if (series.years[i] <= cfg.forecast.train_end_year) {
        train_years.push_back(series.years[i]);
        train_values.push_back(series.values[i]);
      } else {
        holdout_values.push_back(series.values[i]);
      }
    }
    has_holdout = !holdout_values.empty();
  }

  bool want_arima = cfg.forecast.model == "arima" || cfg.forecast.model == "both";
  bool want_trend = cfg.forecast.model == "trend" || cfg.forecast.model == "both";
  json metrics = json::object();
  metrics["holdout"] = has_holdout;

  if (want_arima) {
    if (train_values.size() < 8) {
      throw precondition_error(
          "forecast: ARIMA needs at least 8 training years, have " +
          std::to_string(train_values.size()));
    }
    auto fit = forecast::auto_arima(train_values);
    detail::write_json(dir / "arima_fit.json", fit.to_json());
    int horizon = cfg.forecast.horizon +
                  (has_holdout ? static_cast<int>(holdout_values.size()) : 0);
    auto fc = forecast::forecast_arima(fit, horizon, cfg.forecast.level, train_years.back());
    fsio::write_file((dir / "arima_forecast.csv").string(), fc.to_csv());
    if (has_holdout) {
      std::vector<double> predicted(fc.point.begin(),
                                    fc.point.begin() + static_cast<long>(holdout_values.size()));
      metrics["arima"] = forecast::forecast_metrics(holdout_values, predicted).to_json();
      metrics["arima"]["order"] = fit.to_json()["order"];
      metrics["arima"]["aic"] = fit.aic;
    } else {
      metrics["arima"] = json{{"order", fit.to_json()["order"]}, {"aic", fit.aic}};
    }
  }
  if (want_trend) {
    if (train_values.size() < 4) {
      throw precondition_error("forecast: trend model needs at least 4 training years, have " +
                               std::to_string(train_values.size()));
    }
    std::vector<double> times(train_years.begin(), train_years.end());
    auto model = forecast::fit_trend_model(times, train_values);
    detail::write_json(dir / "trend_fit.json", model.to_json());
    int horizon = cfg.forecast.horizon +
                  (has_holdout ? static_cast<int>(holdout_values.size()) : 0);
    auto fc = forecast::forecast_trend(model, horizon, 0.80, 500, cfg.seed,
                                       1.0, train_years.back());
    fsio::write_file((dir / "trend_forecast.csv").string(), fc.to_csv());
    if (has_holdout) {
      std::vector<double> predicted(fc.point.begin(),
                                    fc.point.begin() + static_cast<long>(holdout_values.size()));
      metrics["trend"] = forecast::forecast_metrics(holdout_values, predicted).to_json();
      metrics["trend"]["changepoints"] = model.changepoints.size();
    } else {
      metrics["trend"] = json{{"changepoints", model.changepoints.size()}};
    }
  }
  detail::write_json(dir / "forecast_metrics.json", metrics);
}

inline std::string render_report_markdown(const json& report);

inline json run_report(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  json report;
  auto load_or_missing = [&](const char* file) -> json {
    fs::path p = dir / file;
    if (!fs::exists(p)) return json{{"status", "missing"}, {"artifact", file}};
    return detail::read_json(p);
  };

  report["ingest"] = load_or_missing("ingest_report.json");
  json eda = json::object();
  eda["distributions"] = load_or_missing("distributions.json");
  eda["correlation"] = load_or_missing("correlation.json");
  if (fs::exists(dir / "monthly_counts.csv")) {
    eda["monthly_counts_file"] = "monthly_counts.csv";
  } else {
    eda["monthly_counts_file"] = json{{"status", "missing"}};
  }
  report["eda"] = eda;
  report["tests"] = load_or_missing("tests.json");
  report["outliers"] = load_or_missing("outliers.json");
  json model_metrics = json::object();
  model_metrics["before"] = load_or_missing("metrics_before.json");
  model_metrics["after"] = load_or_missing("metrics_after.json");
  report["model_metrics"] = model_metrics;
  if (fs::exists(dir / "importance.csv")) {
    // re-embed the table for the single-file report
    json imp = json::array();
    auto table = csv::parse_with_header(fsio::read_file((dir / "importance.csv").string()));
    for (const auto& row : table.rows) {
      if (row.size() >= 2) {
        imp.push_back(json{{"feature", row[0]},
                           {"mean_abs_shap", strutil::parse_double(row[1]).value_or(0.0)}});
      }
    }
    report["importance"] = imp;
  } else {
    report["importance"] = json{{"status", "missing"}};
  }
  json forecasts = json::array();
  for (const char* file : {"arima_forecast.csv", "trend_forecast.csv"}) {
    fs::path p = dir / file;
    if (!fs::exists(p)) {
      forecasts.push_back(json{{"status", "missing"}, {"artifact", file}});
      continue;
    }
    auto table = csv::parse_with_header(fsio::read_file(p.string()));
    json rows = json::array();
    for (const auto& row : table.rows) {
      rows.push_back(json{{"label", row[0]},
                          {"point", strutil::parse_double(row[1]).value_or(0.0)},
                          {"lower", strutil::parse_double(row[2]).value_or(0.0)},
                          {"upper", strutil::parse_double(row[3]).value_or(0.0)}});
    }
    forecasts.push_back(json{{"source", file}, {"rows", rows}});
  }
  report["forecasts"] = forecasts;
  report["forecast_diagnostics"] = load_or_missing("forecast_metrics.json");
  report["provenance"] = json{{"seed", cfg.seed},
                              {"config_hash", cfg.hash()},
                              {"artifact_version", kArtifactVersion}};
  detail::write_json(dir / "report.json", report);
  fsio::write_file((dir / "report.md").string(), render_report_markdown(report));
  return report;
}

inline std::string render_report_markdown(const json& report) {
  std::string md = "# Pipeline report\n\n";
  auto fmt = [](const json& v) -> std::string {
    if (v.is_number_float()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", v.get<double>());
      return buf;
    }
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "Yes" : "No";
    return v.dump();
  };
  auto missing = [](const json& s) {
    return s.is_object() && s.contains("status") && s.at("status") == "missing";
  };

  const json& ing = report.at("ingest");
  md += "## Ingest\n\n";
  if (missing(ing)) {
    md += "_missing_\n\n";
  } else {
    md += "| Input rows | Retained | |\n|---|---|---|\n";
    md += "| " + fmt(ing.value("input_count", json(0))) + " | " +
          fmt(ing.value("retained_count", json(0))) + " | |\n\n";
    if (ing.contains("dropped")) {
      md += "| Drop reason | Count |\n|---|---|\n";
      for (const auto& [reason, count] : ing.at("dropped").items()) {
        md += "| " + reason + " | " + fmt(count) + " |\n";
      }
      md += "\n";
    }
  }

  md += "## Association tests\n\n";
  const json& tests = report.at("tests");
  if (tests.is_array()) {
    md += "| Test | Statistic | p-value | Significant |\n|---|---|---|---|\n";
    for (const auto& t : tests) {
      if (t.contains("status")) continue;
      md += "| " + fmt(t.value("method", json("?"))) + " (" +
            fmt(t.value("grouping", json("-"))) + ") | " +
            fmt(t.value("statistic", json(0.0))) + " | " +
            fmt(t.value("p_value", json(1.0))) + " | " +
            fmt(t.value("significant", json(false))) + " |\n";
    }
    md += "\n";
  } else {
    md += "_missing_\n\n";
  }

  md += "## Model comparison\n\n";
  const json& mm = report.at("model_metrics");
  if (!missing(mm.at("before")) && !missing(mm.at("after"))) {
    md += "| Model | Accuracy (Before) | F1 Score (Before) | ROC AUC (Before) | "
          "Accuracy (After) | F1 Score (After) | ROC AUC (After) |\n"
          "|---|---|---|---|---|---|---|\n";
    for (const auto& [name, before] : mm.at("before").items()) {
      if (!mm.at("after").contains(name)) continue;
      const json& after = mm.at("after").at(name);
      md += "| " + name + " | " + fmt(before.value("accuracy", json(0.0))) + " | " +
            fmt(before.value("f1", json(0.0))) + " | " +
            fmt(before.value("roc_auc", json(0.0))) + " | " +
            fmt(after.value("accuracy", json(0.0))) + " | " +
            fmt(after.value("f1", json(0.0))) + " | " +
            fmt(after.value("roc_auc", json(0.0))) + " |\n";
    }
    md += "\n";
  } else {
    md += "_missing_\n\n";
  }

  md += "## Feature importance\n\n";
  const json& imp = report.at("importance");
  if (imp.is_array()) {
    md += "| Feature | Mean abs SHAP |\n|---|---|\n";
    for (const auto& row : imp) {
      md += "| " + fmt(row.value("feature", json("?"))) + " | " +
            fmt(row.value("mean_abs_shap", json(0.0))) + " |\n";
    }
    md += "\n";
  } else {
    md += "_missing_\n\n";
  }

  md += "## Forecast diagnostics\n\n";
  const json& diag = report.value("forecast_diagnostics", json::object());
  if (!missing(diag) && (diag.contains("arima") || diag.contains("trend"))) {
    md += "| Model | Order / Changepoints | AIC | RMSE | MAE | Normalized MAE |\n"
          "|---|---|---|---|---|---|\n";
    if (diag.contains("arima")) {
      const json& a = diag.at("arima");
      std::string order = "-";
      if (a.contains("order")) {
        order = "(" + fmt(a.at("order").value("p", json(0))) + "," +
                fmt(a.at("order").value("d", json(0))) + "," +
                fmt(a.at("order").value("q", json(0))) + ")";
      }
      md += "| arima | " + order + " | " + fmt(a.value("aic", json("-"))) + " | " +
            fmt(a.value("rmse", json("-"))) + " | " + fmt(a.value("mae", json("-"))) +
            " | " + fmt(a.value("normalized_mae", json("-"))) + " |\n";
    }
    if (diag.contains("trend")) {
      const json& t = diag.at("trend");
      md += "| trend | " + fmt(t.value("changepoints", json("-"))) + " | - | " +
            fmt(t.value("rmse", json("-"))) + " | " + fmt(t.value("mae", json("-"))) +
            " | " + fmt(t.value("normalized_mae", json("-"))) + " |\n";
    }
    md += "\n";
  } else {
    md += "_missing_\n\n";
  }

  md += "## Forecasts\n\n";
  for (const json& fc : report.at("forecasts")) {
    if (fc.contains("status")) {
      md += "_" + fmt(fc.value("artifact", json("forecast"))) + ": missing_\n\n";
      continue;
    }
    md += "### " + fmt(fc.value("source", json("forecast"))) + "\n\n";
    md += "| Year | Forecast | Lower Bound | Upper Bound |\n|---|---|---|---|\n";
    for (const auto& row : fc.at("rows")) {
      md += "| " + fmt(row.value("label", json("?"))) + " | " +
            fmt(row.value("point", json(0.0))) + " | " +
            fmt(row.value("lower", json(0.0))) + " | " +
            fmt(row.value("upper", json(0.0))) + " |\n";
    }
    md += "\n";
  }

  const json& prov = report.at("provenance");
  md += "## Provenance\n\n";
  md += "- seed: " + fmt(prov.at("seed")) + "\n";
  md += "- config hash: " + fmt(prov.at("config_hash")) + "\n";
  md += "- artifact version: " + fmt(prov.at("artifact_version")) + "\n";
  return md;
}

// Minimal structural check against the shipped schema description.
inline bool validate_report(const json& report, const json& schema, std::string* error = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (error) *error = msg;
    return false;
  };
  if (!schema.contains("required")) return fail("schema lacks required map");
  for (const auto& [key, type] : schema.at("required").items()) {
    if (!report.contains(key)) return fail("missing section: " + key);
    const json& section = report.at(key);
    bool missing_marker = section.is_object() && section.contains("status") &&
                          section.at("status") == "missing";
    if (key == "provenance" && missing_marker) return fail("provenance may not be missing");
    if (missing_marker) continue;
    std::string t = type.get<std::string>();
    if (t == "object" && !section.is_object()) return fail(key + " must be an object");
    if (t == "array" && !section.is_array()) return fail(key + " must be an array");
  }
  return true;
}

}  // namespace breachlens::pipeline

#endif  // BREACHLENS_PIPELINE_HPP
