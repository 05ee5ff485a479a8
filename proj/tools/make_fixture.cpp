// Regenerates the synthetic incident fixtures under data/fixtures. The
// fixtures are committed; rerun this only when the generation recipe
// changes, then refresh the manifest expectations it prints.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/csv.hpp"
#include "breachlens/features.hpp"
#include "breachlens/ingest.hpp"
#include "breachlens/prng.hpp"

using nlohmann::json;
using namespace breachlens;

namespace {

struct Row {
  std::map<std::string, std::string> cells;  // empty string = absent cell
};

const std::vector<std::string> kColumns = {
    "incident_id", "summary", "industry", "victim_id", "country", "state",
    "country_code", "region_group", "victim_sector", "actor_external",
    "actor_internal", "action", "confidentiality", "integrity", "year",
    "incident_month", "incident_quarter", "reference_date", "reference"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& pool) {
  return pool[static_cast<std::size_t>(rng.uniform_int(pool.size()))];
}

std::string make_summary(Rng& rng, bool pii, bool severe) {
  static const std::vector<std::string> openers = {
      "Attackers accessed the storefront database",
      "An online retailer reported unauthorized activity",
      "The checkout service was probed for weaknesses",
      "A marketplace vendor account was taken over",
      "Routine audit uncovered anomalous transfers",
      "The web platform suffered an intrusion",
      "Staff noticed unusual logins to the admin portal"};
  static const std::vector<std::string> threat_bits = {
      "following a phishing lure sent to staff",
      "after a ransomware payload was staged",
      "through a SQL injection flaw",
      "using stolen credential pairs",
      "via a botnet-driven ddos distraction",
      "after malware was planted on a kiosk",
      "through a card skimming implant",
      "by exploiting an unpatched exploit chain"};
  static const std::vector<std::string> pii_bits = {
      "Customer email addresses were exposed in the dump.",
      "Records containing SSN fields were copied.",
      "Credit card numbers and address data were exfiltrated.",
      "Passport scans stored for verification leaked.",
      "The stolen table held dob and address columns."};
  static const std::vector<std::string> severity_bits = {
      "Response teams flagged the incident as critical.",
      "An urgent takedown was requested by the severe incident desk.",
      "Forensics confirmed the compromise was contained within hours.",
      "Systems were exposed for several days before detection."};
  static const std::vector<std::string> closers = {
      "Law enforcement was notified.", "A vendor patch is pending.",
      "The incident remains under review.", "Customers were advised to rotate passwords.",
      ""};

  std::string s = pick(rng, openers);
  int n_threat = severe ? 1 + static_cast<int>(rng.uniform_int(3))
                        : static_cast<int>(rng.uniform_int(3));
  for (int i = 0; i < n_threat; ++i) s += " " + pick(rng, threat_bits);
  s += ".";
  if (pii) {
    s += " " + pick(rng, pii_bits);
    if (rng.uniform() < 0.5) s += " " + pick(rng, severity_bits);
  } else if (severe) {
    s += " " + pick(rng, severity_bits);
    if (rng.uniform() < 0.4) s += " " + pick(rng, threat_bits) + " was confirmed later.";
  }
  std::string closer = pick(rng, closers);
  if (!closer.empty()) s += " " + closer;
  return s;
}

std::vector<Row> make_rows(Rng& rng, std::size_t n, std::size_t drop_action,
                           std::size_t drop_year) {
  static const std::vector<std::string> ecom_industries = {
      "454110", "4541", "445110", "519130", "541512", "443142", "454113",
      "0454110", " 452210 ", "518210"};
  static const std::vector<std::string> other_industries = {"999999", "622110", "813910",
                                                            "236115"};
  static const std::vector<std::string> actions = {
      "hacking - sqli attack", "brute force of admin panel", "malware infection",
      "ransomware deployment", "phishing email campaign", "misuse of privileges",
      "error - misconfiguration", "physical theft of device", "unknown",
      "social engineering call", "tampering with records", "use of stolen creds",
      "data leak via exfiltration", "theft of backups", "spam relay abuse",
      "dos against storefront"};
  static const std::vector<std::string> actors_ext = {
      "Organized crime", "Activist", "Unaffiliated", "State-affiliated", "Former employee"};
  static const std::vector<std::string> sectors = {
      "Online payments", "Internet platform", "Retail IT", "Web app development",
      "Cloud services"};
  static const std::vector<std::string> countries = {"US", "GB", "DE", "CA", "AU", "NG"};
  static const std::vector<std::string> regions = {"019", "150", "009", "002"};
  static const std::vector<std::string> states = {"CA", "NY", "TX", "WA", "FL", "IL"};

  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Row row;
    bool pii = rng.uniform() < 0.105;
    bool severe = pii ? rng.uniform() < 0.75 : rng.uniform() < 0.2;
    bool ecom_industry = rng.uniform() < 0.76;
    bool keyword_only = !ecom_industry && rng.uniform() < 0.5;

    row.cells["incident_id"] = "inc-" + std::to_string(10000 + i);
    std::string summary = make_summary(rng, pii, severe);
    if (keyword_only) summary += " The retail checkout flow was implicated.";
    if (rng.uniform() < 0.03) summary.clear();  // exercise imputation
    row.cells["summary"] = summary;
    row.cells["industry"] = ecom_industry ? pick(rng, ecom_industries)
                                          : pick(rng, other_industries);
    row.cells["victim_id"] = rng.uniform() < 0.9
                                 ? "org-" + std::to_string(rng.uniform_int(120))
                                 : "";
    row.cells["country"] = pick(rng, countries);
    row.cells["state"] = rng.uniform() < 0.8 ? pick(rng, states) : "";
    row.cells["country_code"] = rng.uniform() < 0.9 ? pick(rng, countries) : "";
    row.cells["region_group"] = pick(rng, regions);
    row.cells["victim_sector"] = rng.uniform() < 0.92 ? pick(rng, sectors) : "";
    row.cells["actor_external"] = rng.uniform() < 0.7 ? pick(rng, actors_ext) : "";
    row.cells["actor_internal"] = rng.uniform() < 0.2 ? "Employee" : "";
    row.cells["action"] = pick(rng, actions);
    double conf_roll = rng.uniform();
    row.cells["confidentiality"] =
        conf_roll < 0.45 ? "Data disclosure" : (conf_roll < 0.85 ? "None" : "");
    row.cells["integrity"] = rng.uniform() < 0.6 ? "Alter behavior" : "";
    int year = 2005 + static_cast<int>(rng.uniform_int(19));  // 2005..2023
    row.cells["year"] = std::to_string(year) + (rng.uniform() < 0.25 ? ".0" : "");
    if (rng.uniform() < 0.08) {
      row.cells["incident_month"] = "";
      row.cells["incident_quarter"] = "";
    } else {
      int month = 1 + static_cast<int>(rng.uniform_int(12));
      row.cells["incident_month"] = std::to_string(month);
      row.cells["incident_quarter"] = std::to_string((month + 2) / 3);
    }
    row.cells["reference_date"] = rng.uniform() < 0.7
                                      ? std::to_string(year) + "-06-15"
                                      : "";
    row.cells["reference"] = rng.uniform() < 0.5 ? "public disclosure" : "";
    rows.push_back(std::move(row));
  }
  // punch out required fields in a few fixed rows
  for (std::size_t i = 0; i < drop_action && i < rows.size(); ++i) {
    rows[3 + 7 * i].cells["action"] = "";
  }
  for (std::size_t i = 0; i < drop_year && i < rows.size(); ++i) {
    rows[5 + 11 * i].cells["year"] = "";
  }
  return rows;
}

std::string to_csv(const std::vector<Row>& rows) {
  std::string out = csv::write_row(kColumns);
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& col : kColumns) cells.push_back(row.cells.at(col));
    out += csv::write_row(cells);
  }
  return out;
}

json describe(const std::string& csv_text, const std::string& name) {
  auto raw = ingest::parse_dataset(csv_text, ingest::Format::csv);
  auto imputed = ingest::impute(raw);
  auto filtered = ingest::filter_ecommerce(imputed.records);
  auto lexicon = features::Lexicon::defaults();
  auto engineered = features::engineer(filtered.records, lexicon);
  std::size_t pii = 0, missing_month = 0;
  std::map<int, std::size_t> by_year;
  for (const auto& e : engineered) {
    pii += e.contains_pii_terms;
    missing_month += e.base.incident_month == -1;
    by_year[e.base.year]++;
  }
  json j;
  j["file"] = name;
  j["rows"] = raw.size();
  j["after_impute"] = imputed.records.size();
  j["dropped_missing_action"] = imputed.dropped_missing_action;
  j["dropped_missing_year"] = imputed.dropped_missing_year;
  j["retained"] = filtered.records.size();
  j["pii_positive"] = pii;
  j["missing_month"] = missing_month;
  j["distinct_years"] = by_year.size();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  std::string out_dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(out_dir + "/fixtures");

  Rng rng_big(7);
  auto big = make_rows(rng_big, 400, 2, 1);
  std::string big_csv = to_csv(big);
  fsio::write_file(out_dir + "/fixtures/incidents_400.csv", big_csv);

  Rng rng_small(11);
  auto small = make_rows(rng_small, 20, 0, 0);
  std::string small_csv = to_csv(small);
  fsio::write_file(out_dir + "/fixtures/incidents_20.csv", small_csv);

  json manifest;
  manifest["incidents_400"] = describe(big_csv, "incidents_400.csv");
  manifest["incidents_20"] = describe(small_csv, "incidents_20.csv");
  fsio::write_file(out_dir + "/fixtures/manifest.json", manifest.dump(2) + "\n");

  json lexicon = features::Lexicon::defaults().to_json();
  lexicon["version"] = 1;
  fsio::write_file(out_dir + "/lexicon_default.json", lexicon.dump(2) + "\n");

  json config;
  config["input_path"] = "data/fixtures/incidents_400.csv";
  config["input_format"] = "csv";
  config["target"] = "contains_pii_terms";
  config["seed"] = 42;
  config["test_fraction"] = 0.2;
  config["cv_folds"] = 5;
  config["smote"] = true;
  config["model_presets"] = json::array({"logistic", "xgb-like", "lgbm-like"});
  config["forecast"] = json{{"train_end_year", 2020}, {"horizon", 3},
                            {"level", 0.95}, {"model", "both"}};
  config["output_dir"] = "out";
  fsio::write_file(out_dir + "/config_fixture.json", config.dump(2) + "\n");

  json mini = config;
  mini["input_path"] = "data/fixtures/incidents_20.csv";
  mini["forecast"]["train_end_year"] = 0;
  mini["forecast"]["model"] = "trend";
  fsio::write_file(out_dir + "/config_mini.json", mini.dump(2) + "\n");

  json missing = config;
  missing["input_path"] = "data/fixtures/does_not_exist.csv";
  fsio::write_file(out_dir + "/config_missing_input.json", missing.dump(2) + "\n");

  json schema;
  schema["required"] = json{{"ingest", "object"},   {"eda", "object"},
                            {"tests", "array"},     {"outliers", "array"},
                            {"model_metrics", "object"}, {"importance", "array"},
                            {"forecasts", "array"}, {"provenance", "object"}};
  fsio::write_file(out_dir + "/report_schema.json", schema.dump(2) + "\n");

  std::printf("%s\n", manifest.dump(2).c_str());
  return 0;
}
