#ifndef BREACHLENS_INGEST_HPP
#define BREACHLENS_INGEST_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/csv.hpp"

namespace breachlens::ingest {

using nlohmann::json;

// One source row, values verbatim. An absent cell and an empty cell are both
// represented as "no value" (empty CSV cells round-trip ambiguously anyway).
struct RawRecord {
  std::map<std::string, std::optional<std::string>> columns;
};

enum class Format { csv, jsonl };

inline Format parse_format(std::string_view tag) {
  if (tag == "csv") return Format::csv;
  if (tag == "jsonl" || tag == "json-lines") return Format::jsonl;
  throw config_error("unknown input format: " + std::string(tag));
}

inline std::vector<RawRecord> parse_dataset(std::string_view text, Format format) {
  std::vector<RawRecord> out;
  if (format == Format::csv) {
    csv::Table t = csv::parse_with_header(text);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& cells = t.rows[r];
      bool blank = true;
      for (const auto& c : cells) {
        if (!c.empty()) blank = false;
      }
      if (blank) continue;  // pandas-style exports may carry blank lines
      if (cells.size() > t.header.size()) {
        throw parse_error("row " + std::to_string(r + 2) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(t.header.size()),
                          r + 2);
      }
      RawRecord rec;
      for (std::size_t c = 0; c < t.header.size(); ++c) {
        std::optional<std::string> v;
        if (c < cells.size() && !cells[c].empty()) v = cells[c];
        rec.columns[t.header[c]] = std::move(v);
      }
      out.push_back(std::move(rec));
    }
    return out;
  }
  // JSON-lines: one object per non-blank line.
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    std::string trimmed = strutil::trim(line);
    if (!trimmed.empty()) {
      json j = json::parse(trimmed, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw parse_error("line " + std::to_string(line_no) + " is not a JSON object",
                          line_no);
      }
      RawRecord rec;
      for (auto& [key, val] : j.items()) {
        std::optional<std::string> v;
        if (val.is_null()) {
          v = std::nullopt;
        } else if (val.is_string()) {
          std::string s = val.get<std::string>();
          if (!s.empty()) v = std::move(s);
        } else {
          v = val.dump();
        }
        rec.columns[key] = std::move(v);
      }
      out.push_back(std::move(rec));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

// Absent, empty, or a literal "nan"/"NaN" (pandas CSV round-trips) become "";
// otherwise trim and strip leading zeros.
inline std::string normalize_industry_code(const std::optional<std::string>& code) {
  if (!code) return "";
  std::string s = strutil::trim(*code);
  if (s.empty() || s == "nan" || s == "NaN" || s == "NAN") return "";
  std::size_t i = 0;
  while (i < s.size() && s[i] == '0') ++i;
  return s.substr(i);
}

struct IncidentRecord {
  std::string incident_id;
  std::string summary;
  std::string industry;  // normalized: no leading zeros, no whitespace
  std::string victim_id;
  std::string country;
  std::string state;
  std::string country_code;
  std::string region_group;
  std::string victim_sector;
  std::string actor_external;
  std::string actor_internal;
  std::string action;
  std::string confidentiality;
  std::string integrity;
  int year = 0;
  int incident_month = -1;    // -1 = missing placeholder
  int incident_quarter = -1;  // -1 = missing placeholder
  std::string reference_date;
  // Columns outside the fixed schema, kept for in-memory enrichment steps.
  std::map<std::string, std::string> passthrough;
};

struct ImputeOutcome {
  std::vector<IncidentRecord> records;
  std::size_t dropped_missing_action = 0;
  std::size_t dropped_missing_year = 0;
};

namespace detail {

inline std::string field_or(const RawRecord& r, const std::string& key,
                            const std::string& fallback) {
  auto it = r.columns.find(key);
  if (it == r.columns.end() || !it->second) return fallback;
  return *it->second;
}

inline std::optional<std::string> field(const RawRecord& r, const std::string& key) {
  auto it = r.columns.find(key);
  if (it == r.columns.end()) return std::nullopt;
  return it->second;
}

inline int int_field_or(const RawRecord& r, const std::string& key, int fallback) {
  auto v = field(r, key);
  if (!v) return fallback;
  auto n = strutil::parse_int(*v);
  return n ? static_cast<int>(*n) : fallback;
}

}  // namespace detail

inline const std::vector<std::string>& schema_columns() {
  static const std::vector<std::string> cols = {
      "incident_id",   "summary",        "industry",       "victim_id",
      "country",       "state",          "country_code",   "region_group",
      "victim_sector", "actor_external", "actor_internal", "action",
      "confidentiality", "integrity",    "year",           "incident_month",
      "incident_quarter", "reference_date"};
  return cols;
}

// Fill every absent field with its placeholder; a record survives unless it
// lacks action or year. The one silent normalization is the industry code.
inline ImputeOutcome impute(const std::vector<RawRecord>& raw) {
  ImputeOutcome out;
  for (const auto& r : raw) {
    auto action = detail::field(r, "action");
    auto year = detail::field(r, "year");
    bool has_action = action && !strutil::trim(*action).empty();
    std::optional<long long> year_val;
    if (year) year_val = strutil::parse_int(*year);
    if (!has_action) {
      ++out.dropped_missing_action;
      continue;
    }
    if (!year_val) {
      ++out.dropped_missing_year;
      continue;
    }
    IncidentRecord rec;
    rec.incident_id = detail::field_or(r, "incident_id", "Unknown");
    rec.summary = detail::field_or(r, "summary", "No summary available");
    rec.industry = normalize_industry_code(detail::field(r, "industry"));
    rec.victim_id = detail::field_or(r, "victim_id", "Unknown");
    rec.country = detail::field_or(r, "country", "Unknown");
    rec.state = detail::field_or(r, "state", "Unknown");
    rec.country_code = detail::field_or(r, "country_code", "Unknown");
    rec.region_group = detail::field_or(r, "region_group", "Unknown");
    rec.victim_sector = detail::field_or(r, "victim_sector", "Unknown");
    rec.actor_external = detail::field_or(r, "actor_external", "Unknown");
    rec.actor_internal = detail::field_or(r, "actor_internal", "Unknown");
    rec.action = *action;
    rec.confidentiality = detail::field_or(r, "confidentiality", "Unknown");
    rec.integrity = detail::field_or(r, "integrity", "Unknown");
    rec.year = static_cast<int>(*year_val);
    rec.incident_month = detail::int_field_or(r, "incident_month", -1);
    if (rec.incident_month < 1 || rec.incident_month > 12) rec.incident_month = -1;
    rec.incident_quarter = detail::int_field_or(r, "incident_quarter", -1);
    if (rec.incident_quarter < 1 || rec.incident_quarter > 4) rec.incident_quarter = -1;
    rec.reference_date = detail::field_or(r, "reference_date", "Unknown");
    for (const auto& [key, val] : r.columns) {
      static const auto& known = schema_columns();
      if (std::find(known.begin(), known.end(), key) != known.end()) continue;
      std::string fallback = "Unknown";
      if (key == "reference") fallback = "Not available";
      if (key == "incident_month_name") fallback = "Unknown";
      rec.passthrough[key] = val.value_or(fallback);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

// Re-imputing an already-built record: used by tests for the idempotence
// property and by JSONL round trips.
inline IncidentRecord impute_record(IncidentRecord rec) {
  auto fix = [](std::string& s, const char* fallback) {
    if (s.empty()) s = fallback;
  };
  fix(rec.incident_id, "Unknown");
  fix(rec.summary, "No summary available");
  rec.industry = normalize_industry_code(rec.industry.empty()
                                             ? std::optional<std::string>()
                                             : std::optional<std::string>(rec.industry));
  fix(rec.victim_id, "Unknown");
  fix(rec.country, "Unknown");
  fix(rec.state, "Unknown");
  fix(rec.country_code, "Unknown");
  fix(rec.region_group, "Unknown");
  fix(rec.victim_sector, "Unknown");
  fix(rec.actor_external, "Unknown");
  fix(rec.actor_internal, "Unknown");
  fix(rec.confidentiality, "Unknown");
  fix(rec.integrity, "Unknown");
  fix(rec.reference_date, "Unknown");
  if (rec.incident_month < 1 || rec.incident_month > 12) rec.incident_month = -1;
  if (rec.incident_quarter < 1 || rec.incident_quarter > 4) rec.incident_quarter = -1;
  return rec;
}

// Retail / e-commerce NAICS prefixes used to flag relevant industries.
inline const std::vector<std::string>& default_ecommerce_prefixes() {
  static const std::vector<std::string> prefixes = {
      "44",  "441", "442", "443", "4431", "444", "445",    "446",    "447",
      "448", "451", "452", "453", "454",  "4541", "45411", "454110", "454112",
      "454113", "48", "49", "51", "518",  "5191", "51913", "519130", "519190",
      "541", "5415", "54151", "541511", "541512"};
  return prefixes;
}

inline const std::map<std::string, std::string>& default_ecommerce_codes() {
  static const std::map<std::string, std::string> codes = {
      {"454110", "Electronic Shopping"},
      {"454112", "Electronic Auctions"},
      {"454113", "Mail-Order Houses"},
      {"443142", "Electronics Stores"},
      {"4541", "General E-Commerce"},
      {"519130", "Internet Publishing & Platforms"},
      {"541511", "Web App Development"},
      {"541512", "System Design for E-Commerce"},
      {"518210", "Cloud & Hosting Services"},
      {"519190", "Other Info Services"}};
  return codes;
}

// Free-text signals of e-commerce relevance, scanned over victim_id and
// summary. Overridable; these are the shipped defaults.
inline const std::vector<std::string>& default_ecommerce_keywords() {
  static const std::vector<std::string> kw = {
      "retail", "checkout", "shop", "e-commerce", "ecommerce",
      "online store", "marketplace", "online retailer"};
  return kw;
}

struct EcommerceLabel {
  bool prefix_match = false;
  std::optional<std::string> exact_code_name;
  bool keyword_flag = false;
  bool retained = false;
};

inline EcommerceLabel classify_ecommerce(
    const IncidentRecord& rec,
    const std::vector<std::string>& prefixes = default_ecommerce_prefixes(),
    const std::map<std::string, std::string>& exact_codes = default_ecommerce_codes(),
    const std::vector<std::string>& keywords = default_ecommerce_keywords()) {
  EcommerceLabel label;
  const std::string& code = rec.industry;
  if (!code.empty()) {
    for (const auto& p : prefixes) {
      if (code.rfind(p, 0) == 0) {
        label.prefix_match = true;
        break;
      }
    }
    if (auto it = exact_codes.find(code); it != exact_codes.end()) {
      label.exact_code_name = it->second;
    }
  }
  std::string haystack = strutil::normalize_text(rec.victim_id + " " + rec.summary);
  for (const auto& kw : keywords) {
    if (strutil::contains_ci(haystack, kw)) {
      label.keyword_flag = true;
      break;
    }
  }
  label.retained = label.prefix_match || label.keyword_flag;
  return label;
}

struct IngestReport {
  std::size_t input_count = 0;
  std::size_t retained_count = 0;
  std::map<std::string, std::size_t> dropped;

  json to_json() const {
    json j;
    j["input_count"] = input_count;
    j["retained_count"] = retained_count;
    j["dropped"] = json::object();
    for (const auto& [reason, n] : dropped) j["dropped"][reason] = n;
    return j;
  }
};

struct FilterOutcome {
  std::vector<IncidentRecord> records;
  IngestReport report;
};

inline FilterOutcome filter_ecommerce(
    const std::vector<IncidentRecord>& records,
    const std::vector<std::string>& prefixes = default_ecommerce_prefixes(),
    const std::map<std::string, std::string>& exact_codes = default_ecommerce_codes(),
    const std::vector<std::string>& keywords = default_ecommerce_keywords()) {
  FilterOutcome out;
  out.report.input_count = records.size();
  for (const auto& rec : records) {
    EcommerceLabel label = classify_ecommerce(rec, prefixes, exact_codes, keywords);
    if (label.retained) {
      out.records.push_back(rec);
    } else {
      ++out.report.dropped["not_ecommerce"];
    }
  }
  out.report.retained_count = out.records.size();
  return out;
}

inline json record_to_json(const IncidentRecord& r) {
  json j;
  j["incident_id"] = r.incident_id;
  j["summary"] = r.summary;
  j["industry"] = r.industry;
  j["victim_id"] = r.victim_id;
  j["country"] = r.country;
  j["state"] = r.state;
  j["country_code"] = r.country_code;
  j["region_group"] = r.region_group;
  j["victim_sector"] = r.victim_sector;
  j["actor_external"] = r.actor_external;
  j["actor_internal"] = r.actor_internal;
  j["action"] = r.action;
  j["confidentiality"] = r.confidentiality;
  j["integrity"] = r.integrity;
  j["year"] = r.year;
  j["incident_month"] = r.incident_month;
  j["incident_quarter"] = r.incident_quarter;
  j["reference_date"] = r.reference_date;
  return j;
}

inline IncidentRecord record_from_json(const json& j) {
  IncidentRecord r;
  r.incident_id = j.value("incident_id", "Unknown");
  r.summary = j.value("summary", "No summary available");
  r.industry = j.value("industry", "");
  r.victim_id = j.value("victim_id", "Unknown");
  r.country = j.value("country", "Unknown");
  r.state = j.value("state", "Unknown");
  r.country_code = j.value("country_code", "Unknown");
  r.region_group = j.value("region_group", "Unknown");
  r.victim_sector = j.value("victim_sector", "Unknown");
  r.actor_external = j.value("actor_external", "Unknown");
  r.actor_internal = j.value("actor_internal", "Unknown");
  r.action = j.value("action", "");
  r.confidentiality = j.value("confidentiality", "Unknown");
  r.integrity = j.value("integrity", "Unknown");
  r.year = j.value("year", 0);
  r.incident_month = j.value("incident_month", -1);
  r.incident_quarter = j.value("incident_quarter", -1);
  r.reference_date = j.value("reference_date", "Unknown");
  return r;
}

inline std::string records_to_jsonl(const std::vector<IncidentRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += "\n";
  }
  return out;
}

inline std::vector<IncidentRecord> records_from_jsonl(std::string_view text) {
  std::vector<IncidentRecord> out;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    std::string trimmed = strutil::trim(line);
    if (!trimmed.empty()) {
      json j = json::parse(trimmed, nullptr, false);
      if (j.is_discarded()) throw parse_error("bad JSONL line " + std::to_string(line_no), line_no);
      out.push_back(record_from_json(j));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace breachlens::ingest

#endif  // BREACHLENS_INGEST_HPP
