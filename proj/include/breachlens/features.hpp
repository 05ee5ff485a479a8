#ifndef BREACHLENS_FEATURES_HPP
#define BREACHLENS_FEATURES_HPP

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/ingest.hpp"

namespace breachlens::features {

using nlohmann::json;

// Term lists driving the text-derived features. These ship as explicit,
// overridable data, never hidden constants; the defaults below are the
// versioned stand-ins bundled with the repo.
struct Lexicon {
  std::vector<std::string> threat_terms;
  std::map<std::string, int> risk_weights;
  std::vector<std::string> pii_terms;

  static Lexicon defaults() {
    Lexicon lx;
    lx.threat_terms = {"phishing", "ransomware", "malware",  "breach",
                       "exploit",  "credential", "ddos",     "injection",
                       "skimming", "botnet"};
    lx.risk_weights = {{"critical", 3}, {"severe", 2}, {"urgent", 2},
                       {"compromise", 1}, {"exposed", 1}};
    lx.pii_terms = {"ssn",         "social security", "passport", "email",
                    "credit card", "dob",             "address",  "medical"};
    return lx;
  }

  static Lexicon from_json(const json& j) {
    Lexicon lx;
    for (const auto& t : j.at("threat_terms")) lx.threat_terms.push_back(t.get<std::string>());
    for (const auto& [term, w] : j.at("risk_weights").items()) {
      int weight = w.get<int>();
      if (weight <= 0) throw config_error("risk weight must be positive: " + term);
      lx.risk_weights[term] = weight;
    }
    for (const auto& t : j.at("pii_terms")) lx.pii_terms.push_back(t.get<std::string>());
    return lx;
  }

  json to_json() const {
    json j;
    j["threat_terms"] = threat_terms;
    j["risk_weights"] = json::object();
    for (const auto& [term, w] : risk_weights) j["risk_weights"][term] = w;
    j["pii_terms"] = pii_terms;
    return j;
  }
};

enum class ActionType {
  hacking, malware, phishing, misuse, error, physical, unknown, social,
  enviro, tampering, privilege, spam, data_leak, theft, other
};

inline const char* to_string(ActionType t) {
  switch (t) {
    case ActionType::hacking: return "hacking";
    case ActionType::malware: return "malware";
    case ActionType::phishing: return "phishing";
    case ActionType::misuse: return "misuse";
    case ActionType::error: return "error";
    case ActionType::physical: return "physical";
    case ActionType::unknown: return "unknown";
    case ActionType::social: return "social";
    case ActionType::enviro: return "enviro";
    case ActionType::tampering: return "tampering";
    case ActionType::privilege: return "privilege";
    case ActionType::spam: return "spam";
    case ActionType::data_leak: return "data_leak";
    case ActionType::theft: return "theft";
    case ActionType::other: return "other";
  }
  return "other";
}

// Keyword groups evaluated in a fixed priority order; the first group with a
// substring hit wins. Order and contents are part of the contract: changing
// either reshuffles downstream class distributions.
inline ActionType classify_action_type(std::string_view action) {
  std::string a = strutil::to_lower(action);
  auto any = [&](std::initializer_list<const char*> kws) {
    for (const char* kw : kws)
      if (a.find(kw) != std::string::npos) return true;
    return false;
  };
  if (any({"hack", "brute", "sqli", "xss", "buffer", "overflow", "rfi",
           "os commanding", "session fixation", "session prediction",
           "reverse engineering", "path traversal", "exploit vuln",
           "exploit misconfig", "forced browsing", "ssi injection",
           "evade defenses", "dos"}))
    return ActionType::hacking;
  if (any({"malware", "ransomware", "virus"})) return ActionType::malware;
  if (any({"phish", "spoof", "url redirector"})) return ActionType::phishing;
  if (any({"misuse", "unauthorised", "abuse of functionality"})) return ActionType::misuse;
  if (any({"error", "misconfiguration"})) return ActionType::error;
  if (any({"physical", "device", "lost"})) return ActionType::physical;
  if (any({"unknown"})) return ActionType::unknown;
  if (any({"social", "engineer", "aitm"})) return ActionType::social;
  if (any({"enviro", "natural"})) return ActionType::enviro;
  if (any({"tamper", "modification"})) return ActionType::tampering;
  if (any({"privilege", "use of stolen creds"})) return ActionType::privilege;
  if (any({"spam", "junk"})) return ActionType::spam;
  if (any({"leak", "exfiltration"})) return ActionType::data_leak;
  if (any({"theft", "steal"})) return ActionType::theft;
  return ActionType::other;
}

namespace detail {

inline bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0;
}

// Occurrences of `term` in normalized `text`. Terms of length <= 3 must sit
// on token boundaries ("ssn" must not fire inside "classname"); longer terms
// match as plain substrings. Occurrences are non-overlapping, left to right.
inline int count_occurrences(std::string_view text, std::string_view term) {
  if (term.empty()) return 0;
  bool need_boundary = term.size() <= 3;
  int count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(term, pos)) != std::string_view::npos) {
    bool ok = true;
    if (need_boundary) {
      if (pos > 0 && is_word_char(text[pos - 1])) ok = false;
      std::size_t end = pos + term.size();
      if (end < text.size() && is_word_char(text[end])) ok = false;
    }
    if (ok) {
      ++count;
      pos += term.size();
    } else {
      ++pos;
    }
  }
  return count;
}

}  // namespace detail

struct KeywordCount {
  int count = 0;
  std::vector<std::string> matched;  // each distinct matched term once
};

// Term frequency over the threat lexicon: `count` sums occurrences with
// multiplicity, `matched` records the distinct terms that hit.
inline KeywordCount count_threat_keywords(std::string_view summary, const Lexicon& lexicon) {
  KeywordCount out;
  std::string text = strutil::normalize_text(summary);
  for (const auto& term : lexicon.threat_terms) {
    int n = detail::count_occurrences(text, term);
    if (n > 0) {
      out.count += n;
      out.matched.push_back(term);
    }
  }
  return out;
}

inline int score_risk_terms(std::string_view summary, const Lexicon& lexicon) {
  std::string text = strutil::normalize_text(summary);
  int score = 0;
  for (const auto& [term, weight] : lexicon.risk_weights) {
    score += weight * detail::count_occurrences(text, term);
  }
  return score;
}

inline bool detect_pii(std::string_view summary, const Lexicon& lexicon) {
  std::string text = strutil::normalize_text(summary);
  for (const auto& term : lexicon.pii_terms) {
    if (detail::count_occurrences(text, term) > 0) return true;
  }
  return false;
}

enum class Season { Winter, Spring, Summer, Autumn, Unknown };

inline const char* to_string(Season s) {
  switch (s) {
    case Season::Winter: return "Winter";
    case Season::Spring: return "Spring";
    case Season::Summer: return "Summer";
    case Season::Autumn: return "Autumn";
    case Season::Unknown: return "Unknown";
  }
  return "Unknown";
}

// Meteorological seasons; -1 (missing month) maps to Unknown.
inline Season season_of(int month) {
  if (month == -1) return Season::Unknown;
  switch (month) {
    case 12: case 1: case 2: return Season::Winter;
    case 3: case 4: case 5: return Season::Spring;
    case 6: case 7: case 8: return Season::Summer;
    case 9: case 10: case 11: return Season::Autumn;
    default:
      throw std::domain_error("season_of: month must be -1 or 1..12, got " +
                              std::to_string(month));
  }
}

inline const std::vector<int>& default_holiday_months() {
  static const std::vector<int> months = {6, 7, 11, 12};
  return months;
}

inline bool is_holiday_month(int month,
                             const std::vector<int>& holiday_months = default_holiday_months()) {
  if (month < -1 || month == 0 || month > 12)
    throw std::domain_error("is_holiday_month: month must be -1 or 1..12");
  return std::find(holiday_months.begin(), holiday_months.end(), month) !=
         holiday_months.end();
}

// Median with midpoint-of-middle-two for even length.
inline double median(std::vector<double> v) {
  if (v.empty()) throw std::domain_error("median: empty input");
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Strictly-above-median flags; a cohort-level operation.
inline std::vector<bool> flag_high_severity(const std::vector<int>& scores) {
  if (scores.empty()) throw std::domain_error("flag_high_severity: empty input");
  std::vector<double> d(scores.begin(), scores.end());
  double m = median(d);
  std::vector<bool> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > m;
  return out;
}

struct EngineeredIncident {
  ingest::IncidentRecord base;
  ActionType action_type = ActionType::other;
  int summary_length = 0;  // code points
  int keyword_count = 0;
  std::vector<std::string> matched_threat_keywords;
  int risk_terms_score = 0;
  int threat_enrichment_score = 0;
  int severity_score = 0;  // equal to threat_enrichment_score by construction
  bool contains_pii_terms = false;
  Season season = Season::Unknown;
  bool is_holiday_month = false;
  bool high_severity = false;
};

inline std::vector<EngineeredIncident> engineer(
    const std::vector<ingest::IncidentRecord>& records, const Lexicon& lexicon,
    const std::vector<int>& holiday_months = default_holiday_months()) {
  std::vector<EngineeredIncident> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    EngineeredIncident e;
    e.base = rec;
    e.action_type = classify_action_type(rec.action);
    e.summary_length = static_cast<int>(strutil::utf8_length(rec.summary));
    KeywordCount kc = count_threat_keywords(rec.summary, lexicon);
    e.keyword_count = kc.count;
    e.matched_threat_keywords = std::move(kc.matched);
    e.risk_terms_score = score_risk_terms(rec.summary, lexicon);
    e.threat_enrichment_score = e.keyword_count + e.risk_terms_score;
    e.severity_score = e.threat_enrichment_score;
    e.contains_pii_terms = detect_pii(rec.summary, lexicon);
    e.season = season_of(rec.incident_month);
    e.is_holiday_month = features::is_holiday_month(rec.incident_month, holiday_months);
    out.push_back(std::move(e));
  }
  if (!out.empty()) {
    std::vector<int> severities;
    severities.reserve(out.size());
    for (const auto& e : out) severities.push_back(e.severity_score);
    std::vector<bool> flags = flag_high_severity(severities);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].high_severity = flags[i];
  }
  return out;
}

inline json engineered_to_json(const EngineeredIncident& e) {
  json j = ingest::record_to_json(e.base);
  j["action_type"] = to_string(e.action_type);
  j["summary_length"] = e.summary_length;
  j["keyword_count"] = e.keyword_count;
  j["matched_threat_keywords"] = e.matched_threat_keywords;
  j["risk_terms_score"] = e.risk_terms_score;
  j["threat_enrichment_score"] = e.threat_enrichment_score;
  j["severity_score"] = e.severity_score;
  j["contains_pii_terms"] = e.contains_pii_terms;
  j["season"] = to_string(e.season);
  j["is_holiday_month"] = e.is_holiday_month;
  j["high_severity"] = e.high_severity;
  return j;
}

inline EngineeredIncident engineered_from_json(const json& j) {
  EngineeredIncident e;
  e.base = ingest::record_from_json(j);
  std::string at = j.value("action_type", "other");
  for (int k = 0; k <= static_cast<int>(ActionType::other); ++k) {
    if (at == to_string(static_cast<ActionType>(k))) {
      e.action_type = static_cast<ActionType>(k);
      break;
    }
  }
  e.summary_length = j.value("summary_length", 0);
  e.keyword_count = j.value("keyword_count", 0);
  if (j.contains("matched_threat_keywords")) {
    for (const auto& t : j["matched_threat_keywords"])
      e.matched_threat_keywords.push_back(t.get<std::string>());
  }
  e.risk_terms_score = j.value("risk_terms_score", 0);
  e.threat_enrichment_score = j.value("threat_enrichment_score", 0);
  e.severity_score = j.value("severity_score", 0);
  e.contains_pii_terms = j.value("contains_pii_terms", false);
  std::string season = j.value("season", "Unknown");
  for (int k = 0; k <= static_cast<int>(Season::Unknown); ++k) {
    if (season == to_string(static_cast<Season>(k))) {
      e.season = static_cast<Season>(k);
      break;
    }
  }
  e.is_holiday_month = j.value("is_holiday_month", false);
  e.high_severity = j.value("high_severity", false);
  return e;
}

inline std::string engineered_to_jsonl(const std::vector<EngineeredIncident>& v) {
  std::string out;
  for (const auto& e : v) {
    out += engineered_to_json(e).dump();
    out += "\n";
  }
  return out;
}

inline std::vector<EngineeredIncident> engineered_from_jsonl(std::string_view text) {
  std::vector<EngineeredIncident> out;
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
      out.push_back(engineered_from_json(j));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace breachlens::features

#endif  // BREACHLENS_FEATURES_HPP
