#include <doctest.h>

#include "breachlens/ingest.hpp"

using namespace breachlens;
using namespace breachlens::ingest;

TEST_CASE("csv parse: empty cell is absent") {
  auto recs = parse_dataset("a,b\n1,\n", Format::csv);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].columns.at("a") == std::optional<std::string>("1"));
  CHECK(!recs[0].columns.at("b").has_value());
}

TEST_CASE("csv parse: row count preserved") {
  auto recs = parse_dataset("a,b\n1,2\n3,4\n5,6\n", Format::csv);
  CHECK(recs.size() == 3);
}

TEST_CASE("csv parse: blank lines are skipped") {
  auto recs = parse_dataset("a,b\n1,2\n\n3,4\n\n", Format::csv);
  CHECK(recs.size() == 2);
}

TEST_CASE("csv parse: rfc4180 quoting") {
  auto recs = parse_dataset("a,b\n\"x,\"\"y\"\"\",\"line\nbreak\"\n", Format::csv);
  REQUIRE(recs.size() == 1);
  CHECK(*recs[0].columns.at("a") == "x,\"y\"");
  CHECK(*recs[0].columns.at("b") == "line\nbreak");
}

TEST_CASE("csv parse: over-wide row reports its row number") {
  try {
    parse_dataset("a,b\n1,2,3\n", Format::csv);
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.row() == 2);
  }
}

TEST_CASE("jsonl parse matches a hand-written reference of the fixture") {
  const char* text =
      "{\"a\": \"1\", \"b\": null}\n"
      "{\"a\": \"x\", \"b\": \"y\"}\n";
  auto recs = parse_dataset(text, Format::jsonl);
  // reference parse, written out by hand
  REQUIRE(recs.size() == 2);
  CHECK(*recs[0].columns.at("a") == "1");
  CHECK(!recs[0].columns.at("b").has_value());
  CHECK(*recs[1].columns.at("a") == "x");
  CHECK(*recs[1].columns.at("b") == "y");
  CHECK(recs[0].columns.size() == recs[1].columns.size());
}

TEST_CASE("unknown format tag is a configuration error") {
  CHECK_THROWS_AS(parse_format("parquet"), config_error);
}

TEST_CASE("normalize_industry_code") {
  CHECK(normalize_industry_code(std::nullopt) == "");
  CHECK(normalize_industry_code(std::optional<std::string>("0044")) == "44");
  CHECK(normalize_industry_code(std::optional<std::string>(" 454110 ")) == "454110");
  CHECK(normalize_industry_code(std::optional<std::string>("nan")) == "");
  CHECK(normalize_industry_code(std::optional<std::string>("")) == "");
  // idempotent, never lengthens
  for (const char* s : {"0001", "  77  ", "nan", "454110", "0"}) {
    std::string once = normalize_industry_code(std::optional<std::string>(s));
    std::string twice = normalize_industry_code(std::optional<std::string>(once));
    CHECK(once == twice);
    CHECK(once.size() <= std::string(s).size());
  }
}

namespace {

RawRecord minimal_raw(const char* action = "Hacking", const char* year = "2020") {
  RawRecord r;
  r.columns["action"] = std::string(action);
  r.columns["year"] = std::string(year);
  return r;
}

}  // namespace

TEST_CASE("impute fills placeholders") {
  RawRecord r = minimal_raw();
  r.columns["actor_internal"] = std::nullopt;
  r.columns["incident_month"] = std::nullopt;
  r.columns["summary"] = std::nullopt;
  auto out = impute({r});
  REQUIRE(out.records.size() == 1);
  const auto& rec = out.records[0];
  CHECK(rec.actor_internal == "Unknown");
  CHECK(rec.incident_month == -1);
  CHECK(rec.summary == "No summary available");
  CHECK(rec.reference_date == "Unknown");
  CHECK(rec.incident_quarter == -1);
}

TEST_CASE("impute drops only when action or year is missing") {
  RawRecord no_action;
  no_action.columns["year"] = std::string("2019");
  RawRecord no_year;
  no_year.columns["action"] = std::string("Malware");
  auto out = impute({minimal_raw(), no_action, no_year});
  CHECK(out.records.size() == 1);
  CHECK(out.dropped_missing_action == 1);
  CHECK(out.dropped_missing_year == 1);
}

TEST_CASE("impute is idempotent") {
  RawRecord r = minimal_raw();
  r.columns["state"] = std::nullopt;
  r.columns["industry"] = std::string("0044");
  auto once = impute({r}).records[0];
  auto twice = impute_record(once);
  CHECK(once.state == twice.state);
  CHECK(once.industry == twice.industry);
  CHECK(once.summary == twice.summary);
  CHECK(once.incident_month == twice.incident_month);
}

TEST_CASE("impute tolerates float-rendered years") {
  auto out = impute({minimal_raw("Hacking", "2016.0")});
  REQUIRE(out.records.size() == 1);
  CHECK(out.records[0].year == 2016);
}

TEST_CASE("impute fills passthrough columns by name") {
  RawRecord r = minimal_raw();
  r.columns["reference"] = std::nullopt;
  r.columns["incident_month_name"] = std::nullopt;
  r.columns["custom_field"] = std::nullopt;
  auto out = impute({r});
  REQUIRE(out.records.size() == 1);
  const auto& pt = out.records[0].passthrough;
  CHECK(pt.at("reference") == "Not available");
  CHECK(pt.at("incident_month_name") == "Unknown");
  CHECK(pt.at("custom_field") == "Unknown");
}

TEST_CASE("classify_ecommerce exact codes") {
  IncidentRecord rec;
  rec.industry = "454110";
  rec.summary = "nothing special";
  rec.victim_id = "Unknown";
  auto label = classify_ecommerce(rec);
  CHECK(label.prefix_match);
  REQUIRE(label.exact_code_name.has_value());
  CHECK(*label.exact_code_name == "Electronic Shopping");

  rec.industry = "541512";
  label = classify_ecommerce(rec);
  CHECK(*label.exact_code_name == "System Design for E-Commerce");
}

TEST_CASE("classify_ecommerce rejects unrelated records") {
  IncidentRecord rec;
  rec.industry = "999999";
  rec.summary = "no relevant terms";
  rec.victim_id = "Acme Corp";
  auto label = classify_ecommerce(rec);
  CHECK(!label.prefix_match);
  CHECK(!label.keyword_flag);
  CHECK(!label.retained);
}

TEST_CASE("classify_ecommerce keyword flag on summary text") {
  IncidentRecord rec;
  rec.industry = "999999";
  rec.summary = "fraud at online checkout";
  rec.victim_id = "Unknown";
  auto label = classify_ecommerce(rec);
  CHECK(label.keyword_flag);
  CHECK(label.retained);
  CHECK(!label.prefix_match);
}

TEST_CASE("filter_ecommerce keeps order, reports drops") {
  IncidentRecord a;
  a.industry = "4541";  // prefix and exact-code hit
  a.summary = "x";
  IncidentRecord b;
  b.industry = "999999";
  b.summary = "boring";
  b.victim_id = "Unknown";
  IncidentRecord c;
  c.industry = "999999";
  c.summary = "fraud at online checkout";
  auto out = filter_ecommerce({a, b, c});
  REQUIRE(out.records.size() == 2);
  CHECK(out.records[0].industry == "4541");
  CHECK(out.records[1].summary == "fraud at online checkout");
  CHECK(out.report.input_count == 3);
  CHECK(out.report.retained_count == 2);
  CHECK(out.report.dropped.at("not_ecommerce") == 1);

  auto empty = filter_ecommerce({});
  CHECK(empty.records.empty());
  CHECK(empty.report.input_count == 0);
}

TEST_CASE("retained-by-prefix implies a listed prefix on the normalized code") {
  // property: re-test every retained record against the prefix list
  std::vector<IncidentRecord> recs;
  const char* codes[] = {"445110", "0044", "541512", "812", "51913", "23", ""};
  for (const char* c : codes) {
    IncidentRecord r;
    r.industry = normalize_industry_code(std::optional<std::string>(c));
    r.summary = "n/a";
    r.victim_id = "n/a";
    recs.push_back(r);
  }
  for (const auto& r : recs) {
    auto label = classify_ecommerce(r);
    if (label.prefix_match) {
      bool starts = false;
      for (const auto& p : default_ecommerce_prefixes()) {
        if (r.industry.rfind(p, 0) == 0) starts = true;
      }
      CHECK(starts);
    }
  }
}

TEST_CASE("incident jsonl round trip") {
  RawRecord r = minimal_raw();
  r.columns["summary"] = std::string("Attackers used SQLi, then \"pivoted\".\nSecond line.");
  r.columns["industry"] = std::string("454110");
  auto recs = impute({r}).records;
  std::string jsonl = records_to_jsonl(recs);
  auto back = records_from_jsonl(jsonl);
  REQUIRE(back.size() == 1);
  CHECK(back[0].summary == recs[0].summary);
  CHECK(back[0].industry == recs[0].industry);
  CHECK(back[0].year == recs[0].year);
}
