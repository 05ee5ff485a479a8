#include <doctest.h>

#include <cmath>
#include <set>

#include "breachlens/resample.hpp"

using namespace breachlens;
using namespace breachlens::resample;

TEST_CASE("label_encode_fit: lexicographic codes") {
  auto m = label_encode_fit(std::vector<std::string>{"b", "a", "a"});
  REQUIRE(m.size() == 2);
  CHECK(m.at("a") == 0);
  CHECK(m.at("b") == 1);

  std::vector<std::optional<std::string>> absent{std::nullopt};
  auto m2 = label_encode_fit(absent);
  REQUIRE(m2.size() == 1);
  CHECK(m2.at("Unknown") == 0);

  auto m3 = label_encode_fit(std::vector<std::string>{"x", "x"});
  REQUIRE(m3.size() == 1);
  CHECK(m3.at("x") == 0);
}

TEST_CASE("label_encode_apply with Unknown fallback") {
  LabelMap m{{"Unknown", 2}, {"a", 0}, {"b", 1}};
  CHECK(label_encode_apply({"b", "a"}, m) == std::vector<int>{1, 0});
  CHECK(label_encode_apply({"z"}, m) == std::vector<int>{2});
  CHECK(label_encode_apply({}, m).empty());
}

TEST_CASE("label encode round trip for seen categories") {
  std::vector<std::string> col{"malware", "hacking", "phishing", "hacking"};
  auto m = label_encode_fit(col);
  LabelMap with_unknown = m;
  with_unknown["Unknown"] = static_cast<int>(m.size());
  auto codes = label_encode_apply(col, with_unknown);
  auto inv = label_decode_map(m);
  for (std::size_t i = 0; i < col.size(); ++i) {
    CHECK(inv.at(codes[i]) == col[i]);
  }
}

TEST_CASE("EncoderState always carries Unknown") {
  EncoderState enc;
  enc.fit_label("action", {"b", "a"});
  const auto& m = enc.label_maps.at("action");
  CHECK(m.at("a") == 0);
  CHECK(m.at("b") == 1);
  CHECK(m.at("Unknown") == 2);  // appended, observed codes untouched
  std::set<int> codes;
  for (const auto& [cat, v] : m) codes.insert(v);
  CHECK(codes == std::set<int>{0, 1, 2});
}

TEST_CASE("minmax scaling") {
  auto p = minmax_fit({0, 5, 10});
  CHECK(minmax_apply({0, 5, 10}, p) == std::vector<double>{0, 0.5, 1});
  auto pc = minmax_fit({7, 7});
  CHECK(minmax_apply({7, 7}, pc) == std::vector<double>{0, 0});
  auto p2 = minmax_fit({0, 10});
  CHECK(minmax_apply_one(12, p2) == 1.0);   // clipped
  CHECK(minmax_apply_one(-3, p2) == 0.0);   // clipped
  CHECK_THROWS_AS(minmax_fit({}), std::domain_error);
}

TEST_CASE("stratified_split proportional allocation") {
  std::vector<int> labels;
  for (int i = 0; i < 80; ++i) labels.push_back(0);
  for (int i = 0; i < 20; ++i) labels.push_back(1);
  auto plan = stratified_split(labels, 0.2, 42);
  std::size_t test_zeros = 0, test_ones = 0;
  for (auto i : plan.test_indices) (labels[i] == 0 ? test_zeros : test_ones)++;
  CHECK(test_zeros == 16);
  CHECK(test_ones == 4);
  CHECK(plan.train_indices.size() + plan.test_indices.size() == labels.size());

  // train/test disjoint and exhaustive
  std::set<std::size_t> all(plan.train_indices.begin(), plan.train_indices.end());
  for (auto i : plan.test_indices) CHECK(all.insert(i).second);
  CHECK(all.size() == labels.size());
}

TEST_CASE("stratified_split symmetric half split and determinism") {
  std::vector<int> labels(10, 1);
  auto plan = stratified_split(labels, 0.5, 7);
  CHECK(plan.test_indices.size() == 5);
  CHECK(plan.train_indices.size() == 5);

  auto again = stratified_split(labels, 0.5, 7);
  CHECK(plan.test_indices == again.test_indices);
  CHECK(plan.train_indices == again.train_indices);

  auto other = stratified_split(labels, 0.5, 8);
  CHECK(plan.test_indices != other.test_indices);  // smoke: different seed differs
}

TEST_CASE("stratified_split rejects singleton classes") {
  std::vector<int> labels{0, 0, 0, 5};
  CHECK_THROWS_AS(stratified_split(labels, 0.5, 1), precondition_error);
}

TEST_CASE("stratified_split per-class proportion within one sample") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> labels;
    std::size_t n0 = 5 + rng.uniform_int(50), n1 = 5 + rng.uniform_int(50);
    for (std::size_t i = 0; i < n0; ++i) labels.push_back(0);
    for (std::size_t i = 0; i < n1; ++i) labels.push_back(1);
    double frac = 0.1 + 0.8 * rng.uniform();
    auto plan = stratified_split(labels, frac, static_cast<std::uint64_t>(trial));
    double global = static_cast<double>(plan.test_indices.size()) /
                    static_cast<double>(labels.size());
    std::size_t t0 = 0, t1 = 0;
    for (auto i : plan.test_indices) (labels[i] == 0 ? t0 : t1)++;
    CHECK(std::fabs(static_cast<double>(t0) - global * static_cast<double>(n0)) <= 1.0 + 1e-9);
    CHECK(std::fabs(static_cast<double>(t1) - global * static_cast<double>(n1)) <= 1.0 + 1e-9);
  }
}

TEST_CASE("stratified_kfold partitions and balances") {
  std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  auto folds = stratified_kfold(labels, 5, 42);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& [tr, va] : folds) {
    CHECK(va.size() == 2);
    std::size_t zeros = 0;
    for (auto i : va) zeros += labels[i] == 0;
    CHECK(zeros == 1);  // one per class per fold
    for (auto i : va) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == labels.size());
}

TEST_CASE("stratified_kfold rejects k > class count") {
  std::vector<int> labels{0, 1, 2, 3};
  CHECK_THROWS_AS(stratified_kfold(labels, 4, 1), precondition_error);
}

TEST_CASE("smote: segment property in 1-D") {
  Matrix minority(0, 1);
  minority.push_row({0.0});
  minority.push_row({1.0});
  auto synth = smote(minority, 5, 5, 123);
  REQUIRE(synth.rows == 3);
  for (std::size_t i = 0; i < synth.rows; ++i) {
    CHECK(synth.at(i, 0) >= 0.0);
    CHECK(synth.at(i, 0) <= 1.0);
  }
}

TEST_CASE("smote: single minority row duplicates it") {
  Matrix minority(0, 3);
  minority.push_row({1.0, 2.0, 3.0});
  auto synth = smote(minority, 4, 5, 9);
  REQUIRE(synth.rows == 3);
  for (std::size_t i = 0; i < synth.rows; ++i) {
    CHECK(synth.at(i, 0) == 1.0);
    CHECK(synth.at(i, 1) == 2.0);
    CHECK(synth.at(i, 2) == 3.0);
  }
}

TEST_CASE("smote: no-op when already balanced") {
  Matrix minority(0, 2);
  minority.push_row({0.0, 0.0});
  minority.push_row({1.0, 1.0});
  CHECK(smote(minority, 2, 5, 1).rows == 0);
  CHECK(smote(minority, 1, 5, 1).rows == 0);
  Matrix empty(0, 2);
  CHECK_THROWS_AS(smote(empty, 5, 5, 1), std::domain_error);
}

TEST_CASE("smote: every synthetic lies on a segment between two originals") {
  Rng rng(77);
  Matrix minority(0, 3);
  for (int i = 0; i < 12; ++i) {
    minority.push_row({rng.gaussian(), rng.gaussian(), rng.gaussian()});
  }
  std::size_t majority = 30;
  auto synth = smote(minority, majority, 5, 2024);
  CHECK(synth.rows == majority - minority.rows);
  for (std::size_t s = 0; s < synth.rows; ++s) {
    bool on_segment = false;
    for (std::size_t a = 0; a < minority.rows && !on_segment; ++a) {
      for (std::size_t b = 0; b < minority.rows && !on_segment; ++b) {
        if (a == b) continue;
        // derive t from the first coordinate with a nonzero span
        double t = -1;
        for (std::size_t c = 0; c < 3; ++c) {
          double span = minority.at(b, c) - minority.at(a, c);
          if (std::fabs(span) > 1e-12) {
            t = (synth.at(s, c) - minority.at(a, c)) / span;
            break;
          }
        }
        if (t < -1e-9 || t > 1.0 + 1e-9) continue;
        bool ok = true;
        for (std::size_t c = 0; c < 3; ++c) {
          double expect = minority.at(a, c) + t * (minority.at(b, c) - minority.at(a, c));
          if (std::fabs(synth.at(s, c) - expect) >= 1e-9) ok = false;
        }
        on_segment = ok;
      }
    }
    CHECK(on_segment);
  }
}

TEST_CASE("split plan serializes round-trip stable") {
  std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 1};
  auto plan = stratified_split(labels, 0.25, 5);
  plan.folds = stratified_kfold(labels, 2, 5);
  auto j = plan.to_json();
  CHECK(j["seed"] == 5);
  CHECK(j["train"].size() == plan.train_indices.size());
  CHECK(j["folds"].size() == 2);
}
