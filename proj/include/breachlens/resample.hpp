#ifndef BREACHLENS_RESAMPLE_HPP
#define BREACHLENS_RESAMPLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/prng.hpp"

namespace breachlens::resample {

using nlohmann::json;

using LabelMap = std::map<std::string, int>;

// Distinct observed categories (absent -> "Unknown"), sorted
// lexicographically, numbered 0..k-1.
inline LabelMap label_encode_fit(const std::vector<std::optional<std::string>>& column) {
  std::vector<std::string> cats;
  for (const auto& v : column) cats.push_back(v.value_or("Unknown"));
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  LabelMap m;
  for (std::size_t i = 0; i < cats.size(); ++i) m[cats[i]] = static_cast<int>(i);
  return m;
}

inline LabelMap label_encode_fit(const std::vector<std::string>& column) {
  std::vector<std::optional<std::string>> opt(column.begin(), column.end());
  return label_encode_fit(opt);
}

// Unseen categories fall back to the code of "Unknown". Callers fit via
// EncoderState (below), which guarantees that entry exists.
inline std::vector<int> label_encode_apply(const std::vector<std::string>& column,
                                           const LabelMap& map) {
  std::vector<int> out;
  out.reserve(column.size());
  auto unknown = map.find("Unknown");
  for (const auto& v : column) {
    auto it = map.find(v);
    if (it != map.end()) {
      out.push_back(it->second);
    } else if (unknown != map.end()) {
      out.push_back(unknown->second);
    } else {
      throw precondition_error("label_encode_apply: map lacks an Unknown entry for fallback");
    }
  }
  return out;
}

inline std::map<int, std::string> label_decode_map(const LabelMap& map) {
  std::map<int, std::string> inv;
  for (const auto& [cat, code] : map) inv[code] = cat;
  return inv;
}

struct MinMaxParams {
  double min = 0;
  double max = 0;
};

// Fit on the training column only (the leakage rule); apply clips to [0,1].
// A constant training column maps everything to 0.
inline MinMaxParams minmax_fit(const std::vector<double>& train_col) {
  if (train_col.empty()) throw std::domain_error("minmax_fit: empty training column");
  auto [lo, hi] = std::minmax_element(train_col.begin(), train_col.end());
  return MinMaxParams{*lo, *hi};
}

inline double minmax_apply_one(double x, const MinMaxParams& p) {
  double range = p.max - p.min;
  if (range == 0.0) return 0.0;
  return std::clamp((x - p.min) / range, 0.0, 1.0);
}

inline std::vector<double> minmax_apply(const std::vector<double>& col,
                                        const MinMaxParams& p) {
  std::vector<double> out;
  out.reserve(col.size());
  for (double x : col) out.push_back(minmax_apply_one(x, p));
  return out;
}

// Per-column encoder + scaler state, fitted once and replayed. Every label
// map is guaranteed to contain "Unknown": when the training data never
// produced that category it is appended with the next code, keeping codes
// contiguous while leaving the observed codes exactly as fitted.
struct EncoderState {
  std::map<std::string, LabelMap> label_maps;
  std::map<std::string, MinMaxParams> minmax;

  void fit_label(const std::string& column_name,
                 const std::vector<std::string>& values) {
    LabelMap m = label_encode_fit(values);
    if (!m.count("Unknown")) m["Unknown"] = static_cast<int>(m.size());
    label_maps[column_name] = std::move(m);
  }

  json to_json() const {
    json j;
    j["label_maps"] = json::object();
    for (const auto& [col, m] : label_maps) {
      json jm = json::object();
      for (const auto& [cat, code] : m) jm[cat] = code;
      j["label_maps"][col] = jm;
    }
    j["minmax"] = json::object();
    for (const auto& [col, p] : minmax) {
      j["minmax"][col] = json{{"min", p.min}, {"max", p.max}};
    }
    return j;
  }
};

// Numeric learning matrix with its provenance: column names, optional binary
// labels, and the encoder state used to produce it.
struct DataMatrix {
  std::vector<std::string> column_names;
  Matrix rows;
  std::vector<int> labels;  // empty when unlabeled
  EncoderState encoders;
};

struct SplitPlan {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;

  json to_json() const {
    json j;
    j["seed"] = seed;
    j["train"] = train_indices;
    j["test"] = test_indices;
    j["folds"] = json::array();
    for (const auto& [tr, va] : folds) {
      j["folds"].push_back(json{{"train", tr}, {"validation", va}});
    }
    return j;
  }
};

namespace detail {

inline std::map<int, std::vector<std::size_t>> indices_by_class(
    const std::vector<int>& labels) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  return by_class;
}

}  // namespace detail

// Per-class test allocation: round(class_count * fraction), then adjusted so
// the total equals round(n * fraction). Adjustment favours the classes whose
// rounding moved furthest, largest class first on ties.
inline SplitPlan stratified_split(const std::vector<int>& labels, double test_fraction,
                                  std::uint64_t seed) {
  if (labels.empty()) throw std::domain_error("stratified_split: empty labels");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::domain_error("stratified_split: test_fraction must be in (0,1)");
  auto by_class = detail::indices_by_class(labels);
  for (const auto& [cls, idx] : by_class) {
    if (idx.size() < 2)
      throw precondition_error("stratified_split: class " + std::to_string(cls) +
                               " has fewer than 2 members");
  }
  long long target_total =
      std::llround(static_cast<double>(labels.size()) * test_fraction);
  target_total = std::clamp<long long>(target_total, 1,
                                       static_cast<long long>(labels.size()) - 1);

  struct Alloc {
    int cls;
    std::size_t count;
    long long take;
    double remainder;
  };
  std::vector<Alloc> allocs;
  long long total = 0;
  for (const auto& [cls, idx] : by_class) {
    double exact = static_cast<double>(idx.size()) * test_fraction;
    long long take = std::llround(exact);
    take = std::clamp<long long>(take, 0, static_cast<long long>(idx.size()) - 1);
    allocs.push_back(Alloc{cls, idx.size(), take, exact - static_cast<double>(take)});
    total += take;
  }
  // Nudge counts until the grand total matches, moving the classes with the
  // largest leftover fraction first.
  while (total != target_total) {
    long long dir = target_total > total ? 1 : -1;
    auto best = allocs.end();
    for (auto it = allocs.begin(); it != allocs.end(); ++it) {
      long long next = it->take + dir;
      if (next < 0 || next > static_cast<long long>(it->count) - 1) continue;
      if (best == allocs.end() ||
          dir * it->remainder > dir * best->remainder ||
          (it->remainder == best->remainder && it->count > best->count)) {
        best = it;
      }
    }
    if (best == allocs.end()) break;  // nothing movable; proportions stay approximate
    best->take += dir;
    best->remainder -= static_cast<double>(dir);
    total += dir;
  }

  SplitPlan plan;
  plan.seed = seed;
  Rng rng(seed);
  for (auto& alloc : allocs) {
    auto idx = by_class[alloc.cls];
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i < static_cast<std::size_t>(alloc.take)) plan.test_indices.push_back(idx[i]);
      else plan.train_indices.push_back(idx[i]);
    }
  }
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

// Stratified K folds: every index lands in exactly one validation fold and
// per-fold class proportions stay within one sample of the global mix.
inline std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
stratified_kfold(const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::domain_error("stratified_kfold: k must be >= 2");
  auto by_class = detail::indices_by_class(labels);
  for (const auto& [cls, idx] : by_class) {
    if (idx.size() < k)
      throw precondition_error("stratified_kfold: class " + std::to_string(cls) +
                               " has fewer members than folds");
  }
  std::vector<std::vector<std::size_t>> validation(k);
  Rng rng(seed);
  for (auto& [cls, idx_const] : by_class) {
    auto idx = idx_const;
    rng.shuffle(idx);
    std::size_t base = idx.size() / k, extra = idx.size() % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
      std::size_t take = base + (f < extra ? 1 : 0);
      for (std::size_t i = 0; i < take; ++i) validation[f].push_back(idx[pos++]);
    }
  }
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> va = validation[f];
    std::sort(va.begin(), va.end());
    std::vector<std::size_t> tr;
    for (std::size_t g = 0; g < k; ++g) {
      if (g == f) continue;
      tr.insert(tr.end(), validation[g].begin(), validation[g].end());
    }
    std::sort(tr.begin(), tr.end());
    folds.emplace_back(std::move(tr), std::move(va));
  }
  return folds;
}

// Synthetic minority rows by interpolation toward nearest minority
// neighbours: s = x + u * (nn - x), u ~ U[0,1). The i-th synthetic row seeds
// from minority row i mod m, so coverage is even and runs reproduce exactly.
inline Matrix smote(const Matrix& minority_rows, std::size_t majority_count,
                    std::size_t k, std::uint64_t seed) {
  std::size_t m = minority_rows.rows;
  if (m == 0) throw std::domain_error("smote: minority set is empty");
  if (k < 1) throw std::domain_error("smote: k must be >= 1");
  Matrix synth(0, minority_rows.cols);
  if (majority_count <= m) return synth;  // already balanced: no-op
  std::size_t need = majority_count - m;

  // Nearest minority neighbours per row (ties broken by index).
  std::size_t k_eff = std::min(k, m > 0 ? m - 1 : 0);
  std::vector<std::vector<std::size_t>> neighbors(m);
  if (k_eff > 0) {
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(m - 1);
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        double d2 = 0;
        const double* ri = minority_rows.row(i);
        const double* rj = minority_rows.row(j);
        for (std::size_t c = 0; c < minority_rows.cols; ++c) {
          double d = ri[c] - rj[c];
          d2 += d * d;
        }
        dist.emplace_back(d2, j);
      }
      std::sort(dist.begin(), dist.end());
      for (std::size_t t = 0; t < k_eff; ++t) neighbors[i].push_back(dist[t].second);
    }
  }

  Rng rng(seed);
  for (std::size_t s = 0; s < need; ++s) {
    std::size_t i = s % m;
    std::vector<double> row = minority_rows.row_copy(i);
    if (k_eff > 0) {
      std::size_t nn = neighbors[i][static_cast<std::size_t>(rng.uniform_int(k_eff))];
      double u = rng.uniform();
      const double* rn = minority_rows.row(nn);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += u * (rn[c] - row[c]);
    }
    // single minority row: synthetic = that row
    synth.push_row(row);
  }
  return synth;
}

}  // namespace breachlens::resample

#endif  // BREACHLENS_RESAMPLE_HPP
