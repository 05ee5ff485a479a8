#ifndef BREACHLENS_METRICS_HPP
#define BREACHLENS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/stats.hpp"

namespace breachlens::learn {

using nlohmann::json;

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

struct Metrics {
  double accuracy = 0;
  double precision = 0;  // tp / (tp + fp)
  double recall = 0;     // tp / (tp + fn)
  double f1 = 0;
  double roc_auc = 0;
  double log_loss = 0;
  Confusion confusion;
  bool degenerate = false;  // some denominator collapsed; affected metrics are 0

  json to_json() const {
    json j;
    j["accuracy"] = accuracy;
    j["precision"] = precision;
    j["recall"] = recall;
    j["f1"] = f1;
    j["roc_auc"] = roc_auc;
    j["log_loss"] = log_loss;
    j["confusion"] = json{{"tp", confusion.tp}, {"tn", confusion.tn},
                          {"fp", confusion.fp}, {"fn", confusion.fn}};
    j["degenerate"] = degenerate;
    return j;
  }
};

// Rank-based AUC with midpoint tie handling: equals the fraction of
// (positive, negative) score pairs won by the positive, counting ties half.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::domain_error("roc_auc: length mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) return 0.0;  // degenerate; caller flags it
  std::vector<double> ranks = stats::average_ranks(scores);
  double rank_sum_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) rank_sum_pos += ranks[i];
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

inline Metrics evaluate(const std::vector<double>& probabilities,
                        const std::vector<int>& labels, double threshold = 0.5) {
  if (probabilities.size() != labels.size() || probabilities.empty())
    throw std::domain_error("evaluate: need equal, non-empty inputs");
  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool pred = probabilities[i] >= threshold;
    bool truth = labels[i] != 0;
    if (pred && truth) ++m.confusion.tp;
    else if (pred && !truth) ++m.confusion.fp;
    else if (!pred && truth) ++m.confusion.fn;
    else ++m.confusion.tn;
  }
  double n = static_cast<double>(labels.size());
  m.accuracy = static_cast<double>(m.confusion.tp + m.confusion.tn) / n;
  std::size_t denom_p = m.confusion.tp + m.confusion.fp;
  std::size_t denom_r = m.confusion.tp + m.confusion.fn;
  if (denom_p > 0) m.precision = static_cast<double>(m.confusion.tp) / denom_p;
  else m.degenerate = true;
  if (denom_r > 0) m.recall = static_cast<double>(m.confusion.tp) / denom_r;
  else m.degenerate = true;
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y != 0;
  if (n_pos == 0 || n_pos == labels.size()) m.degenerate = true;
  m.roc_auc = roc_auc(probabilities, labels);
  double ll = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p = std::clamp(probabilities[i], 1e-15, 1.0 - 1e-15);
    ll += labels[i] ? -std::log(p) : -std::log1p(-p);
  }
  m.log_loss = ll / n;
  return m;
}

}  // namespace breachlens::learn

#endif  // BREACHLENS_METRICS_HPP
