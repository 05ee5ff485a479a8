#ifndef BREACHLENS_GBDT_HPP
#define BREACHLENS_GBDT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"
#include "breachlens/logistic.hpp"

// Second-order gradient boosting for binary targets: each round fits one
// regression tree to the log-loss gradients g_i = p_i - y_i and hessians
// h_i = p_i (1 - p_i), with leaf weights -G/(H + lambda) and split gain
//   0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)).
// Thresholds are enumerated exactly over sorted unique feature values.

namespace breachlens::learn {

using nlohmann::json;

enum class TreeGrowth { level_wise, leaf_wise };

struct GbdtConfig {
  int rounds = 100;
  int depth = 3;
  double learning_rate = 0.1;
  std::size_t min_leaf = 1;
  double l2_lambda = 1.0;
  TreeGrowth growth = TreeGrowth::level_wise;
};

struct TreeNode {
  bool is_leaf = true;
  std::size_t feature = 0;
  double threshold = 0;   // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double weight = 0;      // leaf output before the learning rate is applied
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  double predict(const double* x) const {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf) {
      const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
      idx = x[node.feature] < node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(idx)].weight;
  }

  int depth() const {
    return depth_below(0);
  }

 private:
  int depth_below(int idx) const {
    const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf) return 0;
    return 1 + std::max(depth_below(node.left), depth_below(node.right));
  }
};

struct GbdtModel {
  double base_score = 0;  // log-odds
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  GbdtConfig config;
  std::vector<double> training_trace;  // train log loss after each round

  double raw_score(const double* x) const {
    double s = base_score;
    for (const auto& t : trees) s += learning_rate * t.predict(x);
    return s;
  }

  json to_json() const;
  static GbdtModel from_json(const json& j);
};

namespace gbdt_detail {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0;
  double gain = 0;
};

struct NodeStats {
  double g_sum = 0;
  double h_sum = 0;
};

inline double leaf_objective(double g, double h, double lambda) {
  double denom = h + lambda;
  if (denom <= 0) return 0;
  return g * g / denom;
}

// Exact greedy scan; ties resolve to the lowest feature index, then the
// lowest threshold (the scan order), so a parallel variant must reproduce
// this exact choice to be admissible. Zero-gain splits are admitted: parity
// targets (both children balanced, as in XOR) have zero first-level gain and
// only become separable one level down.
inline SplitChoice best_split(const Matrix& x, const std::vector<double>& g,
                              const std::vector<double>& h,
                              const std::vector<std::size_t>& idx,
                              std::size_t min_leaf, double lambda) {
  SplitChoice best;
  if (idx.size() < 2 * min_leaf) return best;
  double g_total = 0, h_total = 0;
  for (auto i : idx) {
    g_total += g[i];
    h_total += h[i];
  }
  double parent_obj = leaf_objective(g_total, h_total, lambda);

  std::vector<std::pair<double, std::size_t>> sorted;
  sorted.reserve(idx.size());
  for (std::size_t f = 0; f < x.cols; ++f) {
    sorted.clear();
    for (auto i : idx) sorted.emplace_back(x.at(i, f), i);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double gl = 0, hl = 0;
    std::size_t nl = 0;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      gl += g[sorted[k].second];
      hl += h[sorted[k].second];
      ++nl;
      if (sorted[k].first == sorted[k + 1].first) continue;  // not a boundary
      if (nl < min_leaf || idx.size() - nl < min_leaf) continue;
      double gain = 0.5 * (leaf_objective(gl, hl, lambda) +
                           leaf_objective(g_total - gl, h_total - hl, lambda) -
                           parent_obj);
      bool better = best.found ? gain > best.gain + 1e-12 : gain >= 0.0;
      if (better) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (sorted[k].first + sorted[k + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

inline double leaf_weight(const std::vector<double>& g, const std::vector<double>& h,
                          const std::vector<std::size_t>& idx, double lambda) {
  double gs = 0, hs = 0;
  for (auto i : idx) {
    gs += g[i];
    hs += h[i];
  }
  double denom = hs + lambda;
  if (denom <= 0) return 0;
  return -gs / denom;
}

inline void partition(const Matrix& x, const std::vector<std::size_t>& idx,
                      std::size_t feature, double threshold,
                      std::vector<std::size_t>& left, std::vector<std::size_t>& right) {
  for (auto i : idx) {
    (x.at(i, feature) < threshold ? left : right).push_back(i);
  }
}

inline int build_level_wise(Tree& tree, const Matrix& x, const std::vector<double>& g,
                            const std::vector<double>& h, std::vector<std::size_t> idx,
                            int depth_left, std::size_t min_leaf, double lambda) {
  int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  if (depth_left > 0) {
    SplitChoice split = best_split(x, g, h, idx, min_leaf, lambda);
    if (split.found) {
      std::vector<std::size_t> left, right;
      partition(x, idx, split.feature, split.threshold, left, right);
      int l = build_level_wise(tree, x, g, h, std::move(left), depth_left - 1,
                               min_leaf, lambda);
      int r = build_level_wise(tree, x, g, h, std::move(right), depth_left - 1,
                               min_leaf, lambda);
      TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
      node.is_leaf = false;
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = l;
      node.right = r;
      return node_id;
    }
  }
  tree.nodes[static_cast<std::size_t>(node_id)].weight = leaf_weight(g, h, idx, lambda);
  return node_id;
}

// Best-gain-first growth with a leaf budget of 2^depth; the depth cap still
// applies so the structural invariant (depth <= configured) holds in both
// growth modes.
inline Tree build_leaf_wise(const Matrix& x, const std::vector<double>& g,
                            const std::vector<double>& h, std::vector<std::size_t> root_idx,
                            int max_depth, std::size_t min_leaf, double lambda) {
  struct Candidate {
    int node_id;
    std::vector<std::size_t> idx;
    int depth;
    SplitChoice split;
  };
  Tree tree;
  tree.nodes.push_back(TreeNode{});
  tree.nodes[0].weight = leaf_weight(g, h, root_idx, lambda);
  std::size_t max_leaves = max_depth >= 30 ? std::numeric_limits<std::size_t>::max()
                                           : (std::size_t{1} << max_depth);
  std::vector<Candidate> frontier;
  Candidate root{0, std::move(root_idx), 0, {}};
  if (max_depth > 0) root.split = best_split(x, g, h, root.idx, min_leaf, lambda);
  frontier.push_back(std::move(root));
  std::size_t leaves = 1;
  while (leaves < max_leaves) {
    // pick the frontier leaf with the best gain (first on ties: it was
    // created earliest, matching the deterministic scan order)
    std::size_t best_i = frontier.size();
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (!frontier[i].split.found || frontier[i].depth >= max_depth) continue;
      if (best_i == frontier.size() ||
          frontier[i].split.gain > frontier[best_i].split.gain + 1e-12) {
        best_i = i;
      }
    }
    if (best_i == frontier.size()) break;
    Candidate cand = std::move(frontier[best_i]);
    frontier.erase(frontier.begin() + static_cast<long>(best_i));

    std::vector<std::size_t> left, right;
    partition(x, cand.idx, cand.split.feature, cand.split.threshold, left, right);
    int l = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes.back().weight = leaf_weight(g, h, left, lambda);
    int r = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes.back().weight = leaf_weight(g, h, right, lambda);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(cand.node_id)];
    node.is_leaf = false;
    node.feature = cand.split.feature;
    node.threshold = cand.split.threshold;
    node.left = l;
    node.right = r;
    ++leaves;

    Candidate cl{l, std::move(left), cand.depth + 1, {}};
    if (cl.depth < max_depth) cl.split = best_split(x, g, h, cl.idx, min_leaf, lambda);
    Candidate cr{r, std::move(right), cand.depth + 1, {}};
    if (cr.depth < max_depth) cr.split = best_split(x, g, h, cr.idx, min_leaf, lambda);
    frontier.push_back(std::move(cl));
    frontier.push_back(std::move(cr));
  }
  return tree;
}

}  // namespace gbdt_detail

inline GbdtModel train_gbdt(const Matrix& x, const std::vector<int>& y,
                            const GbdtConfig& cfg = {}) {
  if (x.rows == 0 || x.rows != y.size())
    throw std::domain_error("train_gbdt: shape mismatch");
  if (cfg.rounds < 1) throw std::domain_error("train_gbdt: rounds must be >= 1");
  if (cfg.depth < 0) throw std::domain_error("train_gbdt: depth must be >= 0");
  if (!(cfg.learning_rate > 0 && cfg.learning_rate <= 1))
    throw std::domain_error("train_gbdt: learning_rate must be in (0,1]");
  std::size_t n = x.rows;
  double pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::domain_error("train_gbdt: labels must be 0/1");
    pos += v;
  }
  GbdtModel model;
  model.learning_rate = cfg.learning_rate;
  model.config = cfg;
  double rate = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  model.base_score = std::log(rate / (1.0 - rate));
  if (pos == 0 || pos == static_cast<double>(n)) {
    return model;  // single-class degeneracy: clamped base score, zero trees
  }

  std::vector<double> score(n, model.base_score);
  std::vector<double> g(n), h(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (int round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(score[i]);
      g[i] = p - static_cast<double>(y[i]);
      h[i] = p * (1.0 - p);
    }
    Tree tree;
    if (cfg.growth == TreeGrowth::level_wise) {
      gbdt_detail::build_level_wise(tree, x, g, h, all, cfg.depth, cfg.min_leaf,
                                    cfg.l2_lambda);
    } else {
      tree = gbdt_detail::build_leaf_wise(x, g, h, all, cfg.depth, cfg.min_leaf,
                                          cfg.l2_lambda);
    }
    for (std::size_t i = 0; i < n; ++i) {
      score[i] += cfg.learning_rate * tree.predict(x.row(i));
    }
    model.trees.push_back(std::move(tree));
    double ll = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double p = std::clamp(sigmoid(score[i]), 1e-15, 1.0 - 1e-15);
      ll += y[i] ? -std::log(p) : -std::log1p(-p);
    }
    model.training_trace.push_back(ll / static_cast<double>(n));
  }
  return model;
}

inline std::vector<double> predict_proba(const GbdtModel& model, const Matrix& x) {
  std::vector<double> out;
  out.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out.push_back(sigmoid(model.raw_score(x.row(i))));
  }
  return out;
}

inline json GbdtModel::to_json() const {
  json j;
  j["format_version"] = 1;
  j["kind"] = "gbdt";
  j["base_score"] = base_score;
  j["learning_rate"] = learning_rate;
  j["config"] = json{{"rounds", config.rounds},
                     {"depth", config.depth},
                     {"learning_rate", config.learning_rate},
                     {"min_leaf", config.min_leaf},
                     {"l2_lambda", config.l2_lambda},
                     {"growth", config.growth == TreeGrowth::level_wise ? "level" : "leaf"}};
  j["trees"] = json::array();
  for (const auto& t : trees) {
    json jt = json::array();
    for (const auto& node : t.nodes) {
      if (node.is_leaf) {
        jt.push_back(json{{"leaf", node.weight}});
      } else {
        jt.push_back(json{{"feature", node.feature},
                          {"threshold", node.threshold},
                          {"left", node.left},
                          {"right", node.right}});
      }
    }
    j["trees"].push_back(std::move(jt));
  }
  return j;
}

inline GbdtModel GbdtModel::from_json(const json& j) {
  GbdtModel m;
  m.base_score = j.at("base_score").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  const json& jc = j.at("config");
  m.config.rounds = jc.at("rounds").get<int>();
  m.config.depth = jc.at("depth").get<int>();
  m.config.learning_rate = jc.at("learning_rate").get<double>();
  m.config.min_leaf = jc.at("min_leaf").get<std::size_t>();
  m.config.l2_lambda = jc.at("l2_lambda").get<double>();
  m.config.growth = jc.at("growth").get<std::string>() == "leaf" ? TreeGrowth::leaf_wise
                                                                 : TreeGrowth::level_wise;
  for (const auto& jt : j.at("trees")) {
    Tree t;
    for (const auto& jn : jt) {
      TreeNode node;
      if (jn.contains("leaf")) {
        node.weight = jn.at("leaf").get<double>();
      } else {
        node.is_leaf = false;
        node.feature = jn.at("feature").get<std::size_t>();
        node.threshold = jn.at("threshold").get<double>();
        node.left = jn.at("left").get<int>();
        node.right = jn.at("right").get<int>();
      }
      t.nodes.push_back(node);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

}  // namespace breachlens::learn

#endif  // BREACHLENS_GBDT_HPP
