#ifndef BREACHLENS_LOGISTIC_HPP
#define BREACHLENS_LOGISTIC_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "breachlens/core.hpp"

namespace breachlens::learn {

using nlohmann::json;

inline double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

struct LogisticConfig {
  double l2 = 1e-4;     // applies to weights, never the bias
  double step = 0.5;    // fixed gradient-descent step
  int epochs = 400;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0;
  std::vector<double> training_trace;  // penalized objective per epoch

  double raw_score(const double* x, std::size_t d) const {
    double z = bias;
    for (std::size_t j = 0; j < d; ++j) z += weights[j] * x[j];
    return z;
  }

  json to_json() const {
    json j;
    j["format_version"] = 1;
    j["kind"] = "logistic";
    j["weights"] = weights;
    j["bias"] = bias;
    return j;
  }

  static LogisticModel from_json(const json& j) {
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    return m;
  }
};

namespace detail {

// Mean log loss plus (l2/2)*||w||^2, deliberately unclamped: once a
// saturated score underflows the probability to exactly 0 the term is +inf,
// which is the divergence signal train_logistic reports.
inline double logistic_objective(const Matrix& x, const std::vector<int>& y,
                                 const std::vector<double>& w, double bias, double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double z = bias;
    const double* row = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) z += w[j] * row[j];
    double p = sigmoid(z);
    loss += y[i] ? -std::log(p) : -std::log1p(-p);
  }
  loss /= static_cast<double>(x.rows);
  double pen = 0;
  for (double wj : w) pen += wj * wj;
  return loss + 0.5 * l2 * pen;
}

}  // namespace detail

// Full-batch gradient descent. The trace records the penalized objective per
// epoch; with a step below the curvature bound it is non-increasing.
inline LogisticModel train_logistic(const Matrix& x, const std::vector<int>& y,
                                    const LogisticConfig& cfg = {}) {
  if (x.rows == 0 || x.rows != y.size())
    throw std::domain_error("train_logistic: shape mismatch");
  if (cfg.step <= 0) throw std::domain_error("train_logistic: step must be positive");
  for (int v : y) {
    if (v != 0 && v != 1) throw std::domain_error("train_logistic: labels must be 0/1");
  }
  LogisticModel model;
  model.weights.assign(x.cols, 0.0);
  double n = static_cast<double>(x.rows);
  std::vector<double> grad(x.cols);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double* row = x.row(i);
      double p = sigmoid(model.raw_score(row, x.cols));
      double err = p - static_cast<double>(y[i]);
      grad_bias += err;
      for (std::size_t j = 0; j < x.cols; ++j) grad[j] += err * row[j];
    }
    for (std::size_t j = 0; j < x.cols; ++j) {
      model.weights[j] -= cfg.step * (grad[j] / n + cfg.l2 * model.weights[j]);
    }
    model.bias -= cfg.step * (grad_bias / n);
    double obj = detail::logistic_objective(x, y, model.weights, model.bias, cfg.l2);
    if (!std::isfinite(obj)) {
      throw precondition_error(
          "train_logistic: objective diverged; reduce the step size");
    }
    model.training_trace.push_back(obj);
  }
  return model;
}

// Analytic gradient of the penalized objective at (w, bias); the finite
// difference checks in the test suite call this directly.
inline std::vector<double> logistic_gradient(const Matrix& x, const std::vector<int>& y,
                                             const std::vector<double>& w, double bias,
                                             double l2) {
  std::vector<double> g(x.cols + 1, 0.0);
  double n = static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* row = x.row(i);
    double z = bias;
    for (std::size_t j = 0; j < x.cols; ++j) z += w[j] * row[j];
    double err = sigmoid(z) - static_cast<double>(y[i]);
    for (std::size_t j = 0; j < x.cols; ++j) g[j] += err * row[j];
    g[x.cols] += err;
  }
  for (std::size_t j = 0; j < x.cols; ++j) g[j] = g[j] / n + l2 * w[j];
  g[x.cols] /= n;
  return g;
}

inline double logistic_objective(const Matrix& x, const std::vector<int>& y,
                                 const std::vector<double>& w, double bias, double l2) {
  return detail::logistic_objective(x, y, w, bias, l2);
}

inline std::vector<double> predict_proba(const LogisticModel& model, const Matrix& x) {
  if (x.cols != model.weights.size())
    throw std::domain_error("predict_proba: feature count mismatch");
  std::vector<double> out;
  out.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out.push_back(sigmoid(model.raw_score(x.row(i), x.cols)));
  }
  return out;
}

}  // namespace breachlens::learn

#endif  // BREACHLENS_LOGISTIC_HPP
