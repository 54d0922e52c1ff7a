#pragma once

// Bayesian logistic regression: MAP weights under an isotropic Gaussian
// prior on standardized features, fitted by damped Newton (IRLS).
//
// Objective maximized over theta = (intercept, w):
//   L(theta) = sum_i [ y_i z_i - log(1 + exp(z_i)) ] - |w|^2 / (2 sigma^2)
// with z_i = intercept + w . standardized(x_i). The intercept is unpenalized.

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "midmod/dataset.hpp"

namespace midmod {

struct BlrOptions {
  double prior_variance = 10.0;
  double tol = 1e-8;  // on the gradient infinity norm
  int max_iter = 100;
};

struct BlrModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;  // per feature, on the standardized scale
  double intercept = 0.0;
  double prior_variance = 10.0;
  std::vector<double> means;
  std::vector<double> stds;
  bool converged = false;
  int iterations = 0;

  // Not serialized.
  std::vector<bool> pinned;             // constant training column, weight fixed at 0
  std::vector<double> objective_trace;  // L(theta) after each accepted step
  double gradient_norm = 0.0;

  std::size_t free_weights() const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
      if (j >= pinned.size() || !pinned[j]) ++n;
    }
    return n;
  }
};

// Penalized likelihood on a standardized design with a leading column of ones.
class BlrProblem {
 public:
  BlrProblem(Eigen::MatrixXd design, Eigen::VectorXd labels, double prior_variance)
      : x_(std::move(design)), y_(std::move(labels)), prior_precision_(1.0 / prior_variance) {}

  Eigen::Index dim() const { return x_.cols(); }
  Eigen::Index rows() const { return x_.rows(); }

  double objective(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd z = x_ * theta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) ll += y_[i] * z[i] - softplus(z[i]);
    return ll - 0.5 * prior_precision_ * theta.tail(theta.size() - 1).squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd mu = (x_ * theta).unaryExpr([](double z) { return logistic(z); });
    Eigen::VectorXd g = x_.transpose() * (y_ - mu);
    g.tail(g.size() - 1) -= prior_precision_ * theta.tail(theta.size() - 1);
    return g;
  }

  // Negative Hessian: X' W X + prior precision on the non-intercept block.
  Eigen::MatrixXd information(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd mu = (x_ * theta).unaryExpr([](double z) { return logistic(z); });
    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    Eigen::MatrixXd h = x_.transpose() * (x_.array().colwise() * w.array()).matrix();
    for (Eigen::Index j = 1; j < h.rows(); ++j) h(j, j) += prior_precision_;
    return h;
  }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  double prior_precision_;
};

namespace detail {

inline void check_trainable(const Dataset& data) {
  if (data.rows() < 2) throw LearnerError("need at least 2 samples");
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.rows()) {
    throw LearnerError("training labels contain a single class");
  }
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!std::isfinite(r[j])) {
        throw LearnerError("non-finite value in column '" + data.columns()[j] + "' (row " +
                           std::to_string(i) + ")");
      }
    }
  }
}

}  // namespace detail

inline BlrModel fit_blr(const Dataset& data, const BlrOptions& opt = {}) {
  detail::check_trainable(data);
  if (!(opt.prior_variance > 0)) throw LearnerError("prior variance must be positive");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();

  BlrModel m;
  m.feature_names = data.columns();
  m.prior_variance = opt.prior_variance;
  m.means.assign(d, 0.0);
  m.stds.assign(d, 1.0);
  m.pinned.assign(d, false);
  m.weights.assign(d, 0.0);

  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data.at(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = data.at(i, j) - mean;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    m.means[j] = mean;
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      m.stds[j] = sd;
    } else {
      m.pinned[j] = true;
    }
  }

  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < d; ++j) {
    if (!m.pinned[j]) free.push_back(j);
  }
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(free.size() + 1));
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t j = free[k];
      x(i, k + 1) = (data.at(i, j) - m.means[j]) / m.stds[j];
    }
    y[i] = data.label(i);
  }
  const BlrProblem problem(std::move(x), std::move(y), opt.prior_variance);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(problem.dim());
  double obj = problem.objective(theta);
  Eigen::VectorXd grad = problem.gradient(theta);
  m.objective_trace.push_back(obj);
  int iter = 0;
  while (grad.lpNorm<Eigen::Infinity>() >= opt.tol && iter < opt.max_iter) {
    ++iter;
    const Eigen::MatrixXd info = problem.information(theta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      Eigen::MatrixXd jittered = info;
      jittered.diagonal().array() += 1e-8;
      step = jittered.ldlt().solve(grad);
    }
    // Halve until the objective does not decrease. Close to the optimum the
    // change drops below rounding, so a flat step that shrinks the gradient
    // also counts.
    const double flat = 1e-12 * (1.0 + std::abs(obj));
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      const Eigen::VectorXd candidate = theta + scale * step;
      const double cand_obj = problem.objective(candidate);
      if (std::isfinite(cand_obj) && cand_obj >= obj - flat) {
        Eigen::VectorXd cand_grad = problem.gradient(candidate);
        if (cand_obj >= obj || cand_grad.lpNorm<Eigen::Infinity>() < gnorm) {
          theta = candidate;
          obj = std::max(obj, cand_obj);
          grad = std::move(cand_grad);
          accepted = true;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!accepted) break;
    m.objective_trace.push_back(obj);
  }

  m.iterations = iter;
  m.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  m.converged = m.gradient_norm < opt.tol;
  m.intercept = theta[0];
  for (std::size_t k = 0; k < free.size(); ++k) m.weights[free[k]] = theta[static_cast<Eigen::Index>(k + 1)];
  return m;
}

inline double decision_value(const BlrModel& m, std::span<const double> x) {
  if (x.size() != m.weights.size()) {
    throw LearnerError("feature dimension " + std::to_string(x.size()) + " does not match model (" +
                       std::to_string(m.weights.size()) + ")");
  }
  double z = m.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) z += m.weights[j] * (x[j] - m.means[j]) / m.stds[j];
  return z;
}

inline double predict_proba(const BlrModel& m, std::span<const double> x) {
  return logistic(decision_value(m, x));
}

// Ties at the threshold go to the positive class.
inline int predict(const BlrModel& m, std::span<const double> x, double threshold = 0.5) {
  return predict_proba(m, x) >= threshold ? 1 : 0;
}

inline nlohmann::json to_json(const BlrModel& m) {
  return {{"weights", m.weights},
          {"intercept", m.intercept},
          {"prior_variance", m.prior_variance},
          {"means", m.means},
          {"stds", m.stds},
          {"feature_names", m.feature_names},
          {"converged", m.converged},
          {"iterations", m.iterations}};
}

inline BlrModel blr_from_json(const nlohmann::json& j) {
  BlrModel m;
  try {
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.prior_variance = j.at("prior_variance").get<double>();
    m.means = j.at("means").get<std::vector<double>>();
    m.stds = j.at("stds").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const std::size_t d = m.weights.size();
  if (m.means.size() != d || m.stds.size() != d || m.feature_names.size() != d) {
    throw DataError("model file: inconsistent vector lengths");
  }
  m.pinned.assign(d, false);
  for (std::size_t k = 0; k < d; ++k) {
    if (!(m.stds[k] > 0)) throw DataError("model file: non-positive std");
    m.pinned[k] = m.weights[k] == 0.0 && m.stds[k] == 1.0;
  }
  return m;
}

}  // namespace midmod
