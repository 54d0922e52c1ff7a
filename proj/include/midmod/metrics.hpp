#pragma once

// Classification metrics and ROC AUC.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "midmod/common.hpp"

namespace midmod {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  // Set when the denominator was zero and the value defaulted to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

// Harmonic mean; 0 when p + r == 0.
inline double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

inline Metrics metrics(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) {
    throw DataError("labels and predictions differ in length");
  }
  if (labels.empty()) throw DataError("metrics need at least one sample");
  Metrics m;
  auto& c = m.confusion;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool y = labels[i] != 0;
    const bool p = predictions[i] != 0;
    if (y && p) ++c.tp;
    else if (!y && p) ++c.fp;
    else if (!y && !p) ++c.tn;
    else ++c.fn;
  }
  if (c.tp + c.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

namespace detail {

inline void check_two_classes(std::span<const int> labels, std::size_t n_scores) {
  if (labels.size() != n_scores) throw DataError("labels and scores differ in length");
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
  if (pos == 0 || static_cast<std::size_t>(pos) == labels.size()) {
    throw DataError("AUC needs both classes");
  }
}

inline std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace detail

// Mann-Whitney U / (n1 n0) with midranks for ties.
inline double auc_rank(std::span<const int> labels, std::span<const double> scores) {
  detail::check_two_classes(labels, scores.size());
  const auto order = detail::order_by_score(scores);
  const std::size_t n = order.size();
  double rank_sum = 0.0;
  double n1 = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0) {
        rank_sum += midrank;
        n1 += 1.0;
      }
    }
    i = j + 1;
  }
  const double n0 = static_cast<double>(n) - n1;
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

// Trapezoidal area under the ROC curve; tied scores form one diagonal step.
inline double auc_trapezoid(std::span<const int> labels, std::span<const double> scores) {
  detail::check_two_classes(labels, scores.size());
  auto order = detail::order_by_score(scores);
  std::reverse(order.begin(), order.end());
  double pos = 0;
  double neg = 0;
  for (int y : labels) (y != 0 ? pos : neg) += 1.0;
  double area = 0.0;  // in units of (tp count) x (fp count)
  double tp = 0;
  double fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double dtp = 0;
    double dfp = 0;
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] != 0 ? dtp : dfp) += 1.0;
      ++i;
    }
    area += dfp * (tp + 0.5 * dtp);
    tp += dtp;
    fp += dfp;
  }
  return area / (pos * neg);
}

// Both estimates must agree to 1e-12; the rank value is returned.
inline double auc_roc(std::span<const int> labels, std::span<const double> scores) {
  const double rank = auc_rank(labels, scores);
  const double trap = auc_trapezoid(labels, scores);
  if (std::abs(rank - trap) > 1e-12) {
    throw std::logic_error("AUC estimates disagree");
  }
  return rank;
}

}  // namespace midmod
