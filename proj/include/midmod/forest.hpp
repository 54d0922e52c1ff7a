#pragma once

// Random forest of Gini decision trees, used as a feature-selection filter.
//
// Split candidates come from per-feature histograms: a feature with at most
// `max_bins` distinct training values is split exactly between every pair of
// neighbouring values; wider features use quantile bin edges.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "midmod/dataset.hpp"
#include "midmod/metrics.hpp"

namespace midmod {

struct ForestOptions {
  int n_trees = 200;
  int max_depth = 12;
  int min_leaf = 5;
  int features_per_split = 0;  // 0: ceil(sqrt(feature count))
  std::uint64_t seed = 0;
  int max_bins = 256;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p0 = 0.0;
  double p1 = 0.0;
  double gain = 0.0;  // weighted impurity decrease of this split
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> in_bag;  // sorted distinct bootstrap rows

  double predict(std::span<const double> x) const {
    int k = 0;
    while (nodes[k].feature >= 0) {
      const auto& n = nodes[k];
      k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[k].p1;
  }

  std::vector<std::uint32_t> out_of_bag(std::size_t rows) const {
    std::vector<std::uint32_t> out;
    std::size_t j = 0;
    for (std::uint32_t i = 0; i < rows; ++i) {
      while (j < in_bag.size() && in_bag[j] < i) ++j;
      if (j == in_bag.size() || in_bag[j] != i) out.push_back(i);
    }
    return out;
  }
};

struct ForestModel {
  std::vector<std::string> feature_names;
  ForestOptions options;
  std::vector<DecisionTree> trees;
  std::vector<double> importances;  // mean decrease in impurity, sums to 1
  std::size_t split_count = 0;

  double score(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return trees.empty() ? 0.5 : s / static_cast<double>(trees.size());
  }
};

namespace detail {

// Per-feature bin codes for every row, plus thresholds between bins.
struct BinnedFeatures {
  std::size_t rows = 0;
  std::vector<std::vector<std::uint16_t>> codes;    // [feature][row]
  std::vector<std::vector<double>> thresholds;      // [feature][bin] splits bin | bin+1
  std::vector<std::size_t> bin_count;

  BinnedFeatures(const Dataset& data, int max_bins) : rows(data.rows()) {
    const std::size_t d = data.cols();
    codes.resize(d);
    thresholds.resize(d);
    bin_count.resize(d);
    std::vector<double> col(rows);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < rows; ++i) col[i] = data.at(i, j);
      std::vector<double> sorted = col;
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> distinct = sorted;
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      // Upper value of each bin.
      std::vector<double> upper;
      if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
        upper = distinct;
      } else {
        for (int q = 1; q < max_bins; ++q) {
          upper.push_back(sorted[static_cast<std::size_t>(q) * rows / static_cast<std::size_t>(max_bins)]);
        }
        upper.push_back(distinct.back());
        upper.erase(std::unique(upper.begin(), upper.end()), upper.end());
      }
      bin_count[j] = upper.size();
      auto& th = thresholds[j];
      th.resize(upper.size());
      for (std::size_t b = 0; b + 1 < upper.size(); ++b) {
        // Smallest value above this bin's upper edge.
        const double next = *std::upper_bound(distinct.begin(), distinct.end(), upper[b]);
        th[b] = upper[b] + 0.5 * (next - upper[b]);
      }
      if (!upper.empty()) th.back() = upper.back();
      auto& cj = codes[j];
      cj.resize(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        cj[i] = static_cast<std::uint16_t>(
            std::lower_bound(upper.begin(), upper.end(), col[i]) - upper.begin());
      }
    }
  }
};

inline double gini(double w0, double w1) {
  const double w = w0 + w1;
  if (w <= 0) return 0.0;
  const double a = w0 / w;
  const double b = w1 / w;
  return 1.0 - a * a - b * b;
}

class TreeBuilder {
 public:
  TreeBuilder(const BinnedFeatures& bins, const std::vector<int>& labels, const ForestOptions& opt,
              std::size_t features_per_split, std::vector<double>& importance)
      : bins_(bins), labels_(labels), opt_(opt), mtry_(features_per_split), importance_(importance) {}

  DecisionTree build(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = bins_.rows;
    weight_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) weight_[rng.below(n)] += 1.0;
    std::vector<std::uint32_t> rows;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (weight_[i] > 0) rows.push_back(i);
    }
    DecisionTree tree;
    tree.in_bag = rows;
    candidates_.resize(bins_.codes.size());
    grow(tree, rows, 0, rows.size(), 0, rng);
    return tree;
  }

  std::size_t splits() const { return splits_; }

 private:
  struct Split {
    int feature = -1;
    std::size_t bin = 0;
    double gain = 0.0;
  };

  int grow(DecisionTree& tree, std::vector<std::uint32_t>& rows, std::size_t begin,
           std::size_t end, int depth, Rng& rng) {
    double w0 = 0;
    double w1 = 0;
    for (std::size_t k = begin; k < end; ++k) {
      (labels_[rows[k]] != 0 ? w1 : w0) += weight_[rows[k]];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const double w = w0 + w1;
    tree.nodes[id].p0 = w0 / w;
    tree.nodes[id].p1 = w1 / w;
    if (depth >= opt_.max_depth || w0 == 0 || w1 == 0 || w < 2.0 * opt_.min_leaf) return id;

    const Split best = find_split(rows, begin, end, w0, w1, rng);
    if (best.feature < 0) return id;

    const auto& codes = bins_.codes[static_cast<std::size_t>(best.feature)];
    const auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                           rows.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::uint32_t r) { return codes[r] <= best.bin; });
    const std::size_t split_at = static_cast<std::size_t>(mid - rows.begin());
    importance_[static_cast<std::size_t>(best.feature)] += best.gain;
    ++splits_;
    tree.nodes[id].feature = best.feature;
    tree.nodes[id].threshold = bins_.thresholds[static_cast<std::size_t>(best.feature)][best.bin];
    tree.nodes[id].gain = best.gain;
    const int left = grow(tree, rows, begin, split_at, depth + 1, rng);
    const int right = grow(tree, rows, split_at, end, depth + 1, rng);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }

  Split find_split(const std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end,
                   double w0, double w1, Rng& rng) {
    const std::size_t d = bins_.codes.size();
    for (std::size_t j = 0; j < d; ++j) candidates_[j] = j;
    const std::size_t m = std::min(mtry_, d);
    for (std::size_t k = 0; k < m; ++k) std::swap(candidates_[k], candidates_[k + rng.below(d - k)]);
    std::vector<std::size_t> chosen(candidates_.begin(), candidates_.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(chosen.begin(), chosen.end());

    const double w = w0 + w1;
    const double parent = w * gini(w0, w1);
    const double min_leaf = static_cast<double>(opt_.min_leaf);
    Split best;
    const std::size_t count = end - begin;
    for (std::size_t f : chosen) {
      const auto& codes = bins_.codes[f];
      const std::size_t nb = bins_.bin_count[f];
      double l0 = 0;
      double l1 = 0;
      // Left side = bins <= b. Returns false once the right side is too small.
      const auto consider = [&](std::size_t b, double h0, double h1) {
        l0 += h0;
        l1 += h1;
        const double lw = l0 + l1;
        const double rw = w - lw;
        if (rw < min_leaf) return false;
        if (lw < min_leaf) return true;
        const double child = lw * gini(l0, l1) + rw * gini(w0 - l0, w1 - l1);
        const double gain = parent - child;
        if (gain > 1e-12 * w && gain > best.gain) {
          best.feature = static_cast<int>(f);
          best.bin = b;
          best.gain = gain;
        }
        return true;
      };
      if (4 * count < nb) {
        // Small node: sort the occupied bins instead of sweeping all of them.
        entries_.clear();
        for (std::size_t k = begin; k < end; ++k) {
          const auto r = rows[k];
          entries_.push_back({codes[r], labels_[r] != 0 ? 0.0 : weight_[r],
                              labels_[r] != 0 ? weight_[r] : 0.0});
        }
        std::sort(entries_.begin(), entries_.end(),
                  [](const Entry& a, const Entry& b) { return a.code < b.code; });
        std::size_t k = 0;
        while (k < entries_.size()) {
          const auto code = entries_[k].code;
          double h0 = 0;
          double h1 = 0;
          while (k < entries_.size() && entries_[k].code == code) {
            h0 += entries_[k].w0;
            h1 += entries_[k].w1;
            ++k;
          }
          if (k == entries_.size()) break;
          if (!consider(code, h0, h1)) break;
        }
      } else {
        hist_.assign(2 * nb, 0.0);
        for (std::size_t k = begin; k < end; ++k) {
          const auto r = rows[k];
          hist_[2 * codes[r] + (labels_[r] != 0 ? 1 : 0)] += weight_[r];
        }
        for (std::size_t b = 0; b + 1 < nb; ++b) {
          const double h0 = hist_[2 * b];
          const double h1 = hist_[2 * b + 1];
          if (h0 + h1 == 0) continue;
          if (!consider(b, h0, h1)) break;
        }
      }
    }
    return best;
  }

  const BinnedFeatures& bins_;
  const std::vector<int>& labels_;
  const ForestOptions& opt_;
  std::size_t mtry_;
  std::vector<double>& importance_;
  std::vector<double> weight_;
  struct Entry {
    std::uint16_t code;
    double w0;
    double w1;
  };

  std::vector<double> hist_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> candidates_;
  std::size_t splits_ = 0;
};

}  // namespace detail

std::size_t default_features_per_split(std::size_t d);

// Each tree draws its bootstrap and feature subsets from seed + tree index.
ForestModel fit_forest(const Dataset& data, const ForestOptions& opt = {});

struct RankedFeature {
  std::size_t index = 0;
  std::string name;
  double importance = 0.0;
};

// Descending importance; ties by ascending column index.
std::vector<RankedFeature> importance_ranking(const ForestModel& m);

// First k ranked columns, returned in ascending column order.
std::vector<std::size_t> select_top_k(std::span<const RankedFeature> ranking, std::size_t k);

double forest_auc(const ForestModel& m, const Dataset& data);

// Importances averaged over several forests (same schema), renormalized.
std::vector<RankedFeature> pooled_ranking(std::span<const ForestModel> forests);

void write_ranking_csv(std::ostream& out, std::span<const RankedFeature> ranking);

std::vector<RankedFeature> read_ranking_csv(std::istream& in,
                                                   std::span<const std::string> columns);

}  // namespace midmod
