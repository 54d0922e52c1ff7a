#pragma once

// Stratified k-fold cross-validation, repeated holdout, cross-testing of a
// trained model on another dataset, and the per-bin time-to-tweet report.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "midmod/blr.hpp"
#include "midmod/features.hpp"
#include "midmod/forest.hpp"
#include "midmod/metrics.hpp"

namespace midmod {

// A trained scorer maps a full-schema feature row to P(label = 1).
using Scorer = std::function<double(std::span<const double>)>;

// A learner only ever sees the training slice.
using Learner = std::function<Scorer(const Dataset& train)>;

struct SelectionOptions {
  std::size_t top_k = 15;
  ForestOptions forest;
};

// BLR, optionally preceded by forest top-k selection fitted on the same slice.
Learner blr_learner(BlrOptions blr, std::optional<SelectionOptions> selection = std::nullopt);

Learner constant_learner(double p);

struct FoldResult {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  Metrics metrics;
  double auc = 0.0;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct EvalReport {
  std::string procedure;  // "kfold", "holdout" or "cross-test"
  std::size_t k = 0;
  double train_fraction = 0.0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::vector<FoldResult> folds;
  Summary precision, recall, f1, auc;
  std::map<int, EvalReport> per_bin;

  void summarize() {
    const auto stat = [&](auto get) {
      Summary s;
      if (folds.empty()) return s;
      for (const auto& f : folds) s.mean += get(f);
      s.mean /= static_cast<double>(folds.size());
      if (folds.size() > 1) {
        double ss = 0;
        for (const auto& f : folds) ss += (get(f) - s.mean) * (get(f) - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(folds.size() - 1));
      }
      return s;
    };
    precision = stat([](const FoldResult& f) { return f.metrics.precision; });
    recall = stat([](const FoldResult& f) { return f.metrics.recall; });
    f1 = stat([](const FoldResult& f) { return f.metrics.f1; });
    auc = stat([](const FoldResult& f) { return f.auc; });
  }
};

nlohmann::json to_json(const EvalReport& r);

void write_summary_csv(std::ostream& out, const EvalReport& r);

FoldResult score_fold(const Scorer& scorer, const Dataset& test, double threshold,
                             std::size_t train_size);

// Stratified fold index per row: classes are shuffled separately and dealt
// round-robin, so every fold keeps the class ratio.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                                 std::uint64_t seed);

EvalReport cross_validate(const Dataset& data, const Learner& learner, std::size_t k = 10,
                                 std::uint64_t seed = 0, double threshold = 0.5);

// Row indices of one stratified split: first = train, second = test.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double train_fraction, std::uint64_t seed);

EvalReport holdout(const Dataset& data, const Learner& learner, double train_fraction = 0.8,
                          std::size_t repeats = 10, std::uint64_t seed = 0, double threshold = 0.5);

// Applies a trained model (its standardization and weights) to another
// dataset. Columns are matched by name; a missing column is an error.
EvalReport cross_test(const BlrModel& model, const Dataset& data, double threshold = 0.5);

struct TimeReportRow {
  int bin = 0;
  double post_share = 0.0;      // share of topic-relevant originals posted in the bin
  double diffused_share = 0.0;  // share of label-defining forwards occurring in the bin
  double mean_pred = 0.0;       // mean predicted diffusion probability of the bin model
  bool best = false;            // argmax of diffused_share
};

std::vector<TimeReportRow> time_to_tweet_report(const EventLog& log, const Topic& topic,
                                                       std::span<const Dataset> datasets,
                                                       std::span<const BlrModel> models);

void write_time_report_csv(std::ostream& out, std::span<const TimeReportRow> rows);

}  // namespace midmod
