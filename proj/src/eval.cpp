#include "midmod/eval.hpp"

namespace midmod {

Learner blr_learner(BlrOptions blr, std::optional<SelectionOptions> selection) {
  return [blr, selection](const Dataset& train) -> Scorer {
    if (!selection) {
      auto model = std::make_shared<const BlrModel>(fit_blr(train, blr));
      return [model](std::span<const double> x) { return predict_proba(*model, x); };
    }
    const auto forest = fit_forest(train, selection->forest);
    const auto ranking = importance_ranking(forest);
    const auto cols = select_top_k(ranking, selection->top_k);
    auto model = std::make_shared<const BlrModel>(fit_blr(train.select_columns(cols), blr));
    return [model, cols](std::span<const double> x) {
      std::vector<double> sub(cols.size());
      for (std::size_t k = 0; k < cols.size(); ++k) sub[k] = x[cols[k]];
      return predict_proba(*model, sub);
    };
  };
}

Learner constant_learner(double p) {
  return [p](const Dataset&) -> Scorer { return [p](std::span<const double>) { return p; }; };
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    const auto& c = f.metrics.confusion;
    folds.push_back({{"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"precision", f.metrics.precision},
                     {"recall", f.metrics.recall},
                     {"f1", f.metrics.f1},
                     {"auc", f.auc},
                     {"precision_undefined", f.metrics.precision_undefined},
                     {"recall_undefined", f.metrics.recall_undefined},
                     {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}}});
  }
  const auto summary = [](const Summary& s) {
    return nlohmann::json{{"mean", s.mean}, {"stddev", s.stddev}};
  };
  nlohmann::json j = {{"config",
                       {{"procedure", r.procedure},
                        {"k", r.k},
                        {"train_fraction", r.train_fraction},
                        {"repeats", r.repeats},
                        {"seed", r.seed},
                        {"threshold", r.threshold}}},
                      {"folds", folds},
                      {"precision", summary(r.precision)},
                      {"recall", summary(r.recall)},
                      {"f1", summary(r.f1)},
                      {"auc", summary(r.auc)}};
  if (!r.per_bin.empty()) {
    nlohmann::json bins = nlohmann::json::object();
    for (const auto& [b, sub] : r.per_bin) bins[std::to_string(b)] = to_json(sub);
    j["per_bin"] = bins;
  }
  return j;
}

void write_summary_csv(std::ostream& out, const EvalReport& r) {
  out << "metric,mean,stddev\n";
  const std::pair<const char*, const Summary*> rows[] = {
      {"precision", &r.precision}, {"recall", &r.recall}, {"f1", &r.f1}, {"auc", &r.auc}};
  for (const auto& [name, s] : rows) {
    out << name << ',' << format_value(s->mean) << ',' << format_value(s->stddev) << '\n';
  }
}

FoldResult score_fold(const Scorer& scorer, const Dataset& test, double threshold,
                             std::size_t train_size) {
  FoldResult f;
  f.train_size = train_size;
  f.test_size = test.rows();
  std::vector<double> scores(test.rows());
  std::vector<int> preds(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) {
    scores[i] = scorer(test.row(i));
    preds[i] = scores[i] >= threshold ? 1 : 0;
  }
  f.metrics = metrics(test.labels(), preds);
  const std::size_t pos = test.positives();
  f.auc = (pos == 0 || pos == test.rows()) ? 0.0 : auc_roc(test.labels(), scores);
  return f;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] != 0 ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k) {
    throw DataError("stratified " + std::to_string(k) + "-fold needs at least " +
                    std::to_string(k) + " samples per class");
  }
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> fold(labels.size());
  for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = i % k;
  // Continue dealing negatives where positives stopped to balance fold sizes.
  for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = (pos.size() + i) % k;
  return fold;
}

EvalReport cross_validate(const Dataset& data, const Learner& learner, std::size_t k,
                                 std::uint64_t seed, double threshold) {
  if (k < 2) throw ConfigError("k must be at least 2");
  const auto fold = stratified_folds(data.labels(), k, seed);
  EvalReport report;
  report.procedure = "kfold";
  report.k = k;
  report.seed = seed;
  report.threshold = threshold;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < data.rows(); ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    const Dataset train = data.select_rows(train_idx);
    const Dataset test = data.select_rows(test_idx);
    const Scorer scorer = learner(train);
    report.folds.push_back(score_fold(scorer, test, threshold, train.rows()));
  }
  report.summarize();
  return report;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] != 0 ? pos : neg).push_back(i);
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (const auto* cls : {&pos, &neg}) {
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(cls->size())));
    for (std::size_t i = 0; i < cls->size(); ++i) ((i < n_train) ? train : test).push_back((*cls)[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

EvalReport holdout(const Dataset& data, const Learner& learner, double train_fraction,
                          std::size_t repeats, std::uint64_t seed, double threshold) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train fraction must be in (0, 1)");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  const std::size_t pos = data.positives();
  if (pos < 2 || data.rows() - pos < 2) throw DataError("holdout needs at least 2 samples per class");
  EvalReport report;
  report.procedure = "holdout";
  report.train_fraction = train_fraction;
  report.repeats = repeats;
  report.seed = seed;
  report.threshold = threshold;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto [train_idx, test_idx] = stratified_split(data.labels(), train_fraction, hash_combine(seed, r));
    const Dataset train = data.select_rows(train_idx);
    const Dataset test = data.select_rows(test_idx);
    report.folds.push_back(score_fold(learner(train), test, threshold, train.rows()));
  }
  report.summarize();
  return report;
}

EvalReport cross_test(const BlrModel& model, const Dataset& data, double threshold) {
  std::vector<std::size_t> cols;
  for (const auto& name : model.feature_names) {
    const std::size_t j = data.column_index(name);
    if (j == data.cols()) throw DataError("schema mismatch: dataset lacks column '" + name + "'");
    cols.push_back(j);
  }
  const Scorer scorer = [&](std::span<const double> x) {
    std::vector<double> sub(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) sub[k] = x[cols[k]];
    return predict_proba(model, sub);
  };
  EvalReport report;
  report.procedure = "cross-test";
  report.threshold = threshold;
  report.folds.push_back(score_fold(scorer, data, threshold, 0));
  report.summarize();
  return report;
}

std::vector<TimeReportRow> time_to_tweet_report(const EventLog& log, const Topic& topic,
                                                       std::span<const Dataset> datasets,
                                                       std::span<const BlrModel> models) {
  if (datasets.size() != kBinCount || models.size() != kBinCount) {
    throw DataError("time report needs four bin datasets and four bin models");
  }
  std::array<double, kBinCount> posts{};
  std::array<double, kBinCount> forwards{};
  for (const auto& r : log.records()) {
    const auto b = static_cast<std::size_t>(TimeBin::of(r.timestamp).index);
    if (r.kind == EventKind::tweet && is_relevant(r, topic)) posts[b] += 1;
    if (is_forward(r.kind) && r.ref_event) {
      const EventRecord* ref = log.find(*r.ref_event);
      if (ref && is_relevant(*ref, topic)) forwards[b] += 1;
    }
  }
  double total_posts = 0;
  double total_forwards = 0;
  for (std::size_t b = 0; b < kBinCount; ++b) {
    total_posts += posts[b];
    total_forwards += forwards[b];
  }
  std::vector<TimeReportRow> rows(kBinCount);
  std::size_t best = 0;
  for (std::size_t b = 0; b < kBinCount; ++b) {
    auto& row = rows[b];
    row.bin = static_cast<int>(b);
    row.post_share = total_posts > 0 ? posts[b] / total_posts : 0.0;
    row.diffused_share = total_forwards > 0 ? forwards[b] / total_forwards : 0.0;
    const auto& data = datasets[b];
    const auto& model = models[b];
    std::vector<std::size_t> cols;
    for (const auto& name : model.feature_names) {
      const std::size_t j = data.column_index(name);
      if (j == data.cols()) throw DataError("schema mismatch: dataset lacks column '" + name + "'");
      cols.push_back(j);
    }
    double sum = 0;
    std::vector<double> sub(cols.size());
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t k = 0; k < cols.size(); ++k) sub[k] = data.at(i, cols[k]);
      sum += predict_proba(model, sub);
    }
    row.mean_pred = data.rows() > 0 ? sum / static_cast<double>(data.rows()) : 0.0;
    if (row.diffused_share > rows[best].diffused_share) best = b;
  }
  rows[best].best = true;
  return rows;
}

void write_time_report_csv(std::ostream& out, std::span<const TimeReportRow> rows) {
  out << "bin,post_share,diffused_share,mean_pred,best\n";
  for (const auto& r : rows) {
    out << r.bin << ',' << format_value(r.post_share) << ',' << format_value(r.diffused_share) << ','
        << format_value(r.mean_pred) << ',' << (r.best ? 1 : 0) << '\n';
  }
}

}  // namespace midmod
