#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "midmod/eval.hpp"
#include "midmod/simulator.hpp"

using namespace midmod;

namespace {

const BlrOptions kBlr{};

Dataset balanced(std::size_t n, std::uint64_t seed) {
  return fixture::logistic_dataset(n, 4, {2.0, -1.5}, 0.0, seed);
}

}  // namespace

TEST(Folds, EverySampleTestedOnceAndRatioKept) {
  std::vector<int> labels(100);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i < 40 ? 1 : 0;
  const auto fold = stratified_folds(labels, 10, 3);
  std::vector<int> pos(10, 0), total(10, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ASSERT_LT(fold[i], 10u);
    total[fold[i]] += 1;
    pos[fold[i]] += labels[i];
  }
  for (int f = 0; f < 10; ++f) {
    EXPECT_EQ(total[f], 10);
    EXPECT_EQ(pos[f], 4);
  }
  EXPECT_EQ(stratified_folds(labels, 10, 3), fold);
  EXPECT_NE(stratified_folds(labels, 10, 4), fold);
}

TEST(Folds, TooFewPerClass) {
  std::vector<int> labels(50, 0);
  for (int i = 0; i < 9; ++i) labels[i] = 1;
  EXPECT_THROW(stratified_folds(labels, 10, 0), DataError);
}

TEST(CrossValidate, TestSetsPartitionTheData) {
  const auto data = balanced(100, 1);
  std::multiset<NodeId> seen;
  const Learner spy = [&](const Dataset& train) -> Scorer {
    std::set<NodeId> in_train;
    for (std::size_t i = 0; i < train.rows(); ++i) in_train.insert(train.key(i).src);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (!in_train.count(data.key(i).src)) seen.insert(data.key(i).src);
    }
    return [](std::span<const double>) { return 0.5; };
  };
  const auto r = cross_validate(data, spy, 10, 7);
  ASSERT_EQ(r.folds.size(), 10u);
  std::size_t tested = 0;
  for (const auto& f : r.folds) {
    tested += f.test_size;
    EXPECT_EQ(f.train_size + f.test_size, 100u);
  }
  EXPECT_EQ(tested, 100u);
  EXPECT_EQ(seen.size(), 100u);
  for (std::size_t i = 0; i < data.rows(); ++i) EXPECT_EQ(seen.count(data.key(i).src), 1u);
}

TEST(CrossValidate, ConstantScorerHasChanceAuc) {
  const auto r = cross_validate(balanced(200, 2), constant_learner(0.5), 10, 1);
  EXPECT_NEAR(r.auc.mean, 0.5, 0.05);
}

TEST(CrossValidate, LogisticDataIsLearned) {
  const auto r = cross_validate(balanced(600, 3), blr_learner(kBlr), 10, 1);
  EXPECT_GE(r.auc.mean, 0.85);
  EXPECT_GE(r.f1.mean, 0.6);
  for (const auto& f : r.folds) {
    for (double v : {f.metrics.precision, f.metrics.recall, f.metrics.f1, f.auc}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_GT(r.auc.stddev, 0.0);
}

TEST(CrossValidate, SelectionIsFittedInsideEachFold) {
  // Learner sees only the training slice; the selecting variant must still
  // produce a scorer that accepts full-schema rows.
  ForestOptions fo;
  fo.n_trees = 20;
  const auto data = fixture::logistic_dataset(300, 20, {2, -2, 1}, 0, 4);
  const auto r = cross_validate(data, blr_learner(kBlr, SelectionOptions{3, fo}), 5, 2);
  EXPECT_GE(r.auc.mean, 0.8);
  EXPECT_THROW(cross_validate(data, constant_learner(0.5), 1, 0), ConfigError);
}

TEST(Holdout, SizesRowsAndReproducibility) {
  const auto data = balanced(100, 5);
  const auto r = holdout(data, blr_learner(kBlr), 0.8, 10, 9);
  ASSERT_EQ(r.folds.size(), 10u);
  for (const auto& f : r.folds) {
    EXPECT_NEAR(static_cast<double>(f.train_size), 80.0, 1.0);
    EXPECT_EQ(f.train_size + f.test_size, 100u);
  }
  const auto [a_train, a_test] = stratified_split(data.labels(), 0.8, 11);
  const auto [b_train, b_test] = stratified_split(data.labels(), 0.8, 11);
  EXPECT_EQ(a_train, b_train);
  EXPECT_EQ(a_test, b_test);
  const auto [c_train, c_test] = stratified_split(data.labels(), 0.8, 12);
  EXPECT_NE(a_train, c_train);
  const auto again = holdout(data, blr_learner(kBlr), 0.8, 10, 9);
  EXPECT_EQ(again.f1.mean, r.f1.mean);
  EXPECT_THROW(holdout(data, constant_learner(0.5), 1.0, 10, 0), ConfigError);
  EXPECT_THROW(holdout(data, constant_learner(0.5), 0.8, 0, 0), ConfigError);
}

TEST(CrossTest, OwnTrainingDataIsAnOptimisticBound) {
  const auto data = balanced(400, 6);
  const auto model = fit_blr(data);
  const auto self = cross_test(model, data);
  const auto held = holdout(data, blr_learner(kBlr), 0.8, 10, 1);
  EXPECT_GE(self.f1.mean, held.f1.mean - 0.02);
  EXPECT_EQ(self.folds.size(), 1u);
  EXPECT_EQ(self.folds[0].test_size, 400u);
}

TEST(CrossTest, DisjointPlantedRegimesTransferPoorly) {
  const auto a = fixture::logistic_dataset(500, 6, {3, 3, 0, 0}, 0, 7);
  const auto b = fixture::logistic_dataset(500, 6, {0, 0, 3, 3}, 0, 8);
  const auto model_a = fit_blr(a);
  const auto within = holdout(a, blr_learner(kBlr), 0.8, 5, 1);
  const auto across = cross_test(model_a, b);
  EXPECT_LT(across.f1.mean, within.f1.mean);
  EXPECT_LT(across.auc.mean, 0.65);
}

TEST(CrossTest, MatchesColumnsByNameAndRejectsMissingOnes) {
  const auto data = balanced(200, 9);
  const std::vector<std::size_t> keep{3, 0};
  const auto model = fit_blr(data.select_columns(keep));
  const auto r = cross_test(model, data);
  const auto direct = cross_test(model, data.select_columns(keep));
  EXPECT_EQ(r.auc.mean, direct.auc.mean);
  const std::vector<std::size_t> missing{1, 2};
  EXPECT_THROW(cross_test(model, data.select_columns(missing)), DataError);
}

TEST(Report, JsonAndCsvShapes) {
  auto r = cross_validate(balanced(100, 10), blr_learner(kBlr), 5, 3);
  const EvalReport copy = r;
  r.per_bin[2] = copy;
  const auto j = to_json(r);
  EXPECT_EQ(j["config"]["k"], 5);
  EXPECT_EQ(j["config"]["seed"], 3);
  EXPECT_EQ(j["folds"].size(), 5u);
  EXPECT_TRUE(j["folds"][0]["confusion"].contains("tp"));
  EXPECT_TRUE(j["per_bin"].contains("2"));
  EXPECT_DOUBLE_EQ(j["f1"]["mean"].get<double>(), r.f1.mean);
  std::ostringstream out;
  write_summary_csv(out, r);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "metric,mean,stddev");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(Report, SummaryUsesSampleStddev) {
  EvalReport r;
  for (double f : {0.2, 0.4, 0.6}) {
    FoldResult x;
    x.metrics.f1 = f;
    r.folds.push_back(x);
  }
  r.summarize();
  EXPECT_NEAR(r.f1.mean, 0.4, 1e-12);
  EXPECT_NEAR(r.f1.stddev, 0.2, 1e-12);
}

namespace {

// Four trivially trained bin models over small stand-in datasets.
std::pair<std::vector<Dataset>, std::vector<BlrModel>> stand_in_bins() {
  std::vector<Dataset> data;
  std::vector<BlrModel> models;
  for (int b = 0; b < 4; ++b) {
    data.push_back(fixture::logistic_dataset(60, 2, {1.0 + b}, 0, 50 + b));
    models.push_back(fit_blr(data.back()));
  }
  return {data, models};
}

std::vector<TimeReportRow> report_for(const std::array<double, kBinCount>& profile, std::size_t users) {
  BehaviorOptions o;
  o.mean_daily_events = 0.1;
  o.bin_profile = profile;
  const auto g = generate_graph(users, 2, 1);
  const auto b = generate_behaviors(users, o, 2);
  const std::vector<Topic> topics{synthetic_topic(0)};
  const auto bg = generate_background(g, b, topics, kDefaultStartTime, 30, 3);
  const EventLog log(bg.events);
  const auto [data, models] = stand_in_bins();
  return time_to_tweet_report(log, topics[0], data, models);
}

}  // namespace

TEST(TimeReport, AllPostsInOneBin) {
  const Topic topic("t", {"go"});
  std::vector<EventRecord> recs;
  for (int i = 0; i < 5; ++i) {
    EventRecord r;
    r.event_id = i + 1;
    r.user = i;
    r.timestamp = kDefaultStartTime + i * kSecondsPerDay + kSecondsPerBin + 60;
    r.tokens = {"go"};
    recs.push_back(r);
  }
  EventRecord f;
  f.event_id = 99;
  f.user = 7;
  f.kind = EventKind::retweet;
  f.ref_event = 1;
  f.ref_author = 0;
  f.timestamp = kDefaultStartTime + 3 * kSecondsPerBin + 1;
  recs.push_back(f);
  const auto [data, models] = stand_in_bins();
  const auto rows = time_to_tweet_report(EventLog(recs), topic, data, models);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].post_share, 1.0);
  EXPECT_EQ(rows[0].post_share + rows[2].post_share + rows[3].post_share, 0.0);
  EXPECT_EQ(rows[3].diffused_share, 1.0);
  EXPECT_TRUE(rows[3].best);
  EXPECT_FALSE(rows[1].best);
  for (const auto& r : rows) {
    EXPECT_GT(r.mean_pred, 0.0);
    EXPECT_LT(r.mean_pred, 1.0);
  }
  std::ostringstream out;
  write_time_report_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "bin,post_share,diffused_share,mean_pred,best");
}

TEST(TimeReport, UniformBehaviorGivesQuarterShares) {
  const auto rows = report_for({0.25, 0.25, 0.25, 0.25}, 5000);
  for (const auto& r : rows) EXPECT_NEAR(r.post_share, 0.25, 0.02) << "bin " << r.bin;
}

TEST(TimeReport, PlantedSkewIsReproduced) {
  const auto rows = report_for({0.125, 0.375, 0.125, 0.375}, 5000);
  EXPECT_NEAR(rows[1].post_share + rows[3].post_share, 0.75, 0.03);
}

TEST(TimeReport, NeedsFourBins) {
  const auto [data, models] = stand_in_bins();
  const std::span<const Dataset> three(data.data(), 3);
  EXPECT_THROW(time_to_tweet_report(EventLog{}, synthetic_topic(0), three, models), DataError);
}
