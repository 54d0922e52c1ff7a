#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "midmod/forest.hpp"

using namespace midmod;

namespace {

ForestOptions small(std::uint64_t seed = 1) {
  ForestOptions o;
  o.n_trees = 40;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Forest, PlantedThresholdFeatureRanksFirst) {
  const auto data = fixture::random_dataset(600, 12, 3, [](const std::vector<double>& x, Rng&) {
    return x[7] > 0.5 ? 1 : 0;
  });
  const auto m = fit_forest(data, small());
  const auto r = importance_ranking(m);
  EXPECT_EQ(r.front().index, 7u);
  EXPECT_EQ(r.front().name, "f7");
  EXPECT_GE(forest_auc(m, data), 0.99);
}

TEST(Forest, ImportancesSumToOneAndSplitsAreInRange) {
  const auto data = fixture::logistic_dataset(300, 9, {1, -1}, 0, 4);
  const auto m = fit_forest(data, small());
  EXPECT_NEAR(std::accumulate(m.importances.begin(), m.importances.end(), 0.0), 1.0, 1e-9);
  for (double v : m.importances) EXPECT_GE(v, 0.0);
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes) {
      EXPECT_LT(n.feature, 9);
      if (n.feature >= 0) EXPECT_GT(n.gain, 0.0);
      EXPECT_NEAR(n.p0 + n.p1, 1.0, 1e-12);
    }
  }
  EXPECT_EQ(importance_ranking(m).size(), 9u);
}

TEST(Forest, PureLeafProbabilities) {
  const auto data = fixture::random_dataset(100, 2, 5, [](const std::vector<double>& x, Rng&) { return x[0] > 0; });
  const auto m = fit_forest(data, small());
  const std::vector<double> far_pos{5, 0}, far_neg{-5, 0};
  EXPECT_EQ(m.trees.front().predict(far_pos), 1.0);
  EXPECT_EQ(m.trees.front().predict(far_neg), 0.0);
}

TEST(Forest, SameSeedSameTrees) {
  const auto data = fixture::logistic_dataset(200, 6, {1}, 0, 6);
  const auto a = fit_forest(data, small(9));
  const auto b = fit_forest(data, small(9));
  ASSERT_EQ(a.trees.size(), b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    ASSERT_EQ(a.trees[t].nodes.size(), b.trees[t].nodes.size());
    for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
      EXPECT_EQ(a.trees[t].nodes[k].feature, b.trees[t].nodes[k].feature);
      EXPECT_EQ(a.trees[t].nodes[k].threshold, b.trees[t].nodes[k].threshold);
    }
  }
  EXPECT_EQ(a.importances, b.importances);
  EXPECT_NE(fit_forest(data, small(10)).importances, a.importances);
}

TEST(Forest, ShuffledRowsGiveIdenticalImportancesAfterCanonicalSort) {
  const auto data = fixture::logistic_dataset(250, 5, {1, 0.5}, 0, 7);
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(3);
  rng.shuffle(order);
  const auto shuffled = data.select_rows(order);
  EXPECT_EQ(fit_forest(data.canonical(), small()).importances,
            fit_forest(shuffled.canonical(), small()).importances);
}

TEST(Forest, OutOfBagIsDisjointFromBootstrap) {
  const auto data = fixture::logistic_dataset(120, 3, {1}, 0, 8);
  const auto m = fit_forest(data, small());
  for (const auto& t : m.trees) {
    const auto oob = t.out_of_bag(data.rows());
    std::vector<std::uint32_t> both;
    std::set_intersection(oob.begin(), oob.end(), t.in_bag.begin(), t.in_bag.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
    EXPECT_EQ(oob.size() + t.in_bag.size(), data.rows());
  }
}

TEST(Forest, NoiseLabelsHaveFlatImportances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = fixture::random_dataset(400, 10, 100 + seed, [](const std::vector<double>&, Rng& rng) {
      return rng.bernoulli(0.5) ? 1 : 0;
    });
    const auto m = fit_forest(data, small(seed));
    const double mean = 1.0 / 10;
    EXPECT_LE(*std::max_element(m.importances.begin(), m.importances.end()), 3 * mean);
  }
}

TEST(Forest, RandomScoresGiveChanceAuc) {
  const auto train = fixture::random_dataset(300, 4, 31, [](const std::vector<double>&, Rng& rng) { return rng.bernoulli(0.5); });
  const auto test = fixture::random_dataset(1000, 4, 32, [](const std::vector<double>&, Rng& rng) { return rng.bernoulli(0.5); });
  EXPECT_NEAR(forest_auc(fit_forest(train, small()), test), 0.5, 0.03);
}

TEST(TopK, SelectionAndSlicing) {
  const auto data = fixture::logistic_dataset(200, 55, {2, 1}, 0, 10);
  const auto r = importance_ranking(fit_forest(data, small()));
  ASSERT_EQ(r.size(), 55u);
  EXPECT_EQ(select_top_k(r, 15).size(), 15u);
  const auto all = select_top_k(r, 55);
  EXPECT_EQ(all.size(), 55u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_THROW(select_top_k(r, 0), ConfigError);
  EXPECT_THROW(select_top_k(r, 56), ConfigError);

  const auto ten = select_top_k(r, 10);
  const auto sliced = data.select_columns(ten);
  ASSERT_EQ(sliced.cols(), 10u);
  for (std::size_t k = 0; k < ten.size(); ++k) {
    EXPECT_EQ(sliced.columns()[k], data.columns()[ten[k]]);
    if (k > 0) EXPECT_LT(ten[k - 1], ten[k]);
  }
}

TEST(TopK, RankingTiesBreakByIndex) {
  ForestModel m;
  m.feature_names = {"a", "b", "c", "d"};
  m.importances = {0.25, 0.25, 0.4, 0.1};
  const auto r = importance_ranking(m);
  EXPECT_EQ(r[0].index, 2u);
  EXPECT_EQ(r[1].index, 0u);
  EXPECT_EQ(r[2].index, 1u);
}

TEST(TopK, CsvRoundTripAndPooling) {
  ForestModel a, b;
  a.feature_names = b.feature_names = {"a", "b", "c"};
  a.importances = {0.5, 0.3, 0.2};
  b.importances = {0.1, 0.3, 0.6};
  const std::vector<ForestModel> both{a, b};
  const auto pooled = pooled_ranking(both);
  EXPECT_EQ(pooled[0].name, "c");
  EXPECT_NEAR(pooled[0].importance, 0.4, 1e-12);
  std::ostringstream out;
  write_ranking_csv(out, pooled);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "rank,feature_name,importance");
  std::istringstream in(out.str());
  const auto back = read_ranking_csv(in, a.feature_names);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].index, 2u);
  std::istringstream bad("nope\n");
  EXPECT_THROW(read_ranking_csv(bad, a.feature_names), DataError);
}

TEST(Forest, Errors) {
  const auto one = fixture::random_dataset(20, 2, 1, [](const std::vector<double>&, Rng&) { return 0; });
  EXPECT_THROW(fit_forest(one), LearnerError);
  auto opt = small();
  opt.n_trees = 0;
  EXPECT_THROW(fit_forest(fixture::logistic_dataset(20, 2, {3}, 0, 1), opt), ConfigError);
}
