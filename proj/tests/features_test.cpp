#include <gtest/gtest.h>

#include <sstream>

#include "midmod/features.hpp"

using namespace midmod;

namespace {

constexpr Timestamp T = 1538352000;  // midnight UTC
constexpr Timestamp H = 3600;

EventRecord tweet(EventId id, NodeId user, Timestamp ts, std::vector<std::string> tokens) {
  EventRecord r;
  r.event_id = id;
  r.user = user;
  r.timestamp = ts;
  r.tokens = std::move(tokens);
  return r;
}

EventRecord react(EventId id, NodeId user, Timestamp ts, EventKind kind, EventId ref, NodeId author) {
  EventRecord r;
  r.event_id = id;
  r.user = user;
  r.timestamp = ts;
  r.kind = kind;
  r.ref_event = ref;
  r.ref_author = author;
  return r;
}

// Twelve events over users 1, 2 and 3; every expected value below was
// worked out by hand from this list.
EventLog fixture() {
  std::vector<EventRecord> r;
  r.push_back(tweet(1, 1, T + 1 * H, {"coffee", "good"}));
  r.back().hashtag_count = 1;
  r.back().url_count = 1;
  r.back().sentiment = 0.5;
  r.push_back(tweet(2, 1, T + 7 * H, {"@u3", "hello"}));
  r.back().mentions = {3};
  r.back().media_count = 1;
  r.back().sentiment = -0.2;
  r.push_back(tweet(3, 1, T + 13 * H, {"plain"}));
  r.push_back(react(4, 2, T + 3 * H, EventKind::retweet, 1, 1));
  r.back().hashtag_count = 1;
  r.back().url_count = 1;
  r.push_back(react(5, 3, T + 9 * H, EventKind::quote, 2, 1));
  r.back().tokens = {"nice"};
  r.back().mentions = {1};
  r.push_back(react(6, 2, T + 4 * H, EventKind::favorite, 1, 1));
  r.push_back(react(7, 3, T + 20 * H, EventKind::favorite, 3, 1));
  r.push_back(react(8, 2, T + 19 * H, EventKind::reply, 3, 1));
  r.back().mentions = {1};
  r.push_back(tweet(9, 2, T + 25 * H, {"coffee"}));
  r.back().mentions = {1, 1};
  r.back().sentiment = 0.3;
  r.push_back(react(10, 3, T + 26 * H, EventKind::retweet, 9, 2));
  r.push_back(react(11, 1, T + 30 * H, EventKind::favorite, 9, 2));
  r.push_back(tweet(12, 1, T + 48 * H, {"bye"}));
  r.back().url_count = 2;
  r.back().sentiment = -0.9;
  return EventLog(std::move(r));
}

SocialGraph fixture_graph() {
  SocialGraph g;
  g.add_edge(1, 2);
  g.add_edge(1, 3);
  g.add_edge(2, 3);
  g.add_edge(4, 2);
  return g;
}

std::vector<UserProfile> fixture_profiles() {
  UserProfile p1{1, T + 48 * H - 100 * kSecondsPerDay, true, 10, 4};
  UserProfile p2{2, T + 48 * H - 50 * kSecondsPerDay, false, 3, 0};
  return {p1, p2};
}

const Topic kCoffee("coffee", {"coffee"});

}  // namespace

TEST(TimeBin, UtcSixHourSegments) {
  EXPECT_EQ(TimeBin::of(T).index, 0);
  EXPECT_EQ(TimeBin::of(T + 6 * H - 1).index, 0);
  EXPECT_EQ(TimeBin::of(T + 6 * H).index, 1);
  EXPECT_EQ(TimeBin::of(T + 12 * H).index, 2);
  EXPECT_EQ(TimeBin::of(T + 23 * H + 3599).index, 3);
  EXPECT_EQ(TimeBin::of(T + 24 * H).index, 0);
}

TEST(EdgeSchema, FiftyFiveNamedColumns) {
  const auto& names = edge_feature_names();
  ASSERT_EQ(names.size(), 55u);
  EXPECT_EQ(names.front(), "src_followers_count");
  EXPECT_EQ(names[27], "dst_followers_count");
  EXPECT_EQ(names[kSocialHomogeneityColumn], "social_homogeneity");
  std::size_t temporal = 0;
  for (std::size_t j = 0; j < names.size(); ++j) temporal += is_temporal_column(j) ? 1 : 0;
  EXPECT_EQ(temporal, 8u);
  EXPECT_EQ(edge_feature_index("dst_positive_polarity"), 27u + kPositivePolarity);
  EXPECT_FALSE(edge_feature_index("src_nonsense").has_value());
}

TEST(Features, HandComputedSourceVector) {
  const EventLog log = fixture();
  const SocialGraph g = fixture_graph();
  const auto profiles = fixture_profiles();
  const FeatureContext ctx(log, kCoffee);
  const double days = (47.0 * H) / kSecondsPerDay;
  const auto f = ctx.user_features(1, 2, TimeBin{0}, &profiles[0], &g);
  const double expected[27] = {
      10,   4,     2.0,  0.04, 0.25, 1,     3 / days, 0.5,  0.25, 0,    0,    4 / days, 0.25, 0.25,
      0.5,  0,     0.25, 0,    1,    0.5,   1,        0.25, 0.5,  0.5,  0.5,  0,        (2.0 / 47 + 1) / 2};
  for (std::size_t k = 0; k < kUserFeatureCount; ++k) {
    EXPECT_NEAR(f[k], expected[k], 1e-12) << kUserFeatureNames[k];
  }
}

TEST(Features, HandComputedDestinationVector) {
  const EventLog log = fixture();
  const SocialGraph g = fixture_graph();
  const auto profiles = fixture_profiles();
  const FeatureContext ctx(log, kCoffee);
  const double days = (47.0 * H) / kSecondsPerDay;
  const auto f = ctx.user_features(2, 1, TimeBin{0}, &profiles[1], &g);
  const double expected[27] = {
      3, 0, 3, 0.02, 0, 1, 0, 1, 0, 1, 0.02, 3 / days, 1.5, 2.0 / 3,
      0, 1, 0, 0,    0, 1, 1, 1, 0, 2.0 / 3, 1, 2.0 / 3, 1.0 / 47};
  for (std::size_t k = 0; k < kUserFeatureCount; ++k) {
    EXPECT_NEAR(f[k], expected[k], 1e-12) << kUserFeatureNames[k];
  }
}

TEST(Features, EdgeSampleLayout) {
  const EventLog log = fixture();
  const SocialGraph g = fixture_graph();
  const auto profiles = fixture_profiles();
  const FeatureContext ctx(log, kCoffee);
  const auto s = make_edge_sample(ctx, g, 1, 2, TimeBin{0}, &profiles[0], &profiles[1]);
  const auto src = ctx.user_features(1, 2, TimeBin{0}, &profiles[0], &g);
  const auto dst = ctx.user_features(2, 1, TimeBin{0}, &profiles[1], &g);
  for (std::size_t k = 0; k < kUserFeatureCount; ++k) {
    EXPECT_EQ(s.x[k], src[k]);
    EXPECT_EQ(s.x[kUserFeatureCount + k], dst[k]);
  }
  // N(1) = {3}, N(2) = {3, 4}.
  EXPECT_DOUBLE_EQ(s.x[kSocialHomogeneityColumn], 0.5);
  EXPECT_EQ(s.x[kSocialHomogeneityColumn], g.social_homogeneity(1, 2));
  EXPECT_EQ(s.label, 1);
}

TEST(Features, UserWithoutPostsGetsDefaults) {
  const EventLog log = fixture();
  const FeatureContext ctx(log, kCoffee);
  const auto f = ctx.user_features(99, 1, TimeBin{2}, nullptr);
  for (std::size_t k = 0; k < kUserFeatureCount; ++k) {
    if (k == kAvgTimeToFirstRetweet) {
      EXPECT_EQ(f[k], 1.0);  // the full window, normalized
    } else {
      EXPECT_EQ(f[k], 0.0) << kUserFeatureNames[k];
    }
  }
}

TEST(Features, UrlRatioDefinition) {
  std::vector<EventRecord> r;
  for (int i = 0; i < 10; ++i) {
    r.push_back(tweet(i + 1, 5, T + i * H, {"w"}));
    r.back().url_count = i < 4 ? 1 : 0;
  }
  const EventLog log(std::move(r));
  const FeatureContext ctx(log, kCoffee);
  EXPECT_DOUBLE_EQ(ctx.user_features(5, 0, TimeBin{0}, nullptr)[kTweetsWithUrlRatio], 0.4);
}

TEST(Labels, ForwardOfTopicTweetDiffuses) {
  const EventLog log = fixture();
  EXPECT_EQ(label_edge(1, 2, log, kCoffee), 1);
  EXPECT_EQ(label_edge(2, 3, log, kCoffee), 1);
  // 3 quoted 1's off-topic tweet only.
  EXPECT_EQ(label_edge(1, 3, log, kCoffee), 0);
  const FeatureContext ctx(log, kCoffee);
  EXPECT_EQ(ctx.label(1, 2), 1);
  EXPECT_EQ(ctx.label(2, 3), 1);
  EXPECT_EQ(ctx.label(1, 3), 0);
}

TEST(Labels, ReplyDoesNotDiffuse) {
  const EventLog log({tweet(1, 1, T, {"coffee"}), react(2, 2, T + H, EventKind::reply, 1, 1)});
  EXPECT_EQ(label_edge(1, 2, log, kCoffee), 0);
  EXPECT_EQ(FeatureContext(log, kCoffee).label(1, 2), 0);
}

TEST(Labels, LabelForwardIsNotAnInteraction) {
  const EventLog log({tweet(1, 1, T, {"coffee"}), react(2, 2, T + H, EventKind::retweet, 1, 1)});
  const FeatureContext ctx(log, kCoffee);
  EXPECT_EQ(ctx.label(1, 2), 1);
  EXPECT_FALSE(ctx.active_interaction(2, 1));
}

TEST(Labels, MonotoneUnderAddedForwards) {
  std::vector<EventRecord> r = {tweet(1, 1, T, {"coffee"}), tweet(2, 1, T + H, {"tea"})};
  EventId next = 3;
  Rng rng(3);
  int before = 0;
  for (int step = 0; step < 20; ++step) {
    const EventId ref = rng.bernoulli(0.5) ? 1 : 2;
    r.push_back(react(next++, 2, T + (step + 2) * H, rng.bernoulli(0.5) ? EventKind::retweet : EventKind::quote, ref, 1));
    const int now = label_edge(1, 2, EventLog(r), kCoffee);
    EXPECT_GE(now, before);
    before = now;
  }
  EXPECT_EQ(before, 1);
}

TEST(BuildDataset, OneSamplePerEdgeWithProfiles) {
  const EventLog log = fixture();
  const SocialGraph g = fixture_graph();
  const auto pm = index_profiles(fixture_profiles());
  const auto build = build_dataset(g, log, pm, kCoffee, TimeBin{1});
  ASSERT_EQ(build.samples.size(), 1u);
  EXPECT_EQ(build.skipped_missing_profile, 3u);
  EXPECT_EQ(build.samples[0].x.size(), 55u);

  SocialGraph tri;
  tri.add_edge(1, 2);
  tri.add_edge(2, 1);
  tri.add_edge(4, 1);
  std::vector<UserProfile> all = fixture_profiles();
  all.push_back({4, T, false, 1, 0});
  const auto b3 = build_dataset(tri, log, index_profiles(all), kCoffee, TimeBin{1});
  EXPECT_EQ(b3.samples.size(), 3u);
}

TEST(BuildDataset, OnlyTemporalColumnsVaryAcrossBins) {
  const EventLog log = fixture();
  const SocialGraph g = fixture_graph();
  std::vector<UserProfile> all = fixture_profiles();
  all.push_back({3, T, true, 0, 2});
  all.push_back({4, T, false, 1, 0});
  const auto bins = build_all_bins(g, log, index_profiles(all), kCoffee);
  bool temporal_differs = false;
  for (std::size_t b = 1; b < kBinCount; ++b) {
    ASSERT_EQ(bins[b].samples.size(), bins[0].samples.size());
    for (std::size_t i = 0; i < bins[0].samples.size(); ++i) {
      const auto& a = bins[0].samples[i];
      const auto& c = bins[b].samples[i];
      EXPECT_EQ(a.label, c.label);
      for (std::size_t j = 0; j < kEdgeFeatureCount; ++j) {
        if (is_temporal_column(j)) temporal_differs = temporal_differs || a.x[j] != c.x[j];
        else EXPECT_EQ(a.x[j], c.x[j]) << edge_feature_names()[j];
      }
    }
  }
  EXPECT_TRUE(temporal_differs);
}

TEST(BuildDataset, CsvRoundTripKeepsHeader) {
  const EventLog log = fixture();
  const SocialGraph g = fixture_graph();
  std::vector<UserProfile> all = fixture_profiles();
  all.push_back({3, T, true, 0, 2});
  const Dataset d = to_dataset(build_dataset(g, log, index_profiles(all), kCoffee, TimeBin{0}).samples);
  std::ostringstream out;
  write_csv(out, d);
  const std::string text = out.str();
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 58);  // src, dst, bin, 55 features, label
  std::istringstream in(text);
  const Dataset back = read_csv(in);
  EXPECT_EQ(back.columns(), d.columns());
  ASSERT_EQ(back.rows(), d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(back.label(i), d.label(i));
    for (std::size_t j = 0; j < d.cols(); ++j) EXPECT_NEAR(back.at(i, j), d.at(i, j), 1e-8 * (1 + std::abs(d.at(i, j))));
  }
}

TEST(Features, RatiosStayInUnitIntervalOnRandomLogs) {
  Rng rng(11);
  const Topic topic("t", {"k0", "k1"});
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<EventRecord> recs;
    const std::size_t users = 2 + rng.below(6);
    for (EventId id = 1; id <= 60; ++id) {
      const NodeId user = rng.below(users);
      const Timestamp ts = T + static_cast<Timestamp>(rng.below(5 * 86400));
      const std::size_t kind = recs.empty() ? 0 : rng.below(5);
      EventRecord r = kind == 0 ? tweet(id, user, ts, {}) : [&] {
        const auto& ref = recs[rng.below(recs.size())];
        return react(id, user, ts, static_cast<EventKind>(kind), ref.event_id, ref.user);
      }();
      if (rng.bernoulli(0.3)) r.tokens.push_back("k" + std::to_string(rng.below(3)));
      if (rng.bernoulli(0.3)) r.tokens.insert(r.tokens.begin(), "@x");
      r.hashtag_count = rng.below(3);
      r.url_count = rng.below(2);
      r.media_count = rng.below(2);
      for (std::size_t m = rng.below(3); m > 0; --m) r.mentions.push_back(rng.below(users));
      if (rng.bernoulli(0.7)) r.sentiment = rng.uniform(-1, 1);
      recs.push_back(std::move(r));
    }
    const EventLog log(recs);
    const FeatureContext ctx(log, topic);
    for (NodeId u = 0; u < users; ++u) {
      for (int b = 0; b < 4; ++b) {
        const UserProfile p{u, T - 86400, true, rng.below(50), rng.below(50)};
        const auto f = ctx.user_features(u, (u + 1) % users, TimeBin{b}, &p);
        for (std::size_t k = 0; k < kUserFeatureCount; ++k) {
          EXPECT_TRUE(std::isfinite(f[k]));
          EXPECT_GE(f[k], 0.0);
          if (kUserFeatureKinds[k] == FeatureKind::ratio || kUserFeatureKinds[k] == FeatureKind::boolean) {
            EXPECT_LE(f[k], 1.0) << kUserFeatureNames[k];
          }
        }
      }
    }
  }
}
