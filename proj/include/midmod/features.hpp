#pragma once

// Per-user behavioural features, pair labels and the 55-column edge samples
// (source 27, destination 27, social homogeneity) for one 6-hour UTC bin.
//
// Vocabulary used below:
//   post      any authored record except a favorite
//   original  a record of kind tweet
//   forward   a retweet or quote; "retweeted" always means "forwarded"
//   reaction  any record with a ref_event (retweet, quote, reply, favorite)

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "midmod/dataset.hpp"
#include "midmod/eventlog.hpp"
#include "midmod/graph.hpp"

namespace midmod {

inline constexpr std::size_t kBinCount = 4;
inline constexpr std::size_t kUserFeatureCount = 27;
inline constexpr std::size_t kEdgeFeatureCount = 2 * kUserFeatureCount + 1;

// 0: 00:00-05:59, 1: 06:00-11:59, 2: 12:00-17:59, 3: 18:00-23:59 (UTC).
struct TimeBin {
  int index = 0;

  static TimeBin of(Timestamp ts) {
    Timestamp s = ts % kSecondsPerDay;
    if (s < 0) s += kSecondsPerDay;
    return TimeBin{static_cast<int>(s / kSecondsPerBin)};
  }
};

enum class FeatureKind { count, rate, ratio, boolean };

enum UserFeature : std::size_t {
  kFollowersCount,
  kFriendsCount,
  kFollowerFriendRatio,
  kTweetVolumeLifetime,
  kDirectedTweetRatio,
  kActiveInteraction,
  kMentionRate,
  kRetweetedTweetRatio,
  kTweetsWithHashtagsRatio,
  kRetweetsWithHashtagsRatio,
  kRetweetVolumeLifetime,
  kAvgTweetsPerDay,
  kAvgMentionsExclRetweets,
  kMentionsToTweetRatio,
  kTweetsWithUrlRatio,
  kRetweetsWithUrlRatio,
  kTweetsWithMediaRatio,
  kRetweetsWithMediaRatio,
  kHasDescription,
  kFavoritedToTweetRatio,
  kHasTopicKeywords,
  kPositivePolarity,
  kNegativePolarity,
  kTweetsInBinRatio,
  kTweetsRetweetedInBinRatio,
  kReactionsInBinRatio,
  kAvgTimeToFirstRetweet,
};

inline constexpr std::array<std::string_view, kUserFeatureCount> kUserFeatureNames = {
    "followers_count",
    "friends_count",
    "follower_friend_ratio",
    "tweet_volume_lifetime",
    "directed_tweet_ratio",
    "active_interaction",
    "mention_rate",
    "retweeted_tweet_ratio",
    "tweets_with_hashtags_ratio",
    "retweets_with_hashtags_ratio",
    "retweet_volume_lifetime",
    "avg_tweets_per_day",
    "avg_mentions_excl_retweets",
    "mentions_to_tweet_ratio",
    "tweets_with_url_ratio",
    "retweets_with_url_ratio",
    "tweets_with_media_ratio",
    "retweets_with_media_ratio",
    "has_description",
    "favorited_to_tweet_ratio",
    "has_topic_keywords",
    "positive_polarity",
    "negative_polarity",
    "tweets_in_bin_ratio",
    "tweets_retweeted_in_bin_ratio",
    "reactions_in_bin_ratio",
    "avg_time_to_first_retweet",
};

inline constexpr std::array<FeatureKind, kUserFeatureCount> kUserFeatureKinds = {
    FeatureKind::count,   FeatureKind::count,   FeatureKind::rate,
    FeatureKind::rate,    FeatureKind::ratio,   FeatureKind::boolean,
    FeatureKind::rate,    FeatureKind::ratio,   FeatureKind::ratio,
    FeatureKind::ratio,   FeatureKind::rate,    FeatureKind::rate,
    FeatureKind::rate,    FeatureKind::ratio,   FeatureKind::ratio,
    FeatureKind::ratio,   FeatureKind::ratio,   FeatureKind::ratio,
    FeatureKind::boolean, FeatureKind::ratio,   FeatureKind::boolean,
    FeatureKind::ratio,   FeatureKind::ratio,   FeatureKind::ratio,
    FeatureKind::ratio,   FeatureKind::ratio,   FeatureKind::ratio,
};

inline constexpr bool is_temporal_feature(std::size_t f) { return f >= kTweetsInBinRatio; }

struct UserFeatureVector {
  std::array<double, kUserFeatureCount> values{};

  double operator[](std::size_t f) const { return values[f]; }
  double& operator[](std::size_t f) { return values[f]; }
};

// Column order: src_<27 names>, dst_<27 names>, social_homogeneity.
const std::vector<std::string>& edge_feature_names();

inline constexpr std::size_t kSocialHomogeneityColumn = kEdgeFeatureCount - 1;

std::optional<std::size_t> edge_feature_index(std::string_view name);

bool is_temporal_column(std::size_t col);

struct EdgeSample {
  NodeId source = 0;
  NodeId destination = 0;
  TimeBin bin;
  std::array<double, kEdgeFeatureCount> x{};
  int label = 0;
};

Dataset to_dataset(std::span<const EdgeSample> samples);

// Aggregates computed in one pass over the log; every per-user feature is
// then an O(1) lookup. Immutable after construction.
class FeatureContext {
 public:
  FeatureContext(const EventLog& log, const Topic& topic, const Lexicon* lexicon = nullptr)
      : log_(&log), topic_(&topic) {
    const double window = log.window_seconds();
    for (const auto& r : log.records()) {
      auto& a = stats_[r.user];
      const int b = TimeBin::of(r.timestamp).index;
      const bool relevant = is_relevant(r, topic);
      if (is_post(r.kind)) {
        ++a.posts;
        ++a.posts_in_bin[b];
        if (!r.mentions.empty()) ++a.posts_with_mentions;
        if (r.kind != EventKind::retweet) {
          ++a.non_retweet_posts;
          a.non_retweet_mentions += r.mentions.size();
        }
      }
      if (is_reaction(r.kind)) {
        ++a.reactions;
        ++a.reactions_in_bin[b];
      }
      if (r.kind == EventKind::tweet) {
        ++a.originals;
        ++a.originals_in_bin[b];
        if (r.hashtag_count > 0) ++a.originals_with_hashtags;
        if (r.url_count > 0) ++a.originals_with_url;
        if (r.media_count > 0) ++a.originals_with_media;
        if (!r.tokens.empty() && !r.tokens.front().empty() && r.tokens.front()[0] == '@') {
          ++a.directed_originals;
        }
        if (relevant) ++a.topic_originals;
        const double s = r.sentiment ? *r.sentiment
                                     : (lexicon ? sentiment_score(r.tokens, *lexicon) : 0.0);
        if (s > 0) ++a.positive_originals;
        if (s < 0) ++a.negative_originals;
        std::optional<Timestamp> first_forward;
        for (std::size_t idx : log.reactions_to(r.event_id)) {
          const auto& re = log.records()[idx];
          if (re.kind == EventKind::favorite) ++a.favorites_received;
          if (is_forward(re.kind) && (!first_forward || re.timestamp < *first_forward)) {
            first_forward = re.timestamp;
          }
        }
        double delay = 1.0;
        if (first_forward) {
          ++a.originals_retweeted;
          ++a.originals_retweeted_in_bin[b];
          const double dt = static_cast<double>(*first_forward - r.timestamp);
          delay = std::clamp(dt, 0.0, window) / window;
        }
        a.first_retweet_delay_in_bin[b] += delay;
      }
      if (is_forward(r.kind)) {
        ++a.forwards;
        if (r.hashtag_count > 0) ++a.forwards_with_hashtags;
        if (r.url_count > 0) ++a.forwards_with_url;
        if (r.media_count > 0) ++a.forwards_with_media;
      }

      // Incoming mentions, one per record per mentioned user.
      std::vector<NodeId> mentioned = r.mentions;
      std::sort(mentioned.begin(), mentioned.end());
      mentioned.erase(std::unique(mentioned.begin(), mentioned.end()), mentioned.end());
      for (NodeId m : mentioned) {
        if (m != r.user) ++stats_[m].incoming_mentions;
      }

      // Label-defining forward: forward of a topic-relevant record of ref_author.
      bool label_forward = false;
      if (is_forward(r.kind) && r.ref_author && r.ref_event) {
        const EventRecord* ref = log.find(*r.ref_event);
        if (ref && is_relevant(*ref, topic)) {
          label_forward = true;
          diffused_.insert({*r.ref_author, r.user});
        }
      }
      // Interaction targets, excluding the label-defining target.
      if (r.ref_author && *r.ref_author != r.user &&
          !(label_forward)) {
        interactions_.insert({r.user, *r.ref_author});
      }
      for (NodeId m : mentioned) {
        if (m == r.user) continue;
        if (label_forward && m == *r.ref_author) continue;
        interactions_.insert({r.user, m});
      }
    }
  }

  const EventLog& log() const { return *log_; }
  const Topic& topic() const { return *topic_; }

  // 1 iff u forwarded a topic-relevant record authored by v.
  int label(NodeId v, NodeId u) const { return diffused_.count({v, u}) ? 1 : 0; }

  // Reply, mention, favorite or forward from `user` toward `partner`,
  // not counting the forwards that define diffusion labels.
  bool active_interaction(NodeId user, NodeId partner) const {
    return interactions_.count({user, partner}) != 0;
  }

  // Profile-derived values fall back to graph degrees when `profile` is null.
  UserFeatureVector user_features(NodeId user, NodeId partner, TimeBin bin,
                                  const UserProfile* profile,
                                  const SocialGraph* graph = nullptr) const {
    static const Aggregate kEmpty{};
    const auto it = stats_.find(user);
    const Aggregate& a = it == stats_.end() ? kEmpty : it->second;
    const auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    const double window_days = log_->window_days();

    double followers = 0;
    double friends = 0;
    double age_days = window_days;
    bool description = false;
    if (profile) {
      followers = static_cast<double>(profile->followers_count);
      friends = static_cast<double>(profile->friends_count);
      age_days = std::max(1.0, static_cast<double>(log_->window_end() - profile->account_created) /
                                   static_cast<double>(kSecondsPerDay));
      description = profile->has_description;
    } else if (graph) {
      followers = static_cast<double>(graph->followers(user).size());
      friends = static_cast<double>(graph->friends(user).size());
    }

    const auto b = static_cast<std::size_t>(bin.index);
    UserFeatureVector f;
    f[kFollowersCount] = followers;
    f[kFriendsCount] = friends;
    f[kFollowerFriendRatio] = followers / (friends + 1.0);
    f[kTweetVolumeLifetime] = a.originals / age_days;
    f[kDirectedTweetRatio] = ratio(a.directed_originals, a.originals);
    f[kActiveInteraction] = active_interaction(user, partner) ? 1.0 : 0.0;
    f[kMentionRate] = a.incoming_mentions / window_days;
    f[kRetweetedTweetRatio] = ratio(a.originals_retweeted, a.originals);
    f[kTweetsWithHashtagsRatio] = ratio(a.originals_with_hashtags, a.originals);
    f[kRetweetsWithHashtagsRatio] = ratio(a.forwards_with_hashtags, a.forwards);
    f[kRetweetVolumeLifetime] = a.forwards / age_days;
    f[kAvgTweetsPerDay] = a.posts / window_days;
    f[kAvgMentionsExclRetweets] = ratio(static_cast<double>(a.non_retweet_mentions),
                                        a.non_retweet_posts);
    f[kMentionsToTweetRatio] = ratio(a.posts_with_mentions, a.posts);
    f[kTweetsWithUrlRatio] = ratio(a.originals_with_url, a.originals);
    f[kRetweetsWithUrlRatio] = ratio(a.forwards_with_url, a.forwards);
    f[kTweetsWithMediaRatio] = ratio(a.originals_with_media, a.originals);
    f[kRetweetsWithMediaRatio] = ratio(a.forwards_with_media, a.forwards);
    f[kHasDescription] = description ? 1.0 : 0.0;
    f[kFavoritedToTweetRatio] =
        std::min(1.0, a.favorites_received / std::max(1.0, a.originals));
    f[kHasTopicKeywords] = a.topic_originals > 0 ? 1.0 : 0.0;
    f[kPositivePolarity] = ratio(a.positive_originals, a.originals);
    f[kNegativePolarity] = ratio(a.negative_originals, a.originals);
    f[kTweetsInBinRatio] = ratio(a.posts_in_bin[b], a.posts);
    f[kTweetsRetweetedInBinRatio] = ratio(a.originals_retweeted_in_bin[b], a.originals_in_bin[b]);
    f[kReactionsInBinRatio] = ratio(a.reactions_in_bin[b], a.reactions);
    f[kAvgTimeToFirstRetweet] =
        a.originals_in_bin[b] > 0 ? a.first_retweet_delay_in_bin[b] / a.originals_in_bin[b] : 1.0;
    return f;
  }

 private:
  struct Aggregate {
    double posts = 0;
    double originals = 0;
    double forwards = 0;
    double reactions = 0;
    double posts_with_mentions = 0;
    double non_retweet_posts = 0;
    std::size_t non_retweet_mentions = 0;
    double originals_with_hashtags = 0;
    double originals_with_url = 0;
    double originals_with_media = 0;
    double forwards_with_hashtags = 0;
    double forwards_with_url = 0;
    double forwards_with_media = 0;
    double directed_originals = 0;
    double topic_originals = 0;
    double positive_originals = 0;
    double negative_originals = 0;
    double originals_retweeted = 0;
    double favorites_received = 0;
    double incoming_mentions = 0;
    std::array<double, kBinCount> posts_in_bin{};
    std::array<double, kBinCount> originals_in_bin{};
    std::array<double, kBinCount> originals_retweeted_in_bin{};
    std::array<double, kBinCount> reactions_in_bin{};
    std::array<double, kBinCount> first_retweet_delay_in_bin{};
  };

  const EventLog* log_;
  const Topic* topic_;
  std::unordered_map<NodeId, Aggregate> stats_;
  std::unordered_set<Edge, EdgeHash> diffused_;
  std::unordered_set<Edge, EdgeHash> interactions_;
};

// One-off extraction for a single user; builds a full context internally.
UserFeatureVector extract_user(NodeId user, NodeId partner, TimeBin bin,
                                      const EventLog& log, const UserProfile* profile,
                                      const SocialGraph& graph, const Topic& topic,
                                      const Lexicon* lexicon = nullptr);

int label_edge(NodeId v, NodeId u, const EventLog& log, const Topic& topic);

EdgeSample make_edge_sample(const FeatureContext& ctx, const SocialGraph& graph,
                                   NodeId v, NodeId u, TimeBin bin,
                                   const UserProfile* pv, const UserProfile* pu);

struct DatasetBuild {
  std::vector<EdgeSample> samples;  // sorted by (source, destination)
  std::size_t skipped_missing_profile = 0;
};

// One sample per edge whose endpoints both have profiles.
DatasetBuild build_dataset(const SocialGraph& graph, const FeatureContext& ctx,
                                  const ProfileMap& profiles, TimeBin bin);

DatasetBuild build_dataset(const SocialGraph& graph, const EventLog& log,
                                  const ProfileMap& profiles, const Topic& topic, TimeBin bin,
                                  const Lexicon* lexicon = nullptr);

std::array<DatasetBuild, kBinCount> build_all_bins(const SocialGraph& graph,
                                                          const EventLog& log,
                                                          const ProfileMap& profiles,
                                                          const Topic& topic,
                                                          const Lexicon* lexicon = nullptr);

}  // namespace midmod
