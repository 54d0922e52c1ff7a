#pragma once

// Synthetic followership graphs, background posting behavior and
// asynchronous independent cascades (AsIC) with a planted edge model.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "midmod/eventlog.hpp"
#include "midmod/features.hpp"
#include "midmod/graph.hpp"

namespace midmod {

// 2018-10-01T00:00:00Z
inline constexpr Timestamp kDefaultStartTime = 1538352000;

struct AsicParams {
  std::function<double(NodeId, NodeId)> edge_probability;
  double delay_mean = 3600.0;   // seconds, mean of the exponential delay
  double horizon = 2592000.0;   // seconds after the cascade start
};

struct Activation {
  NodeId node = 0;
  double time = 0.0;  // absolute seconds
  std::optional<NodeId> activator;
};

struct Cascade {
  std::vector<Activation> activations;  // in activation order
  std::vector<Edge> attempts;           // every (parent, child) draw made
};

namespace detail {

// Counter-based draw for one (parent, child) pair: the outcome depends only on
// the cascade seed and the pair, never on processing order.
inline double edge_unit(std::uint64_t seed, NodeId v, NodeId u, std::uint64_t stream) {
  return unit_from_bits(hash_combine(hash_combine(hash_combine(seed, v), u), stream));
}

}  // namespace detail

Cascade run_asic(const SocialGraph& graph, std::span<const NodeId> seeds,
                        const AsicParams& params, std::uint64_t rng_seed,
                        double start_time = 0.0);

// Preferential attachment: node i follows min(i, edges_per_node) earlier
// nodes chosen with probability proportional to (followers + 1). Every edge
// points from an older to a newer node.
SocialGraph generate_graph(std::size_t users, std::size_t edges_per_node, std::uint64_t seed);

struct BehaviorProfile {
  std::array<double, kBinCount> rate_per_bin{};  // events per hour within each bin
  double hashtag = 0.0;
  double url = 0.0;
  double media = 0.0;
  double directed = 0.0;
  double mention = 0.0;
  double sentiment = 0.0;  // tendency in [-1, 1]
  double reply = 0.0;
  double favorite = 0.0;
  double retweet = 0.0;
  double quote = 0.0;
  bool has_description = false;
  double account_age_days = 0.0;

  std::array<double, kBinCount> bin_weights() const {
    std::array<double, kBinCount> w{};
    double s = 0;
    for (std::size_t b = 0; b < kBinCount; ++b) s += rate_per_bin[b];
    for (std::size_t b = 0; b < kBinCount; ++b) {
      w[b] = s > 0 ? rate_per_bin[b] / s : 1.0 / kBinCount;
    }
    return w;
  }
};

struct BehaviorOptions {
  double mean_daily_events = 0.6;
  double activity_sigma = 0.8;  // lognormal shape
  std::array<double, kBinCount> bin_profile{0.25, 0.25, 0.25, 0.25};
};

std::vector<BehaviorProfile> generate_behaviors(std::size_t users, const BehaviorOptions& opt,
                                                       std::uint64_t seed);

struct SimulationConfig {
  std::size_t users = 2000;
  std::size_t edges_per_node = 3;
  double delay_mean_s = 3600.0;
  double horizon_s = 2592000.0;
  std::size_t topics = 1;
  std::map<std::string, double> planted_weights = {
      {"src_tweets_with_url_ratio", 2.5},       {"src_negative_polarity", -2.0},
      {"src_directed_tweet_ratio", 2.0},        {"dst_tweets_with_hashtags_ratio", 2.0},
      {"dst_tweets_with_media_ratio", 2.0},     {"dst_positive_polarity", 2.0},
  };
  std::optional<double> class_balance = 0.4;  // target positive share; none keeps intercept 0
  std::uint64_t rng_seed = 0;
  Timestamp start_time = kDefaultStartTime;
  double mean_daily_events = 0.6;
  double quote_fraction = 0.2;
  std::array<double, kBinCount> bin_profile{0.25, 0.25, 0.25, 0.25};

  void check(ConfigIssues& issues, const std::string& prefix = "") const {
    const auto bad = [&](const char* key, const char* what) { issues.add(prefix + key + ": " + what); };
    if (users < 2) bad("users", "must be at least 2");
    if (edges_per_node < 1) bad("edges_per_node", "must be at least 1");
    if (!(delay_mean_s > 0)) bad("delay_mean_s", "must be positive");
    if (!(horizon_s > 0)) bad("horizon_s", "must be positive");
    if (topics < 1) bad("topics", "must be at least 1");
    if (class_balance && !(*class_balance > 0 && *class_balance < 1)) bad("class_balance", "must be in (0, 1)");
    if (!(quote_fraction >= 0 && quote_fraction <= 1)) bad("quote_fraction", "must be in [0, 1]");
    if (!(mean_daily_events >= 0)) bad("mean_daily_events", "must be non-negative");
    if (start_time < 0) bad("start_time", "must be non-negative");
    double mass = 0;
    for (double w : bin_profile) {
      if (!(w >= 0)) bad("bin_profile", "entries must be non-negative");
      mass += w;
    }
    if (!(mass > 0)) bad("bin_profile", "must have positive mass");
    for (const auto& [name, w] : planted_weights) {
      if (!edge_feature_index(name)) issues.add(prefix + "planted_weights." + name + ": unknown feature");
      else if (!std::isfinite(w)) issues.add(prefix + "planted_weights." + name + ": not finite");
    }
  }

  void validate() const {
    ConfigIssues issues;
    check(issues);
    issues.raise();
  }
};

nlohmann::json to_json(const SimulationConfig& c);

namespace detail {

// Reads j[key] into `out` when present; type errors are recorded, not thrown.
template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out, ConfigIssues& issues, const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    issues.add(prefix + key + ": wrong type (" + j.at(key).dump() + ")");
  }
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                           ConfigIssues& issues, const std::string& prefix) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) issues.add(prefix + key + ": unknown key");
  }
}

}  // namespace detail

// Missing keys keep their defaults; unknown keys are rejected.
SimulationConfig simulation_config_from_json(const nlohmann::json& j, ConfigIssues& issues,
                                                    const std::string& prefix = "");

SimulationConfig simulation_config_from_json(const nlohmann::json& j);

struct PlantedEdge {
  NodeId source = 0;
  NodeId destination = 0;
  double probability = 0.0;
  std::vector<int> labels;  // per topic: destination activated in the source's cascade
};

struct SyntheticData {
  SocialGraph graph;
  std::vector<BehaviorProfile> behaviors;
  std::vector<UserProfile> profiles;
  std::vector<Topic> topics;
  std::vector<EventRecord> events;
  std::vector<PlantedEdge> truth;  // sorted by (source, destination)
  std::vector<std::vector<Cascade>> cascades;  // [topic][source]
  double intercept = 0.0;

  double label_rate() const {
    double pos = 0;
    double n = 0;
    for (const auto& e : truth) {
      for (int y : e.labels) {
        pos += y;
        n += 1;
      }
    }
    return n > 0 ? pos / n : 0.0;
  }
};

Topic synthetic_topic(std::size_t t);

namespace detail {

class BackgroundWriter {
 public:
  BackgroundWriter(const SocialGraph& graph, const std::vector<BehaviorProfile>& behaviors, Rng& rng)
      : graph_(graph), behaviors_(behaviors), rng_(rng) {}

  EventRecord original(NodeId user, Timestamp ts, EventId id) {
    const auto& b = behaviors_[user];
    EventRecord r;
    r.event_id = id;
    r.user = user;
    r.timestamp = ts;
    r.kind = EventKind::tweet;
    if (rng_.bernoulli(b.directed)) {
      const NodeId target = some_neighbor(user);
      r.tokens.push_back("@u" + std::to_string(target));
      r.mentions.push_back(target);
    }
    fill_content(r, b);
    if (rng_.bernoulli(b.mention)) r.mentions.push_back(some_neighbor(user));
    return r;
  }

  void fill_content(EventRecord& r, const BehaviorProfile& b) {
    const std::size_t words = 3 + rng_.below(6);
    for (std::size_t k = 0; k < words; ++k) r.tokens.push_back("w" + std::to_string(rng_.below(500)));
    r.hashtag_count = rng_.bernoulli(b.hashtag) ? 1 + static_cast<std::uint32_t>(rng_.poisson(0.5)) : 0;
    r.url_count = rng_.bernoulli(b.url) ? 1 : 0;
    r.media_count = rng_.bernoulli(b.media) ? 1 : 0;
    r.sentiment = std::clamp(b.sentiment + rng_.normal(0.0, 0.4), -1.0, 1.0);
  }

  NodeId some_neighbor(NodeId user) {
    const auto friends = graph_.friends(user);
    if (!friends.empty()) return friends[rng_.below(friends.size())];
    const auto followers = graph_.followers(user);
    if (!followers.empty()) return followers[rng_.below(followers.size())];
    return user == 0 ? 1 : 0;
  }

 private:
  const SocialGraph& graph_;
  const std::vector<BehaviorProfile>& behaviors_;
  Rng& rng_;
};

struct PendingReaction {
  Timestamp ts;
  NodeId user;
  EventKind kind;
};

}  // namespace detail

struct BackgroundLog {
  std::vector<EventRecord> events;
  std::vector<std::vector<EventId>> roots;     // [topic][user] topic original id
  std::vector<std::vector<Timestamp>> root_ts;  // [topic][user]
  EventId next_id = 1;
};

// Per-bin Poisson activity over `days` days from `start`, plus one original
// per user and topic. Reactions target an earlier original of someone the
// user follows; forwards only target off-topic originals.
BackgroundLog generate_background(const SocialGraph& graph,
                                         const std::vector<BehaviorProfile>& behaviors,
                                         std::span<const Topic> topics, Timestamp start,
                                         std::size_t days, std::uint64_t seed);

// Planted probability p(v, u) = logistic(intercept + sum_k w_k z_k(v, u)),
// with z the edge features standardized over all edges.
class PlantedModel {
 public:
  PlantedModel(const std::vector<Edge>& edges, const FeatureContext& ctx, const SocialGraph& graph,
               const ProfileMap& profiles, const std::map<std::string, double>& weights) {
    std::vector<std::size_t> cols;
    for (const auto& [name, w] : weights) {
      const auto j = edge_feature_index(name);
      if (!j) throw ConfigError("unknown planted feature '" + name + "'");
      cols.push_back(*j);
      weights_.push_back(w);
    }
    std::vector<std::vector<double>> values(cols.size(), std::vector<double>(edges.size(), 0.0));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [v, u] = edges[e];
      const UserProfile* pv = find_profile(profiles, v);
      const UserProfile* pu = find_profile(profiles, u);
      // Temporal columns are averaged over the four bins.
      std::array<double, kEdgeFeatureCount> mean{};
      for (std::size_t b = 0; b < kBinCount; ++b) {
        const auto s = make_edge_sample(ctx, graph, v, u, TimeBin{static_cast<int>(b)}, pv, pu);
        for (std::size_t j = 0; j < kEdgeFeatureCount; ++j) mean[j] += s.x[j] / kBinCount;
      }
      for (std::size_t k = 0; k < cols.size(); ++k) values[k][e] = mean[cols[k]];
    }
    score_.assign(edges.size(), 0.0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double m = 0;
      for (double x : values[k]) m += x;
      m /= static_cast<double>(std::max<std::size_t>(1, edges.size()));
      double ss = 0;
      for (double x : values[k]) ss += (x - m) * (x - m);
      const double sd = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(1, edges.size())));
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const double z = sd > 0 ? (values[k][e] - m) / sd : 0.0;
        score_[e] += weights_[k] * z;
      }
    }
  }

  std::size_t size() const { return score_.size(); }
  double score(std::size_t e) const { return score_[e]; }
  double probability(std::size_t e, double intercept) const { return logistic(intercept + score_[e]); }

 private:
  static const UserProfile* find_profile(const ProfileMap& profiles, NodeId v) {
    const auto it = profiles.find(v);
    return it == profiles.end() ? nullptr : &it->second;
  }

  std::vector<double> weights_;
  std::vector<double> score_;
};

SyntheticData synthesize_dataset(const SimulationConfig& cfg);

}  // namespace midmod
