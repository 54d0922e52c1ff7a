#pragma once

// Message virality from the crowd: a per-interaction classifier of the
// message's event type (trending vs informative) using only the 55 edge
// features of the (poster, reactor) pair, and a majority vote per message.

#include <algorithm>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "midmod/blr.hpp"
#include "midmod/eval.hpp"
#include "midmod/features.hpp"
#include "midmod/simulator.hpp"

namespace midmod {

enum class EventType { informative = 0, trending = 1 };

std::string_view to_string(EventType t);

struct Message {
  EventId id = 0;
  NodeId poster = 0;
  Timestamp timestamp = 0;
  EventType type = EventType::informative;
};

struct Interaction {
  EventId message_id = 0;
  NodeId reactor = 0;
  Timestamp timestamp = 0;
  EventKind kind = EventKind::retweet;
};

struct InteractionSample {
  EventId message_id = 0;
  EdgeSample sample;  // label field holds the event type
  EventType type = EventType::informative;
};

struct ViralityConfig {
  std::size_t users = 1000;
  std::size_t edges_per_node = 3;
  std::size_t trending_messages = 500;
  std::size_t informative_messages = 500;
  std::size_t audience = 12;             // users exposed to each message
  double trend_only_fraction = 0.5;      // share of trend-only reactors
  double trend_only_trending = 0.6;      // reaction probabilities per exposure
  double trend_only_informative = 0.0;
  double general_trending = 0.2;
  double general_informative = 0.4;
  double mean_daily_events = 0.6;
  double days = 30;
  double train_fraction = 0.8;
  bool tie_trending = true;
  double threshold = 0.5;
  std::uint64_t rng_seed = 0;

  void check(ConfigIssues& issues, const std::string& prefix = "") const {
    const auto bad = [&](const char* key, const char* what) { issues.add(prefix + key + ": " + what); };
    if (users < 3) bad("users", "must be at least 3");
    if (edges_per_node < 1) bad("edges_per_node", "must be at least 1");
    if (trending_messages < 1) bad("trending_messages", "must be at least 1");
    if (informative_messages < 1) bad("informative_messages", "must be at least 1");
    if (audience < 1 || audience >= users) bad("audience", "must be in [1, users)");
    const std::pair<const char*, double> probs[] = {
        {"trend_only_fraction", trend_only_fraction}, {"trend_only_trending", trend_only_trending},
        {"trend_only_informative", trend_only_informative}, {"general_trending", general_trending},
        {"general_informative", general_informative}, {"threshold", threshold}};
    for (const auto& [key, p] : probs) {
      if (!(p >= 0 && p <= 1)) bad(key, "must be in [0, 1]");
    }
    if (!(mean_daily_events >= 0)) bad("mean_daily_events", "must be non-negative");
    if (!(train_fraction > 0 && train_fraction < 1)) bad("train_fraction", "must be in (0, 1)");
    if (!(days >= 1)) bad("days", "must be at least 1");
  }

  void validate() const {
    ConfigIssues issues;
    check(issues);
    issues.raise();
  }
};

nlohmann::json to_json(const ViralityConfig& c);

ViralityConfig virality_config_from_json(const nlohmann::json& j, ConfigIssues& issues,
                                                const std::string& prefix = "");

struct ViralityCorpus {
  SocialGraph graph;
  std::vector<BehaviorProfile> behaviors;
  std::vector<UserProfile> profiles;
  std::vector<bool> trend_only;
  std::vector<EventRecord> background;
  std::vector<Message> messages;
  std::vector<Interaction> interactions;  // grouped by message, in message order
};

// Trend-only reactors react more, lean toward the evening bin and use more
// hashtags; they never react to informative messages.
ViralityCorpus synthesize_virality_corpus(const ViralityConfig& cfg);

// Features come from background behavior only; message reactions and their
// counts never enter the vector.
std::vector<InteractionSample> interaction_samples(const ViralityCorpus& corpus);

Dataset to_dataset(std::span<const InteractionSample> samples);

BlrModel train_virality(std::span<const InteractionSample> samples, const BlrOptions& opt = {});

struct ViralityVerdict {
  EventId message_id = 0;
  std::size_t n = 0;
  std::size_t votes_trending = 0;
  std::size_t votes_informative = 0;
  EventType verdict = EventType::informative;
};

// Majority of the votes; an even split goes to `tie` (trending by default).
EventType majority(std::size_t votes_trending, std::size_t votes_informative,
                          EventType tie = EventType::trending);

ViralityVerdict predict_virality(const BlrModel& model, std::span<const InteractionSample> interactions,
                                        double threshold = 0.5, EventType tie = EventType::trending);

// Samples grouped by message id, in ascending id order.
std::map<EventId, std::vector<InteractionSample>> group_by_message(std::span<const InteractionSample> samples);

struct ViralityEvaluation {
  std::vector<ViralityVerdict> verdicts;
  std::vector<EventType> truth;
  Metrics metrics;  // trending is the positive class
  double interaction_auc = 0.0;
};

ViralityEvaluation evaluate_virality(const BlrModel& model, std::span<const InteractionSample> samples,
                                            double threshold = 0.5, EventType tie = EventType::trending);

// Splits messages (not interactions) into train and test, stratified by type.
std::pair<std::vector<InteractionSample>, std::vector<InteractionSample>> split_by_message(
    std::span<const InteractionSample> samples, double train_fraction, std::uint64_t seed);

void write_verdicts_csv(std::ostream& out, const ViralityEvaluation& ev);

}  // namespace midmod
