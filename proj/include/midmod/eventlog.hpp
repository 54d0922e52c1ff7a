#pragma once

// Normalized tweet-like event records, topics as keyword bags, user
// profiles and a minimal lexicon sentiment scorer.

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "midmod/common.hpp"

namespace midmod {

enum class EventKind { tweet, retweet, quote, reply, favorite };

std::string_view to_string(EventKind k);

std::optional<EventKind> parse_kind(std::string_view s);

// Retweets and quotes carry the referenced content onward.
bool is_forward(EventKind k);

inline bool is_reaction(EventKind k) { return k != EventKind::tweet; }

// Favorites are logged actions but not posts.
inline bool is_post(EventKind k) { return k != EventKind::favorite; }

struct EventRecord {
  EventId event_id = 0;
  NodeId user = 0;
  Timestamp timestamp = 0;
  EventKind kind = EventKind::tweet;
  std::optional<EventId> ref_event;
  std::optional<NodeId> ref_author;
  std::vector<std::string> tokens;
  std::uint32_t hashtag_count = 0;
  std::uint32_t url_count = 0;
  std::uint32_t media_count = 0;
  std::vector<NodeId> mentions;
  std::optional<double> sentiment;

  bool operator==(const EventRecord&) const = default;
};

struct Topic {
  std::string name;
  std::vector<std::string> keywords;  // sorted, unique, lowercase

  Topic() = default;
  Topic(std::string n, std::vector<std::string> words) : name(std::move(n)) {
    for (auto& w : words) {
      std::transform(w.begin(), w.end(), w.begin(),
                     [](unsigned char c) { return std::tolower(c); });
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    if (words.empty()) throw DataError("topic '" + name + "' has no keywords");
    keywords = std::move(words);
  }

  bool has_keyword(std::string_view w) const {
    return std::binary_search(keywords.begin(), keywords.end(), w);
  }
};

bool is_relevant(const EventRecord& r, const Topic& topic);

struct UserProfile {
  NodeId user = 0;
  Timestamp account_created = 0;
  bool has_description = false;
  std::uint64_t followers_count = 0;
  std::uint64_t friends_count = 0;

  bool operator==(const UserProfile&) const = default;
};

using ProfileMap = std::unordered_map<NodeId, UserProfile>;

ProfileMap index_profiles(std::span<const UserProfile> profiles);

// Signed word weights, one "word weight" pair per line.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_map<std::string, double> w)
      : weights_(std::move(w)) {}

  std::optional<double> weight(const std::string& word) const {
    const auto it = weights_.find(word);
    if (it == weights_.end()) return std::nullopt;
    return it->second;
  }

  bool empty() const { return weights_.empty(); }

 private:
  std::unordered_map<std::string, double> weights_;
};

Lexicon read_lexicon(std::istream& in);

Lexicon load_lexicon(const std::string& path);

// Mean weight of matched words, clamped to [-1, 1]; 0 without matches.
double sentiment_score(std::span<const std::string> tokens,
                              const Lexicon& lexicon);

// Time-ordered, indexed, immutable collection of records.
class EventLog {
 public:
  EventLog() = default;

  // Sorts by (timestamp, event_id). Throws DataError on duplicate ids.
  explicit EventLog(std::vector<EventRecord> records)
      : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(),
              [](const EventRecord& a, const EventRecord& b) {
                if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                return a.event_id < b.event_id;
              });
    by_id_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (!by_id_.emplace(r.event_id, i).second) {
        throw DataError("duplicate event_id " + std::to_string(r.event_id));
      }
      by_user_[r.user].push_back(i);
    }
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (is_reaction(r.kind) && r.ref_event) {
        reactions_[*r.ref_event].push_back(i);
      }
    }
    if (!records_.empty()) {
      start_ = records_.front().timestamp;
      end_ = records_.back().timestamp;
    }
  }

  std::span<const EventRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const EventRecord* find(EventId id) const {
    const auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
  }

  // Indexes into records(), ascending in time.
  std::span<const std::size_t> by_user(NodeId user) const {
    const auto it = by_user_.find(user);
    if (it == by_user_.end()) return {};
    return it->second;
  }

  // Reactions (retweet, quote, reply, favorite) referencing `id`.
  std::span<const std::size_t> reactions_to(EventId id) const {
    const auto it = reactions_.find(id);
    if (it == reactions_.end()) return {};
    return it->second;
  }

  std::vector<NodeId> users() const {
    std::vector<NodeId> out;
    out.reserve(by_user_.size());
    for (const auto& [u, _] : by_user_) out.push_back(u);
    std::sort(out.begin(), out.end());
    return out;
  }

  Timestamp window_start() const { return start_; }
  Timestamp window_end() const { return end_; }

  // Window length in seconds, at least one second.
  double window_seconds() const {
    return std::max<double>(1.0, static_cast<double>(end_ - start_));
  }

  // Window length in days, at least one day.
  double window_days() const {
    return std::max(1.0, window_seconds() / static_cast<double>(kSecondsPerDay));
  }

 private:
  std::vector<EventRecord> records_;
  std::unordered_map<EventId, std::size_t> by_id_;
  std::unordered_map<NodeId, std::vector<std::size_t>> by_user_;
  std::unordered_map<EventId, std::vector<std::size_t>> reactions_;
  Timestamp start_ = 0;
  Timestamp end_ = 0;
};

// ---------------------------------------------------------------------------
// Line-delimited JSON wire format.

nlohmann::json to_json(const EventRecord& r);

namespace detail {

template <typename T>
T require_integer(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
  if (!it->is_number_integer()) {
    throw DataError(std::string("field '") + key + "' must be an integer");
  }
  if constexpr (std::is_unsigned_v<T>) {
    if (it->is_number_unsigned()) return it->get<T>();
    const auto v = it->get<std::int64_t>();
    if (v < 0) throw DataError(std::string("field '") + key + "' is negative");
    return static_cast<T>(v);
  } else {
    return it->get<T>();
  }
}

template <typename T>
T optional_count(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return T{0};
  return require_integer<T>(j, key);
}

}  // namespace detail

// Parses and validates one record; throws DataError with the reason.
EventRecord event_from_json(const nlohmann::json& j);

nlohmann::json to_json(const UserProfile& p);

// Missing optional profile fields default to 0/false; `defaulted` counts them.
UserProfile profile_from_json(const nlohmann::json& j, std::size_t& defaulted);

struct IngestReport {
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::vector<std::string> malformed_details;  // "line N: reason"
  std::vector<EventId> dangling_references;    // reactions whose ref_event is absent
  std::size_t profiles = 0;
  std::size_t profiles_malformed = 0;
  std::size_t profiles_defaulted = 0;
  std::size_t profiles_created_after_window = 0;

  nlohmann::json to_json() const {
    return {{"lines", lines},
            {"records", records},
            {"malformed", malformed},
            {"malformed_details", malformed_details},
            {"dangling_references", dangling_references},
            {"profiles", profiles},
            {"profiles_malformed", profiles_malformed},
            {"profiles_defaulted", profiles_defaulted},
            {"profiles_created_after_window", profiles_created_after_window}};
  }
};

struct IngestResult {
  EventLog log;
  std::vector<UserProfile> profiles;
  IngestReport report;
};

namespace detail {

inline bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

IngestResult ingest_streams(std::istream& events, std::istream* profiles);

IngestResult ingest(const std::string& events_path,
                           const std::string& profiles_path = {});

void write_events(std::ostream& out, std::span<const EventRecord> records);

void write_profiles(std::ostream& out, std::span<const UserProfile> profiles);

Topic topic_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Topic& t);

Topic load_topic(const std::string& path);

}  // namespace midmod
