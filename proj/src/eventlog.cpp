#include "midmod/eventlog.hpp"

namespace midmod {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::tweet: return "tweet";
    case EventKind::retweet: return "retweet";
    case EventKind::quote: return "quote";
    case EventKind::reply: return "reply";
    case EventKind::favorite: return "favorite";
  }
  return "tweet";
}

std::optional<EventKind> parse_kind(std::string_view s) {
  if (s == "tweet") return EventKind::tweet;
  if (s == "retweet") return EventKind::retweet;
  if (s == "quote") return EventKind::quote;
  if (s == "reply") return EventKind::reply;
  if (s == "favorite") return EventKind::favorite;
  return std::nullopt;
}

bool is_forward(EventKind k) {
  return k == EventKind::retweet || k == EventKind::quote;
}

bool is_relevant(const EventRecord& r, const Topic& topic) {
  return std::any_of(r.tokens.begin(), r.tokens.end(),
                     [&](const std::string& t) { return topic.has_keyword(t); });
}

ProfileMap index_profiles(std::span<const UserProfile> profiles) {
  ProfileMap m;
  for (const auto& p : profiles) m[p.user] = p;
  return m;
}

Lexicon read_lexicon(std::istream& in) {
  std::unordered_map<std::string, double> w;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    double weight = 0;
    if (!(fields >> word)) continue;
    if (word[0] == '#') continue;
    if (!(fields >> weight)) {
      throw DataError("lexicon line " + std::to_string(line_no) +
                      ": expected 'word weight'");
    }
    w[word] = weight;
  }
  return Lexicon(std::move(w));
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read lexicon: " + path);
  return read_lexicon(in);
}

double sentiment_score(std::span<const std::string> tokens,
                              const Lexicon& lexicon) {
  double sum = 0.0;
  std::size_t matched = 0;
  for (const auto& t : tokens) {
    if (const auto w = lexicon.weight(t)) {
      sum += *w;
      ++matched;
    }
  }
  if (matched == 0) return 0.0;
  return std::clamp(sum / static_cast<double>(matched), -1.0, 1.0);
}

nlohmann::json to_json(const EventRecord& r) {
  nlohmann::json j;
  j["event_id"] = r.event_id;
  j["user"] = r.user;
  j["ts"] = r.timestamp;
  j["kind"] = std::string(to_string(r.kind));
  if (r.ref_event) j["ref_event"] = *r.ref_event;
  if (r.ref_author) j["ref_author"] = *r.ref_author;
  j["tokens"] = r.tokens;
  j["hashtags"] = r.hashtag_count;
  j["urls"] = r.url_count;
  j["media"] = r.media_count;
  j["mentions"] = r.mentions;
  if (r.sentiment) j["sentiment"] = *r.sentiment;
  return j;
}

EventRecord event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  EventRecord r;
  r.event_id = detail::require_integer<EventId>(j, "event_id");
  r.user = detail::require_integer<NodeId>(j, "user");
  r.timestamp = detail::require_integer<Timestamp>(j, "ts");
  if (r.timestamp < 0) throw DataError("negative timestamp");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw DataError("missing field 'kind'");
  }
  const auto kind = parse_kind(j["kind"].get<std::string>());
  if (!kind) throw DataError("unknown kind '" + j["kind"].get<std::string>() + "'");
  r.kind = *kind;
  if (j.contains("ref_event") && !j["ref_event"].is_null()) {
    r.ref_event = detail::require_integer<EventId>(j, "ref_event");
  }
  if (j.contains("ref_author") && !j["ref_author"].is_null()) {
    r.ref_author = detail::require_integer<NodeId>(j, "ref_author");
  }
  if (r.kind == EventKind::tweet && (r.ref_event || r.ref_author)) {
    throw DataError("tweet must not carry ref_event/ref_author");
  }
  if (r.kind != EventKind::tweet && !r.ref_event) {
    throw DataError("reaction without ref_event");
  }
  if (r.kind != EventKind::tweet && !r.ref_author) {
    throw DataError("reaction without ref_author");
  }
  if (j.contains("tokens") && !j["tokens"].is_null()) {
    if (!j["tokens"].is_array()) throw DataError("field 'tokens' must be an array");
    for (const auto& t : j["tokens"]) {
      if (!t.is_string()) throw DataError("token is not a string");
      r.tokens.push_back(t.get<std::string>());
    }
  }
  r.hashtag_count = detail::optional_count<std::uint32_t>(j, "hashtags");
  r.url_count = detail::optional_count<std::uint32_t>(j, "urls");
  r.media_count = detail::optional_count<std::uint32_t>(j, "media");
  if (j.contains("mentions") && !j["mentions"].is_null()) {
    if (!j["mentions"].is_array()) throw DataError("field 'mentions' must be an array");
    for (const auto& m : j["mentions"]) {
      if (!m.is_number_integer() || (!m.is_number_unsigned() && m.get<std::int64_t>() < 0)) {
        throw DataError("mention is not a non-negative id");
      }
      r.mentions.push_back(m.get<NodeId>());
    }
  }
  if (j.contains("sentiment") && !j["sentiment"].is_null()) {
    if (!j["sentiment"].is_number()) throw DataError("field 'sentiment' must be numeric");
    const double s = j["sentiment"].get<double>();
    if (!(s >= -1.0 && s <= 1.0)) throw DataError("sentiment outside [-1, 1]");
    r.sentiment = s;
  }
  return r;
}

nlohmann::json to_json(const UserProfile& p) {
  return {{"user", p.user},
          {"created", p.account_created},
          {"has_description", p.has_description},
          {"followers", p.followers_count},
          {"friends", p.friends_count}};
}

UserProfile profile_from_json(const nlohmann::json& j, std::size_t& defaulted) {
  if (!j.is_object()) throw DataError("profile is not a JSON object");
  UserProfile p;
  p.user = detail::require_integer<NodeId>(j, "user");
  bool any_default = false;
  if (j.contains("created") && !j["created"].is_null()) {
    p.account_created = detail::require_integer<Timestamp>(j, "created");
  } else {
    any_default = true;
  }
  if (j.contains("has_description") && j["has_description"].is_boolean()) {
    p.has_description = j["has_description"].get<bool>();
  } else {
    any_default = true;
  }
  if (j.contains("followers") && !j["followers"].is_null()) {
    p.followers_count = detail::require_integer<std::uint64_t>(j, "followers");
  } else {
    any_default = true;
  }
  if (j.contains("friends") && !j["friends"].is_null()) {
    p.friends_count = detail::require_integer<std::uint64_t>(j, "friends");
  } else {
    any_default = true;
  }
  if (any_default) ++defaulted;
  return p;
}

IngestResult ingest_streams(std::istream& events, std::istream* profiles) {
  IngestResult out;
  std::vector<EventRecord> records;
  std::unordered_map<EventId, bool> seen;
  std::string line;
  while (std::getline(events, line)) {
    ++out.report.lines;
    if (detail::blank(line)) continue;
    try {
      auto r = event_from_json(nlohmann::json::parse(line));
      if (!seen.emplace(r.event_id, true).second) {
        throw DataError("duplicate event_id " + std::to_string(r.event_id));
      }
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++out.report.malformed;
      if (out.report.malformed_details.size() < 100) {
        out.report.malformed_details.push_back(
            "line " + std::to_string(out.report.lines) + ": " + e.what());
      }
    }
  }
  out.log = EventLog(std::move(records));
  out.report.records = out.log.size();
  for (const auto& r : out.log.records()) {
    if (r.ref_event && !out.log.find(*r.ref_event)) {
      out.report.dangling_references.push_back(r.event_id);
    }
  }
  if (profiles) {
    std::unordered_map<NodeId, bool> seen_users;
    while (std::getline(*profiles, line)) {
      if (detail::blank(line)) continue;
      try {
        auto p = profile_from_json(nlohmann::json::parse(line),
                                   out.report.profiles_defaulted);
        if (!seen_users.emplace(p.user, true).second) {
          throw DataError("duplicate profile");
        }
        if (!out.log.empty() && p.account_created > out.log.window_start()) {
          ++out.report.profiles_created_after_window;
        }
        out.profiles.push_back(p);
      } catch (const std::exception&) {
        ++out.report.profiles_malformed;
      }
    }
    out.report.profiles = out.profiles.size();
  }
  return out;
}

IngestResult ingest(const std::string& events_path,
                           const std::string& profiles_path) {
  std::ifstream events(events_path);
  if (!events) throw DataError("cannot read event log: " + events_path);
  if (profiles_path.empty()) return ingest_streams(events, nullptr);
  std::ifstream profiles(profiles_path);
  if (!profiles) throw DataError("cannot read profiles: " + profiles_path);
  return ingest_streams(events, &profiles);
}

void write_events(std::ostream& out, std::span<const EventRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_profiles(std::ostream& out, std::span<const UserProfile> profiles) {
  for (const auto& p : profiles) out << to_json(p).dump() << '\n';
}

Topic topic_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.contains("keywords") ||
      !j["keywords"].is_array()) {
    throw DataError("topic must be {\"name\": ..., \"keywords\": [...]}");
  }
  return Topic(j["name"].get<std::string>(),
               j["keywords"].get<std::vector<std::string>>());
}

nlohmann::json to_json(const Topic& t) {
  return {{"name", t.name}, {"keywords", t.keywords}};
}

Topic load_topic(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read topic: " + path);
  try {
    return topic_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("topic " + path + ": " + e.what());
  }
}

}  // namespace midmod
