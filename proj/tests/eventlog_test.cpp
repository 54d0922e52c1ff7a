#include <gtest/gtest.h>

#include <sstream>

#include "midmod/eventlog.hpp"

using namespace midmod;

namespace {

EventRecord tweet(EventId id, NodeId user, Timestamp ts, std::vector<std::string> tokens = {}) {
  EventRecord r;
  r.event_id = id;
  r.user = user;
  r.timestamp = ts;
  r.tokens = std::move(tokens);
  return r;
}

EventRecord reaction(EventId id, NodeId user, Timestamp ts, EventKind kind, EventId ref, NodeId author) {
  EventRecord r;
  r.event_id = id;
  r.user = user;
  r.timestamp = ts;
  r.kind = kind;
  r.ref_event = ref;
  r.ref_author = author;
  return r;
}

IngestResult ingest_text(const std::string& text) {
  std::istringstream in(text);
  return ingest_streams(in, nullptr);
}

}  // namespace

TEST(Ingest, ValidLines) {
  const auto res = ingest_text(
      R"({"event_id":1,"user":1,"ts":100,"kind":"tweet","tokens":["a"]})" "\n"
      R"({"event_id":2,"user":2,"ts":110,"kind":"retweet","ref_event":1,"ref_author":1})" "\n"
      R"({"event_id":3,"user":3,"ts":105,"kind":"favorite","ref_event":1,"ref_author":1})" "\n");
  EXPECT_EQ(res.log.size(), 3u);
  EXPECT_EQ(res.report.malformed, 0u);
  EXPECT_EQ(res.log.records()[1].event_id, 3);
}

TEST(Ingest, ReactionWithoutRefIsMalformed) {
  const auto res = ingest_text(
      R"({"event_id":1,"user":1,"ts":100,"kind":"tweet"})" "\n"
      R"({"event_id":2,"user":2,"ts":110,"kind":"reply","ref_author":1})" "\n");
  EXPECT_EQ(res.report.malformed, 1u);
  EXPECT_EQ(res.log.size(), 1u);
  ASSERT_EQ(res.report.malformed_details.size(), 1u);
  EXPECT_NE(res.report.malformed_details[0].find("line 2"), std::string::npos);
}

TEST(Ingest, RejectsBadFieldValues) {
  const auto res = ingest_text(
      R"({"event_id":1,"user":1,"ts":-5,"kind":"tweet"})" "\n"
      R"({"event_id":2,"user":1,"ts":5,"kind":"shout"})" "\n"
      R"({"event_id":3,"user":1,"ts":5,"kind":"tweet","sentiment":1.5})" "\n"
      R"({"event_id":4,"user":1,"ts":5,"kind":"tweet","ref_event":1})" "\n"
      R"(not json)" "\n"
      R"({"event_id":6,"user":1,"ts":5,"kind":"tweet"})" "\n"
      R"({"event_id":6,"user":2,"ts":6,"kind":"tweet"})" "\n");
  EXPECT_EQ(res.report.malformed, 6u);
  EXPECT_EQ(res.log.size(), 1u);
}

TEST(Ingest, DanglingReferenceIsReported) {
  const auto res = ingest_text(R"({"event_id":9,"user":2,"ts":110,"kind":"quote","ref_event":77,"ref_author":1})" "\n");
  EXPECT_EQ(res.report.malformed, 0u);
  EXPECT_EQ(res.report.dangling_references, std::vector<EventId>{9});
}

TEST(Ingest, OptionalFieldsDefault) {
  const auto res = ingest_text(R"({"event_id":1,"user":4,"ts":100,"kind":"tweet"})" "\n");
  const auto& r = res.log.records()[0];
  EXPECT_EQ(r.hashtag_count, 0u);
  EXPECT_EQ(r.url_count, 0u);
  EXPECT_EQ(r.media_count, 0u);
  EXPECT_TRUE(r.tokens.empty());
  EXPECT_TRUE(r.mentions.empty());
  EXPECT_FALSE(r.sentiment.has_value());
}

TEST(Ingest, RoundTripIsIdentical) {
  std::vector<EventRecord> recs = {tweet(1, 1, 100, {"coffee", "#beans"}),
                                   reaction(2, 2, 150, EventKind::retweet, 1, 1),
                                   reaction(3, 3, 160, EventKind::reply, 1, 1)};
  recs[0].hashtag_count = 1;
  recs[0].url_count = 2;
  recs[0].sentiment = -0.25;
  recs[2].mentions = {1, 5};
  recs[2].media_count = 1;
  const EventLog log(recs);
  std::ostringstream out;
  write_events(out, log.records());
  const auto res = ingest_text(out.str());
  ASSERT_EQ(res.log.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) EXPECT_EQ(res.log.records()[i], log.records()[i]);
}

TEST(Ingest, ProfilesParsedAndChecked) {
  std::istringstream ev(R"({"event_id":1,"user":1,"ts":1000,"kind":"tweet"})" "\n");
  std::istringstream pr(R"({"user":1,"created":10,"has_description":true,"followers":5,"friends":2})" "\n"
                        R"({"user":2,"created":5000})" "\n"
                        R"({"user":"x"})" "\n");
  const auto res = ingest_streams(ev, &pr);
  ASSERT_EQ(res.profiles.size(), 2u);
  EXPECT_EQ(res.profiles[0].followers_count, 5u);
  EXPECT_TRUE(res.profiles[0].has_description);
  EXPECT_EQ(res.report.profiles_malformed, 1u);
  EXPECT_EQ(res.report.profiles_created_after_window, 1u);
  EXPECT_GE(res.report.profiles_defaulted, 1u);
}

TEST(EventLog, ReactionIndexOverRetweetChain) {
  // 1 is the original; 2 and 4 forward it, 3 replies to it, 5 favorites 2.
  const EventLog log({tweet(1, 10, 100), reaction(2, 11, 110, EventKind::retweet, 1, 10),
                      reaction(3, 12, 120, EventKind::reply, 1, 10), reaction(4, 13, 130, EventKind::quote, 1, 10),
                      reaction(5, 14, 140, EventKind::favorite, 2, 11)});
  std::vector<EventId> on1;
  for (std::size_t i : log.reactions_to(1)) on1.push_back(log.records()[i].event_id);
  EXPECT_EQ(on1, (std::vector<EventId>{2, 3, 4}));
  ASSERT_EQ(log.reactions_to(2).size(), 1u);
  EXPECT_EQ(log.records()[log.reactions_to(2)[0]].event_id, 5);
  EXPECT_TRUE(log.reactions_to(5).empty());
  // Every reaction sits in exactly one bucket: its ref_event's.
  std::size_t indexed = 0;
  for (const auto& r : log.records()) indexed += log.reactions_to(r.event_id).size();
  EXPECT_EQ(indexed, 4u);
}

TEST(EventLog, DuplicateIdsRejected) {
  EXPECT_THROW(EventLog({tweet(1, 1, 5), tweet(1, 2, 6)}), DataError);
}

TEST(EventLog, WindowAndUserIndex) {
  const EventLog log({tweet(2, 1, 500), tweet(1, 1, 100), tweet(3, 2, 300)});
  EXPECT_EQ(log.window_start(), 100);
  EXPECT_EQ(log.window_end(), 500);
  ASSERT_EQ(log.by_user(1).size(), 2u);
  EXPECT_EQ(log.records()[log.by_user(1)[0]].event_id, 1);
  EXPECT_TRUE(log.by_user(99).empty());
}

TEST(Topic, Relevance) {
  const Topic coffee("coffee", {"coffee", "Espresso"});
  EXPECT_TRUE(is_relevant(tweet(1, 1, 1, {"coffee", "health"}), coffee));
  EXPECT_FALSE(is_relevant(tweet(1, 1, 1, {}), coffee));
  EXPECT_TRUE(is_relevant(tweet(1, 1, 1, {"espresso"}), coffee));
  // A hashtag only matches when the tokenizer emitted the bare word.
  EXPECT_FALSE(is_relevant(tweet(1, 1, 1, {"#coffee"}), coffee));
  EXPECT_TRUE(is_relevant(tweet(1, 1, 1, {"#coffee", "coffee"}), coffee));
  EXPECT_THROW(Topic("empty", {}), DataError);
}

TEST(Topic, RelevanceMonotoneInKeywords) {
  const std::vector<std::vector<std::string>> docs = {{"a", "b"}, {"c"}, {}, {"d", "e", "f"}};
  std::vector<std::string> words;
  std::vector<bool> before(docs.size(), false);
  for (const std::string w : {"z", "c", "a", "q", "f"}) {
    words.push_back(w);
    const Topic t("t", words);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const bool now = is_relevant(tweet(1, 1, 1, docs[i]), t);
      EXPECT_TRUE(now || !before[i]);
      before[i] = now;
    }
  }
}

TEST(Topic, JsonRoundTrip) {
  const Topic t("coffee", {"coffee", "latte"});
  const Topic back = topic_from_json(to_json(t));
  EXPECT_EQ(back.name, t.name);
  EXPECT_EQ(back.keywords, t.keywords);
  EXPECT_THROW(topic_from_json(nlohmann::json{{"name", "x"}}), DataError);
}

TEST(Sentiment, LexiconScores) {
  std::istringstream in("good 1\nbad -0.5\n# note\n");
  const Lexicon lex = read_lexicon(in);
  const std::vector<std::string> none = {"table", "chair"};
  const std::vector<std::string> one = {"good", "table"};
  const std::vector<std::string> two = {"good", "bad"};
  EXPECT_DOUBLE_EQ(sentiment_score(none, lex), 0.0);
  EXPECT_DOUBLE_EQ(sentiment_score(one, lex), 1.0);
  EXPECT_DOUBLE_EQ(sentiment_score(two, lex), 0.25);
}

TEST(Sentiment, ClampedToUnitRange) {
  std::istringstream in("great 3\n");
  const Lexicon lex = read_lexicon(in);
  const std::vector<std::string> t = {"great"};
  EXPECT_DOUBLE_EQ(sentiment_score(t, lex), 1.0);
}
