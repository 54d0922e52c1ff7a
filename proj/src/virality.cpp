#include "midmod/virality.hpp"

namespace midmod {

std::string_view to_string(EventType t) {
  return t == EventType::trending ? "trending" : "informative";
}

nlohmann::json to_json(const ViralityConfig& c) {
  return {{"users", c.users},
          {"edges_per_node", c.edges_per_node},
          {"trending_messages", c.trending_messages},
          {"informative_messages", c.informative_messages},
          {"audience", c.audience},
          {"trend_only_fraction", c.trend_only_fraction},
          {"trend_only_trending", c.trend_only_trending},
          {"trend_only_informative", c.trend_only_informative},
          {"general_trending", c.general_trending},
          {"general_informative", c.general_informative},
          {"mean_daily_events", c.mean_daily_events},
          {"days", c.days},
          {"train_fraction", c.train_fraction},
          {"tie_trending", c.tie_trending},
          {"threshold", c.threshold},
          {"rng_seed", c.rng_seed}};
}

ViralityConfig virality_config_from_json(const nlohmann::json& j, ConfigIssues& issues,
                                                const std::string& prefix) {
  ViralityConfig c;
  if (!j.is_object()) {
    issues.add(prefix + ": must be a JSON object");
    return c;
  }
  detail::reject_unknown(j,
                         {"users", "edges_per_node", "trending_messages", "informative_messages", "audience",
                          "trend_only_fraction", "trend_only_trending", "trend_only_informative",
                          "general_trending", "general_informative", "mean_daily_events", "days",
                          "train_fraction", "tie_trending", "threshold", "rng_seed"},
                         issues, prefix);
  detail::read_key(j, "users", c.users, issues, prefix);
  detail::read_key(j, "edges_per_node", c.edges_per_node, issues, prefix);
  detail::read_key(j, "trending_messages", c.trending_messages, issues, prefix);
  detail::read_key(j, "informative_messages", c.informative_messages, issues, prefix);
  detail::read_key(j, "audience", c.audience, issues, prefix);
  detail::read_key(j, "trend_only_fraction", c.trend_only_fraction, issues, prefix);
  detail::read_key(j, "trend_only_trending", c.trend_only_trending, issues, prefix);
  detail::read_key(j, "trend_only_informative", c.trend_only_informative, issues, prefix);
  detail::read_key(j, "general_trending", c.general_trending, issues, prefix);
  detail::read_key(j, "general_informative", c.general_informative, issues, prefix);
  detail::read_key(j, "mean_daily_events", c.mean_daily_events, issues, prefix);
  detail::read_key(j, "days", c.days, issues, prefix);
  detail::read_key(j, "train_fraction", c.train_fraction, issues, prefix);
  detail::read_key(j, "tie_trending", c.tie_trending, issues, prefix);
  detail::read_key(j, "threshold", c.threshold, issues, prefix);
  detail::read_key(j, "rng_seed", c.rng_seed, issues, prefix);
  c.check(issues, prefix);
  return c;
}

ViralityCorpus synthesize_virality_corpus(const ViralityConfig& cfg) {
  cfg.validate();
  ViralityCorpus out;
  out.graph = generate_graph(cfg.users, cfg.edges_per_node, derive_seed(cfg.rng_seed, "virality-graph"));
  BehaviorOptions bopt;
  bopt.mean_daily_events = cfg.mean_daily_events;
  out.behaviors = generate_behaviors(cfg.users, bopt, derive_seed(cfg.rng_seed, "virality-behavior"));
  Rng rng(derive_seed(cfg.rng_seed, "virality-corpus"));
  out.trend_only.assign(cfg.users, false);
  for (NodeId u = 0; u < cfg.users; ++u) {
    if (!rng.bernoulli(cfg.trend_only_fraction)) continue;
    out.trend_only[u] = true;
    auto& b = out.behaviors[u];
    b.rate_per_bin[3] *= 3.0;
    b.reply = std::min(0.3, 2.0 * b.reply);
    b.favorite = std::min(0.3, 2.0 * b.favorite);
    b.retweet = std::min(0.3, 2.0 * b.retweet);
    b.hashtag = 1.0 - 0.5 * (1.0 - b.hashtag);
  }
  const Timestamp t0 = kDefaultStartTime;
  const auto days = static_cast<std::size_t>(cfg.days);
  auto background = generate_background(out.graph, out.behaviors, {}, t0, days,
                                        derive_seed(cfg.rng_seed, "virality-events"));
  out.background = std::move(background.events);
  for (NodeId u = 0; u < cfg.users; ++u) {
    const auto& b = out.behaviors[u];
    UserProfile p;
    p.user = u;
    p.account_created = t0 - static_cast<Timestamp>(b.account_age_days * static_cast<double>(kSecondsPerDay));
    p.has_description = b.has_description;
    p.followers_count = out.graph.followers(u).size();
    p.friends_count = out.graph.friends(u).size();
    out.profiles.push_back(p);
  }

  const std::size_t total = cfg.trending_messages + cfg.informative_messages;
  std::vector<EventType> types;
  for (std::size_t i = 0; i < total; ++i) {
    types.push_back(i < cfg.trending_messages ? EventType::trending : EventType::informative);
  }
  rng.shuffle(types);
  const Timestamp span = static_cast<Timestamp>(cfg.days * static_cast<double>(kSecondsPerDay));
  EventId next_id = background.next_id;
  std::vector<NodeId> people(cfg.users);
  for (NodeId u = 0; u < cfg.users; ++u) people[u] = u;
  for (const EventType type : types) {
    Message m;
    m.id = next_id++;
    m.poster = rng.below(cfg.users);
    m.timestamp = t0 + static_cast<Timestamp>(rng.below(static_cast<std::size_t>(span)));
    m.type = type;
    const bool trending = type == EventType::trending;
    // Partial Fisher-Yates draw of the audience, excluding the poster.
    std::vector<NodeId> exposed;
    for (std::size_t k = 0; exposed.size() < cfg.audience; ++k) {
      std::swap(people[k], people[k + rng.below(cfg.users - k)]);
      if (people[k] != m.poster) exposed.push_back(people[k]);
    }
    std::vector<NodeId> reactors;
    for (NodeId u : exposed) {
      const double p = out.trend_only[u] ? (trending ? cfg.trend_only_trending : cfg.trend_only_informative)
                                         : (trending ? cfg.general_trending : cfg.general_informative);
      if (rng.bernoulli(p)) reactors.push_back(u);
    }
    if (reactors.empty()) {
      // Every message has at least one interaction; pick an eligible reactor.
      std::vector<NodeId> eligible;
      for (NodeId u : exposed) {
        const double p = out.trend_only[u] ? (trending ? cfg.trend_only_trending : cfg.trend_only_informative)
                                           : (trending ? cfg.general_trending : cfg.general_informative);
        if (p > 0) eligible.push_back(u);
      }
      if (eligible.empty()) eligible = exposed;
      reactors.push_back(eligible[rng.below(eligible.size())]);
    }
    // Trending messages draw fast reactions, informative ones spread out.
    const double delay_mean = trending ? 2.0 * 3600.0 : 24.0 * 3600.0;
    for (NodeId u : reactors) {
      Interaction in;
      in.message_id = m.id;
      in.reactor = u;
      in.timestamp = m.timestamp + 1 + static_cast<Timestamp>(rng.exponential(delay_mean));
      const std::size_t k = rng.below(3);
      in.kind = k == 0 ? EventKind::retweet : (k == 1 ? EventKind::reply : EventKind::favorite);
      out.interactions.push_back(in);
    }
    out.messages.push_back(m);
  }
  return out;
}

std::vector<InteractionSample> interaction_samples(const ViralityCorpus& corpus) {
  const EventLog log(corpus.background);
  const Topic none("none", {"__no_topic__"});
  const FeatureContext ctx(log, none);
  const ProfileMap profiles = index_profiles(corpus.profiles);
  std::map<EventId, const Message*> by_id;
  for (const auto& m : corpus.messages) by_id[m.id] = &m;
  std::vector<InteractionSample> out;
  out.reserve(corpus.interactions.size());
  for (const auto& in : corpus.interactions) {
    const auto it = by_id.find(in.message_id);
    if (it == by_id.end()) throw DataError("interaction references unknown message " + std::to_string(in.message_id));
    const Message& m = *it->second;
    const auto pv = profiles.find(m.poster);
    const auto pu = profiles.find(in.reactor);
    InteractionSample s;
    s.message_id = m.id;
    s.type = m.type;
    s.sample = make_edge_sample(ctx, corpus.graph, m.poster, in.reactor, TimeBin::of(in.timestamp),
                                pv == profiles.end() ? nullptr : &pv->second,
                                pu == profiles.end() ? nullptr : &pu->second);
    s.sample.label = m.type == EventType::trending ? 1 : 0;
    out.push_back(std::move(s));
  }
  return out;
}

Dataset to_dataset(std::span<const InteractionSample> samples) {
  Dataset d(edge_feature_names());
  for (const auto& s : samples) {
    d.add_row({s.sample.source, s.sample.destination, s.sample.bin.index}, s.sample.x,
              s.type == EventType::trending ? 1 : 0);
  }
  return d;
}

BlrModel train_virality(std::span<const InteractionSample> samples, const BlrOptions& opt) {
  return fit_blr(to_dataset(samples), opt);
}

EventType majority(std::size_t votes_trending, std::size_t votes_informative,
                          EventType tie) {
  if (votes_trending + votes_informative == 0) throw DataError("no votes to count");
  if (votes_trending > votes_informative) return EventType::trending;
  if (votes_trending < votes_informative) return EventType::informative;
  return tie;
}

ViralityVerdict predict_virality(const BlrModel& model, std::span<const InteractionSample> interactions,
                                        double threshold, EventType tie) {
  if (interactions.empty()) throw DataError("a message needs at least one interaction");
  ViralityVerdict v;
  v.message_id = interactions.front().message_id;
  v.n = interactions.size();
  for (const auto& in : interactions) {
    if (predict(model, in.sample.x, threshold) == 1) ++v.votes_trending;
  }
  v.votes_informative = v.n - v.votes_trending;
  v.verdict = majority(v.votes_trending, v.votes_informative, tie);
  return v;
}

std::map<EventId, std::vector<InteractionSample>> group_by_message(std::span<const InteractionSample> samples) {
  std::map<EventId, std::vector<InteractionSample>> out;
  for (const auto& s : samples) out[s.message_id].push_back(s);
  return out;
}

ViralityEvaluation evaluate_virality(const BlrModel& model, std::span<const InteractionSample> samples,
                                            double threshold, EventType tie) {
  ViralityEvaluation ev;
  std::vector<int> labels;
  std::vector<int> preds;
  bool seen[2] = {false, false};
  for (const auto& [id, group] : group_by_message(samples)) {
    ev.verdicts.push_back(predict_virality(model, group, threshold, tie));
    ev.truth.push_back(group.front().type);
    labels.push_back(group.front().type == EventType::trending ? 1 : 0);
    preds.push_back(ev.verdicts.back().verdict == EventType::trending ? 1 : 0);
    seen[labels.back()] = true;
  }
  if (!seen[0] || !seen[1]) throw DataError("virality evaluation needs messages of both types");
  ev.metrics = metrics(labels, preds);
  std::vector<int> y;
  std::vector<double> score;
  for (const auto& s : samples) {
    y.push_back(s.type == EventType::trending ? 1 : 0);
    score.push_back(predict_proba(model, s.sample.x));
  }
  const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  ev.interaction_auc = (pos == 0 || pos == y.size()) ? 0.0 : auc_roc(y, score);
  return ev;
}

std::pair<std::vector<InteractionSample>, std::vector<InteractionSample>> split_by_message(
    std::span<const InteractionSample> samples, double train_fraction, std::uint64_t seed) {
  const auto groups = group_by_message(samples);
  std::vector<EventId> ids;
  std::vector<int> types;
  for (const auto& [id, group] : groups) {
    ids.push_back(id);
    types.push_back(group.front().type == EventType::trending ? 1 : 0);
  }
  const auto [train_idx, test_idx] = stratified_split(types, train_fraction, seed);
  std::pair<std::vector<InteractionSample>, std::vector<InteractionSample>> out;
  for (std::size_t i : train_idx) {
    const auto& g = groups.at(ids[i]);
    out.first.insert(out.first.end(), g.begin(), g.end());
  }
  for (std::size_t i : test_idx) {
    const auto& g = groups.at(ids[i]);
    out.second.insert(out.second.end(), g.begin(), g.end());
  }
  return out;
}

void write_verdicts_csv(std::ostream& out, const ViralityEvaluation& ev) {
  out << "message_id,n,votes_trending,verdict,truth\n";
  for (std::size_t i = 0; i < ev.verdicts.size(); ++i) {
    const auto& v = ev.verdicts[i];
    out << v.message_id << ',' << v.n << ',' << v.votes_trending << ',' << to_string(v.verdict) << ','
        << to_string(ev.truth[i]) << '\n';
  }
}

}  // namespace midmod
