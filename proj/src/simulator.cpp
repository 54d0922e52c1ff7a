#include "midmod/simulator.hpp"

namespace midmod {

Cascade run_asic(const SocialGraph& graph, std::span<const NodeId> seeds,
                        const AsicParams& params, std::uint64_t rng_seed,
                        double start_time) {
  if (!params.edge_probability) throw ConfigError("edge probability function is missing");
  if (!(params.delay_mean > 0)) throw ConfigError("delay mean must be positive");
  if (!(params.horizon >= 0)) throw ConfigError("horizon must be non-negative");
  Cascade c;
  if (seeds.empty()) return c;

  using Item = std::tuple<double, NodeId, NodeId, bool>;  // time, node, activator, has activator
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::unordered_map<NodeId, double> best;  // earliest scheduled arrival
  std::unordered_map<NodeId, bool> active;
  for (NodeId s : seeds) {
    if (!graph.contains(s)) throw DataError("seed " + std::to_string(s) + " is not in the graph");
    if (best.emplace(s, 0.0).second) queue.emplace(0.0, s, 0, false);
  }
  while (!queue.empty()) {
    const auto [t, node, by, has_by] = queue.top();
    queue.pop();
    if (t > params.horizon) break;
    if (active[node]) continue;
    active[node] = true;
    c.activations.push_back({node, start_time + t, has_by ? std::optional<NodeId>(by) : std::nullopt});
    for (NodeId u : graph.followers(node)) {
      if (active[u]) continue;
      c.attempts.emplace_back(node, u);
      const double p = params.edge_probability(node, u);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("edge probability out of [0, 1] on (" + std::to_string(node) + ", " +
                          std::to_string(u) + ")");
      }
      if (detail::edge_unit(rng_seed, node, u, 0) >= p) continue;
      const double delay = -params.delay_mean * std::log(detail::edge_unit(rng_seed, node, u, 1));
      const double arrival = std::max(t + delay, std::nextafter(t, HUGE_VAL));
      if (arrival > params.horizon) continue;
      const auto it = best.find(u);
      if (it != best.end() && it->second <= arrival) continue;
      best[u] = arrival;
      queue.emplace(arrival, u, node, true);
    }
  }
  return c;
}

SocialGraph generate_graph(std::size_t users, std::size_t edges_per_node, std::uint64_t seed) {
  if (users < 2) throw ConfigError("need at least 2 users");
  if (edges_per_node < 1) throw ConfigError("edges_per_node must be at least 1");
  SocialGraph g;
  Rng rng(seed);
  std::vector<NodeId> urn;
  g.add_node(0);
  urn.push_back(0);
  for (NodeId u = 1; u < users; ++u) {
    g.add_node(u);
    const std::size_t k = std::min<std::size_t>(edges_per_node, u);
    std::vector<NodeId> chosen;
    while (chosen.size() < k) {
      const NodeId v = urn[rng.below(urn.size())];
      if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) chosen.push_back(v);
    }
    std::sort(chosen.begin(), chosen.end());
    for (NodeId v : chosen) {
      g.add_edge(v, u);
      urn.push_back(v);
    }
    urn.push_back(u);
  }
  return g;
}

std::vector<BehaviorProfile> generate_behaviors(std::size_t users, const BehaviorOptions& opt,
                                                       std::uint64_t seed) {
  if (!(opt.mean_daily_events >= 0)) throw ConfigError("mean_daily_events must be non-negative");
  double profile_sum = 0;
  for (double w : opt.bin_profile) {
    if (!(w >= 0)) throw ConfigError("bin_profile entries must be non-negative");
    profile_sum += w;
  }
  if (!(profile_sum > 0)) throw ConfigError("bin_profile must have positive mass");
  Rng rng(seed);
  std::vector<BehaviorProfile> out(users);
  const double sigma = opt.activity_sigma;
  for (auto& b : out) {
    const double daily = opt.mean_daily_events * std::exp(rng.normal(-0.5 * sigma * sigma, sigma));
    std::array<double, kBinCount> w{};
    double s = 0;
    for (std::size_t k = 0; k < kBinCount; ++k) {
      w[k] = opt.bin_profile[k] / profile_sum * std::exp(rng.normal(0.0, 0.5));
      s += w[k];
    }
    for (std::size_t k = 0; k < kBinCount; ++k) {
      b.rate_per_bin[k] = s > 0 ? daily * (w[k] / s) / 6.0 : 0.0;
    }
    b.hashtag = logistic(rng.normal(-0.5, 1.2));
    b.url = logistic(rng.normal(-0.5, 1.2));
    b.media = logistic(rng.normal(-1.0, 1.2));
    b.directed = logistic(rng.normal(-1.5, 1.2));
    b.mention = logistic(rng.normal(-1.5, 1.0));
    b.sentiment = std::tanh(rng.normal(0.0, 0.6));
    b.reply = rng.uniform(0.05, 0.2);
    b.favorite = rng.uniform(0.05, 0.25);
    b.retweet = rng.uniform(0.05, 0.2);
    b.quote = rng.uniform(0.0, 0.05);
    b.has_description = rng.bernoulli(0.7);
    b.account_age_days = rng.uniform(30.0, 3000.0);
  }
  return out;
}

nlohmann::json to_json(const SimulationConfig& c) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [k, v] : c.planted_weights) weights[k] = v;
  return {{"users", c.users},
          {"edges_per_node", c.edges_per_node},
          {"delay_mean_s", c.delay_mean_s},
          {"horizon_s", c.horizon_s},
          {"topics", c.topics},
          {"planted_weights", weights},
          {"class_balance", c.class_balance ? nlohmann::json(*c.class_balance) : nlohmann::json(nullptr)},
          {"rng_seed", c.rng_seed},
          {"start_time", c.start_time},
          {"mean_daily_events", c.mean_daily_events},
          {"quote_fraction", c.quote_fraction},
          {"bin_profile", c.bin_profile}};
}

SimulationConfig simulation_config_from_json(const nlohmann::json& j, ConfigIssues& issues,
                                                    const std::string& prefix) {
  SimulationConfig c;
  if (!j.is_object()) {
    issues.add(prefix + ": must be a JSON object");
    return c;
  }
  detail::reject_unknown(j,
                         {"users", "edges_per_node", "delay_mean_s", "horizon_s", "topics", "planted_weights",
                          "class_balance", "rng_seed", "start_time", "mean_daily_events", "quote_fraction",
                          "bin_profile"},
                         issues, prefix);
  detail::read_key(j, "users", c.users, issues, prefix);
  detail::read_key(j, "edges_per_node", c.edges_per_node, issues, prefix);
  detail::read_key(j, "delay_mean_s", c.delay_mean_s, issues, prefix);
  detail::read_key(j, "horizon_s", c.horizon_s, issues, prefix);
  detail::read_key(j, "topics", c.topics, issues, prefix);
  detail::read_key(j, "planted_weights", c.planted_weights, issues, prefix);
  if (j.contains("class_balance") && j["class_balance"].is_null()) {
    c.class_balance.reset();
  } else {
    double cb = c.class_balance.value_or(0.4);
    detail::read_key(j, "class_balance", cb, issues, prefix);
    c.class_balance = cb;
  }
  detail::read_key(j, "rng_seed", c.rng_seed, issues, prefix);
  detail::read_key(j, "start_time", c.start_time, issues, prefix);
  detail::read_key(j, "mean_daily_events", c.mean_daily_events, issues, prefix);
  detail::read_key(j, "quote_fraction", c.quote_fraction, issues, prefix);
  detail::read_key(j, "bin_profile", c.bin_profile, issues, prefix);
  c.check(issues, prefix);
  return c;
}

SimulationConfig simulation_config_from_json(const nlohmann::json& j) {
  ConfigIssues issues;
  auto c = simulation_config_from_json(j, issues);
  issues.raise();
  return c;
}

Topic synthetic_topic(std::size_t t) {
  std::vector<std::string> words;
  for (int k = 0; k < 60; ++k) words.push_back("topic" + std::to_string(t) + "_kw" + std::to_string(k));
  return Topic("topic" + std::to_string(t), std::move(words));
}

BackgroundLog generate_background(const SocialGraph& graph,
                                         const std::vector<BehaviorProfile>& behaviors,
                                         std::span<const Topic> topics, Timestamp start,
                                         std::size_t days, std::uint64_t seed) {
  const std::size_t users = behaviors.size();
  for (NodeId u = 0; u < users; ++u) {
    if (!graph.contains(u)) throw ConfigError("behavior for user " + std::to_string(u) + " has no graph node");
  }
  BackgroundLog out;
  out.roots.assign(topics.size(), std::vector<EventId>(users, 0));
  out.root_ts.assign(topics.size(), std::vector<Timestamp>(users, 0));
  Rng rng(seed);
  detail::BackgroundWriter writer(graph, behaviors, rng);
  auto& events = out.events;
  EventId& next_id = out.next_id;
  std::vector<detail::PendingReaction> pending;
  std::vector<std::vector<std::size_t>> originals_of(users);  // indexes into events
  const auto in_bin = [&](std::size_t day, std::size_t bin) {
    return start + static_cast<Timestamp>(day) * kSecondsPerDay + static_cast<Timestamp>(bin) * kSecondsPerBin +
           static_cast<Timestamp>(rng.below(static_cast<std::size_t>(kSecondsPerBin)));
  };
  for (NodeId u = 0; u < users; ++u) {
    const auto& b = behaviors[u];
    const double react = b.reply + b.favorite + b.retweet + b.quote;
    for (std::size_t day = 0; day < days; ++day) {
      for (std::size_t bin = 0; bin < kBinCount; ++bin) {
        const auto n = rng.poisson(b.rate_per_bin[bin] * 6.0);
        for (std::uint64_t k = 0; k < n; ++k) {
          const Timestamp ts = in_bin(day, bin);
          const double x = rng.uniform();
          if (x >= react) {
            originals_of[u].push_back(events.size());
            events.push_back(writer.original(u, ts, next_id++));
          } else {
            EventKind kind = EventKind::favorite;
            if (x < b.reply) kind = EventKind::reply;
            else if (x < b.reply + b.retweet) kind = EventKind::retweet;
            else if (x < b.reply + b.retweet + b.quote) kind = EventKind::quote;
            pending.push_back({ts, u, kind});
          }
        }
      }
    }
    for (std::size_t t = 0; t < topics.size(); ++t) {
      const auto w = b.bin_weights();
      double x = rng.uniform();
      std::size_t bin = 0;
      while (bin + 1 < kBinCount && x >= w[bin]) x -= w[bin++];
      EventRecord r;
      r.event_id = next_id++;
      r.user = u;
      r.timestamp = in_bin(rng.below(std::max<std::size_t>(1, days)), bin);
      r.kind = EventKind::tweet;
      const auto& words = topics[t].keywords;
      const std::size_t kw = 1 + rng.below(3);
      for (std::size_t k = 0; k < kw; ++k) r.tokens.push_back(words[rng.below(words.size())]);
      writer.fill_content(r, b);
      out.roots[t][u] = r.event_id;
      out.root_ts[t][u] = r.timestamp;
      originals_of[u].push_back(events.size());
      events.push_back(std::move(r));
    }
  }
  for (auto& list : originals_of) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(events[a].timestamp, events[a].event_id) < std::tie(events[b].timestamp, events[b].event_id);
    });
  }

  for (const auto& pr : pending) {
    const auto friends = graph.friends(pr.user);
    std::optional<std::size_t> target;
    if (!friends.empty()) {
      const NodeId f = friends[rng.below(friends.size())];
      std::vector<std::size_t> eligible;
      if (f < users) {
        const auto& list = originals_of[f];
        const auto end = std::partition_point(list.begin(), list.end(),
                                              [&](std::size_t i) { return events[i].timestamp < pr.ts; });
        for (auto it = list.begin(); it != end; ++it) {
          bool topical = false;
          for (const auto& topic : topics) topical = topical || is_relevant(events[*it], topic);
          if (!is_forward(pr.kind) || !topical) eligible.push_back(*it);
        }
      }
      if (!eligible.empty()) target = eligible[rng.below(eligible.size())];
    }
    if (!target) {
      events.push_back(writer.original(pr.user, pr.ts, next_id++));
      continue;
    }
    const EventRecord& ref = events[*target];
    EventRecord r;
    r.event_id = next_id++;
    r.user = pr.user;
    r.timestamp = pr.ts;
    r.kind = pr.kind;
    r.ref_event = ref.event_id;
    r.ref_author = ref.user;
    if (pr.kind == EventKind::retweet) {
      r.tokens = ref.tokens;
      r.hashtag_count = ref.hashtag_count;
      r.url_count = ref.url_count;
      r.media_count = ref.media_count;
    } else if (pr.kind == EventKind::reply || pr.kind == EventKind::quote) {
      writer.fill_content(r, behaviors[pr.user]);
      if (pr.kind == EventKind::reply) r.mentions.push_back(ref.user);
    }
    events.push_back(std::move(r));
  }
  return out;
}

SyntheticData synthesize_dataset(const SimulationConfig& cfg) {
  cfg.validate();
  SyntheticData out;
  out.graph = generate_graph(cfg.users, cfg.edges_per_node, derive_seed(cfg.rng_seed, "graph"));
  const SocialGraph& graph = out.graph;
  BehaviorOptions bopt;
  bopt.mean_daily_events = cfg.mean_daily_events;
  bopt.bin_profile = cfg.bin_profile;
  out.behaviors = generate_behaviors(cfg.users, bopt, derive_seed(cfg.rng_seed, "behavior"));
  for (std::size_t t = 0; t < cfg.topics; ++t) out.topics.push_back(synthetic_topic(t));

  const Timestamp t0 = cfg.start_time;
  for (NodeId u = 0; u < cfg.users; ++u) {
    const auto& b = out.behaviors[u];
    UserProfile p;
    p.user = u;
    p.account_created = t0 - static_cast<Timestamp>(b.account_age_days * static_cast<double>(kSecondsPerDay));
    p.has_description = b.has_description;
    p.followers_count = graph.followers(u).size();
    p.friends_count = graph.friends(u).size();
    out.profiles.push_back(p);
  }

  const auto days = static_cast<std::size_t>(std::ceil(cfg.horizon_s / static_cast<double>(kSecondsPerDay)));
  BackgroundLog background =
      generate_background(graph, out.behaviors, out.topics, t0, days, derive_seed(cfg.rng_seed, "events"));
  std::vector<EventRecord>& events = out.events;
  events = std::move(background.events);
  EventId next_id = background.next_id;
  const auto& roots = background.roots;
  const auto& root_ts = background.root_ts;

  // Planted edge model from the pre-cascade log.
  const std::vector<Edge> edges = graph.edges();
  const ProfileMap profiles = index_profiles(out.profiles);
  std::optional<PlantedModel> model;
  {
    const EventLog base(events);
    const FeatureContext ctx(base, out.topics.front());
    model.emplace(edges, ctx, graph, profiles, cfg.planted_weights);
  }
  std::unordered_map<NodeId, std::size_t> first_edge;  // edges are sorted by source
  for (std::size_t e = edges.size(); e-- > 0;) first_edge[edges[e].first] = e;
  const auto edge_slot = [&](NodeId v, NodeId u) {
    const std::size_t base = first_edge.at(v);
    const auto f = graph.followers(v);
    return base + static_cast<std::size_t>(std::lower_bound(f.begin(), f.end(), u) - f.begin());
  };

  const std::uint64_t cascade_seed = derive_seed(cfg.rng_seed, "cascade");
  const auto run_all = [&](double intercept, bool keep) {
    AsicParams params;
    params.delay_mean = cfg.delay_mean_s;
    params.horizon = cfg.horizon_s;
    params.edge_probability = [&](NodeId v, NodeId u) { return model->probability(edge_slot(v, u), intercept); };
    std::vector<std::vector<int>> labels(edges.size(), std::vector<int>(cfg.topics, 0));
    std::vector<std::vector<Cascade>> cascades(cfg.topics);
    for (std::size_t t = 0; t < cfg.topics; ++t) {
      for (NodeId v = 0; v < cfg.users; ++v) {
        const NodeId seed[] = {v};
        Cascade c = run_asic(graph, seed, params, hash_combine(hash_combine(cascade_seed, t), v),
                             static_cast<double>(root_ts[t][v]));
        const auto f = graph.followers(v);
        for (const auto& a : c.activations) {
          if (std::binary_search(f.begin(), f.end(), a.node)) labels[edge_slot(v, a.node)][t] = 1;
        }
        if (keep) cascades[t].push_back(std::move(c));
      }
    }
    return std::pair{labels, cascades};
  };
  const auto rate = [&](const std::vector<std::vector<int>>& labels) {
    double pos = 0;
    for (const auto& l : labels) for (int y : l) pos += y;
    return labels.empty() ? 0.0 : pos / static_cast<double>(labels.size() * cfg.topics);
  };

  double intercept = 0.0;
  if (cfg.class_balance && !edges.empty()) {
    // Realized rates are monotone in the intercept because every draw is
    // counter-based, so bisection converges.
    const double target = *cfg.class_balance;
    double lo = -30.0;
    double hi = 30.0;
    double best_gap = HUGE_VAL;
    for (int it = 0; it < 30 && hi - lo > 1e-4; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double r = rate(run_all(mid, false).first);
      if (std::abs(r - target) < best_gap) {
        best_gap = std::abs(r - target);
        intercept = mid;
      }
      (r < target ? lo : hi) = mid;
    }
  }
  out.intercept = intercept;
  auto [labels, cascades] = run_all(intercept, true);

  for (std::size_t e = 0; e < edges.size(); ++e) {
    out.truth.push_back({edges[e].first, edges[e].second, model->probability(e, intercept), labels[e]});
  }

  // Every non-seed activation forwards the cascade root.
  Rng forward_rng(derive_seed(cfg.rng_seed, "forwards"));
  std::unordered_map<EventId, std::size_t> index_of;
  for (std::size_t i = 0; i < events.size(); ++i) index_of[events[i].event_id] = i;
  for (std::size_t t = 0; t < cfg.topics; ++t) {
    for (NodeId v = 0; v < cfg.users; ++v) {
      const std::size_t root_index = index_of.at(roots[t][v]);
      for (const auto& a : cascades[t][v].activations) {
        if (!a.activator) continue;
        const EventRecord& root = events[root_index];
        EventRecord r;
        r.event_id = next_id++;
        r.user = a.node;
        r.timestamp = static_cast<Timestamp>(std::floor(a.time));
        r.kind = forward_rng.bernoulli(cfg.quote_fraction) ? EventKind::quote : EventKind::retweet;
        r.ref_event = root.event_id;
        r.ref_author = root.user;
        r.tokens = root.tokens;
        r.hashtag_count = root.hashtag_count;
        r.url_count = root.url_count;
        r.media_count = root.media_count;
        events.push_back(std::move(r));
      }
    }
  }
  out.cascades = std::move(cascades);
  return out;
}

}  // namespace midmod
