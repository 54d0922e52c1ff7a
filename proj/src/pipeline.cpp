#include "midmod/pipeline.hpp"

#include <openssl/evp.h>

namespace midmod {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json sim = to_json(c.simulation);
  sim.erase("rng_seed");
  return {{"rng_seed", c.rng_seed},
          {"paths",
           {{"graph", c.paths.graph},
            {"events", c.paths.events},
            {"profiles", c.paths.profiles},
            {"topic", c.paths.topic},
            {"lexicon", c.paths.lexicon ? nlohmann::json(*c.paths.lexicon) : nlohmann::json(nullptr)}}},
          {"simulation", sim},
          {"blr", {{"prior_variance", c.blr.prior_variance}, {"tol", c.blr.tol}, {"max_iter", c.blr.max_iter}}},
          {"forest",
           {{"n_trees", c.forest.n_trees},
            {"max_depth", c.forest.max_depth},
            {"min_leaf", c.forest.min_leaf},
            {"features_per_split", c.forest.features_per_split},
            {"max_bins", c.forest.max_bins}}},
          {"eval",
           {{"k", c.eval.k},
            {"train_fraction", c.eval.train_fraction},
            {"repeats", c.eval.repeats},
            {"threshold", c.eval.threshold},
            {"select_top", c.eval.select_top}}},
          {"top_k", c.top_k},
          {"strict", c.strict},
          {"model", c.model ? nlohmann::json(*c.model) : nlohmann::json(nullptr)},
          {"dataset", c.dataset ? nlohmann::json(*c.dataset) : nlohmann::json(nullptr)},
          {"virality", [&] {
             auto v = to_json(c.virality);
             v.erase("rng_seed");
             return v;
           }()}};
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  std::vector<std::string> parts;
  for (std::size_t start = 0;;) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (parts.back().empty()) throw ConfigError("override key '" + key + "' is malformed");
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  nlohmann::json* node = &j;
  for (const auto& part : parts) {
    if (!node->is_object()) *node = nlohmann::json::object();
    node = &(*node)[part];
  }
  *node = std::move(value);
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  ConfigIssues issues;
  PipelineConfig c;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j,
                         {"rng_seed", "output_dir", "paths", "simulation", "blr", "forest", "eval", "top_k",
                          "strict", "model", "dataset", "virality"},
                         issues, "");
  detail::read_key(j, "rng_seed", c.rng_seed, issues, "");
  c.seed_given = j.contains("rng_seed");
  std::string out_dir = c.output_dir.string();
  detail::read_key(j, "output_dir", out_dir, issues, "");
  c.output_dir = out_dir;
  detail::read_key(j, "top_k", c.top_k, issues, "");
  detail::read_key(j, "strict", c.strict, issues, "");
  for (const char* key : {"model", "dataset"}) {
    if (!j.contains(key) || j[key].is_null()) continue;
    std::string v;
    detail::read_key(j, key, v, issues, "");
    (std::string_view(key) == "model" ? c.model : c.dataset) = v;
  }

  if (j.contains("paths")) {
    const auto& p = j["paths"];
    if (!p.is_object()) {
      issues.add("paths: must be a JSON object");
    } else {
      detail::reject_unknown(p, {"graph", "events", "profiles", "topic", "lexicon"}, issues, "paths.");
      detail::read_key(p, "graph", c.paths.graph, issues, "paths.");
      detail::read_key(p, "events", c.paths.events, issues, "paths.");
      detail::read_key(p, "profiles", c.paths.profiles, issues, "paths.");
      detail::read_key(p, "topic", c.paths.topic, issues, "paths.");
      if (p.contains("lexicon") && !p["lexicon"].is_null()) {
        std::string lex;
        detail::read_key(p, "lexicon", lex, issues, "paths.");
        c.paths.lexicon = lex;
      }
    }
  }
  if (j.contains("simulation")) {
    c.simulation = simulation_config_from_json(j["simulation"], issues, "simulation.");
    if (j["simulation"].is_object() && j["simulation"].contains("rng_seed")) {
      issues.add("simulation.rng_seed: use the root rng_seed");
    }
  }
  c.simulation.rng_seed = c.rng_seed;
  if (j.contains("blr")) {
    const auto& b = j["blr"];
    detail::reject_unknown(b, {"prior_variance", "tol", "max_iter"}, issues, "blr.");
    detail::read_key(b, "prior_variance", c.blr.prior_variance, issues, "blr.");
    detail::read_key(b, "tol", c.blr.tol, issues, "blr.");
    detail::read_key(b, "max_iter", c.blr.max_iter, issues, "blr.");
  }
  if (!(c.blr.prior_variance > 0)) issues.add("blr.prior_variance: must be positive");
  if (!(c.blr.tol > 0)) issues.add("blr.tol: must be positive");
  if (c.blr.max_iter < 1) issues.add("blr.max_iter: must be at least 1");
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    detail::reject_unknown(f, {"n_trees", "max_depth", "min_leaf", "features_per_split", "max_bins"}, issues,
                           "forest.");
    detail::read_key(f, "n_trees", c.forest.n_trees, issues, "forest.");
    detail::read_key(f, "max_depth", c.forest.max_depth, issues, "forest.");
    detail::read_key(f, "min_leaf", c.forest.min_leaf, issues, "forest.");
    detail::read_key(f, "features_per_split", c.forest.features_per_split, issues, "forest.");
    detail::read_key(f, "max_bins", c.forest.max_bins, issues, "forest.");
  }
  if (c.forest.n_trees < 1) issues.add("forest.n_trees: must be at least 1");
  if (c.forest.max_depth < 0) issues.add("forest.max_depth: must be non-negative");
  if (c.forest.min_leaf < 1) issues.add("forest.min_leaf: must be at least 1");
  if (c.forest.features_per_split < 0) issues.add("forest.features_per_split: must be non-negative");
  if (c.forest.max_bins < 2 || c.forest.max_bins > 65535) issues.add("forest.max_bins: must be in [2, 65535]");
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    detail::reject_unknown(e, {"k", "train_fraction", "repeats", "threshold", "select_top"}, issues, "eval.");
    detail::read_key(e, "k", c.eval.k, issues, "eval.");
    detail::read_key(e, "train_fraction", c.eval.train_fraction, issues, "eval.");
    detail::read_key(e, "repeats", c.eval.repeats, issues, "eval.");
    detail::read_key(e, "threshold", c.eval.threshold, issues, "eval.");
    detail::read_key(e, "select_top", c.eval.select_top, issues, "eval.");
  }
  if (c.eval.k < 2) issues.add("eval.k: must be at least 2");
  if (!(c.eval.train_fraction > 0 && c.eval.train_fraction < 1)) issues.add("eval.train_fraction: must be in (0, 1)");
  if (c.eval.repeats < 1) issues.add("eval.repeats: must be at least 1");
  if (!(c.eval.threshold >= 0 && c.eval.threshold <= 1)) issues.add("eval.threshold: must be in [0, 1]");
  if (c.eval.select_top > kEdgeFeatureCount) issues.add("eval.select_top: must be at most 55");
  if (c.top_k < 1 || c.top_k > kEdgeFeatureCount) issues.add("top_k: must be in [1, 55]");
  if (j.contains("virality")) {
    c.virality = virality_config_from_json(j["virality"], issues, "virality.");
    if (j["virality"].is_object() && j["virality"].contains("rng_seed")) {
      issues.add("virality.rng_seed: use the root rng_seed");
    }
  }
  c.virality.rng_seed = c.rng_seed;
  issues.raise();
  return c;
}

std::string bin_file(const std::string& stem, std::size_t b, const std::string& ext) {
  return stem + "_bin" + std::to_string(b) + ext;
}

Manifest run_simulate(const PipelineConfig& cfg) {
  Workspace ws(cfg, "simulate");
  const SyntheticData data = synthesize_dataset(cfg.simulation);
  ws.write_with(cfg.paths.graph, [&](std::ostream& out) { write_edge_list(out, data.graph); });
  ws.write_with(cfg.paths.events, [&](std::ostream& out) { write_events(out, data.events); });
  ws.write_with(cfg.paths.profiles, [&](std::ostream& out) { write_profiles(out, data.profiles); });
  ws.write_json(cfg.paths.topic, to_json(data.topics.front()));
  for (std::size_t t = 1; t < data.topics.size(); ++t) {
    ws.write_json("topic_" + std::to_string(t) + ".json", to_json(data.topics[t]));
  }
  ws.write_with("truth.csv", [&](std::ostream& out) {
    out << "source,destination,probability";
    for (std::size_t t = 0; t < data.topics.size(); ++t) out << ",label_" << t;
    out << '\n';
    for (const auto& e : data.truth) {
      out << e.source << ',' << e.destination << ',' << format_value(e.probability);
      for (int y : e.labels) out << ',' << y;
      out << '\n';
    }
  });
  ws.write_json("simulate_report.json", {{"users", data.graph.node_count()},
                                         {"edges", data.graph.edge_count()},
                                         {"events", data.events.size()},
                                         {"intercept", data.intercept},
                                         {"label_rate", data.label_rate()}});
  return ws.finish();
}

Manifest run_ingest(const PipelineConfig& cfg) {
  Workspace ws(cfg, "ingest");
  IngestResult in = ingest(ws.input(cfg.paths.events), ws.input(cfg.paths.profiles));
  ws.write_json("ingest_report.json", in.report.to_json());
  if (cfg.strict && (in.report.malformed > 0 || in.report.profiles_malformed > 0)) {
    ws.finish();
    throw DataError("strict ingest: " + std::to_string(in.report.malformed) + " malformed event lines, " +
                    std::to_string(in.report.profiles_malformed) + " malformed profile lines");
  }
  return ws.finish();
}

Manifest run_extract(const PipelineConfig& cfg) {
  Workspace ws(cfg, "extract");
  const SocialGraph graph = load_edge_list(ws.input(cfg.paths.graph));
  const IngestResult in = detail::load_inputs(ws, cfg);
  const Topic topic = load_topic(ws.input(cfg.paths.topic));
  std::optional<Lexicon> lexicon;
  if (cfg.paths.lexicon) lexicon = load_lexicon(ws.input(*cfg.paths.lexicon));
  const ProfileMap profiles = index_profiles(in.profiles);
  const FeatureContext ctx(in.log, topic, lexicon ? &*lexicon : nullptr);
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t b = 0; b < kBinCount; ++b) {
    const DatasetBuild build = build_dataset(graph, ctx, profiles, TimeBin{static_cast<int>(b)});
    const Dataset data = to_dataset(build.samples);
    ws.write_with(bin_file("dataset", b, ".csv"), [&](std::ostream& out) { write_csv(out, data); });
    bins.push_back({{"bin", b},
                    {"rows", data.rows()},
                    {"positives", data.positives()},
                    {"skipped_missing_profile", build.skipped_missing_profile}});
  }
  ws.write_json("extract_report.json", {{"ingest", in.report.to_json()}, {"bins", bins}});
  return ws.finish();
}

Manifest run_train(const PipelineConfig& cfg) {
  Workspace ws(cfg, "train");
  const auto datasets = detail::load_bin_datasets(ws);
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t b = 0; b < kBinCount; ++b) {
    const BlrModel m = fit_blr(datasets[b], cfg.blr);
    ws.write_json(bin_file("model", b, ".json"), to_json(m));
    bins.push_back({{"bin", b}, {"converged", m.converged}, {"iterations", m.iterations}, {"rows", datasets[b].rows()}});
  }
  ws.write_json("train_report.json", {{"bins", bins}});
  return ws.finish();
}

Manifest run_rank(const PipelineConfig& cfg) {
  Workspace ws(cfg, "rank");
  const auto datasets = detail::load_bin_datasets(ws);
  std::vector<ForestModel> forests;
  for (std::size_t b = 0; b < kBinCount; ++b) {
    forests.push_back(fit_forest(datasets[b], detail::stage_forest(cfg, "rank", b)));
    const auto ranking = importance_ranking(forests.back());
    ws.write_with(bin_file("ranking", b, ".csv"), [&](std::ostream& out) { write_ranking_csv(out, ranking); });
  }
  const auto pooled = pooled_ranking(forests);
  ws.write_with("ranking.csv", [&](std::ostream& out) { write_ranking_csv(out, pooled); });
  return ws.finish();
}

Manifest run_retrain_topk(const PipelineConfig& cfg) {
  Workspace ws(cfg, "retrain-topk");
  const auto datasets = detail::load_bin_datasets(ws);
  std::ifstream rin(ws.input("ranking.csv"));
  const auto ranking = read_ranking_csv(rin, datasets[0].columns());
  const auto cols = select_top_k(ranking, cfg.top_k);
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t b = 0; b < kBinCount; ++b) {
    const BlrModel m = fit_blr(datasets[b].select_columns(cols), cfg.blr);
    ws.write_json(bin_file(topk_stem(cfg.top_k), b, ".json"), to_json(m));
    bins.push_back({{"bin", b}, {"converged", m.converged}, {"free_weights", m.free_weights()}});
  }
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t c : cols) features.push_back(datasets[0].columns()[c]);
  ws.write_json("retrain_top" + std::to_string(cfg.top_k) + "_report.json", {{"k", cfg.top_k}, {"features", features}, {"bins", bins}});
  return ws.finish();
}

Manifest run_evaluate(const PipelineConfig& cfg) {
  Workspace ws(cfg, "evaluate");
  const auto datasets = detail::load_bin_datasets(ws);
  EvalReport kfold;
  kfold.procedure = "kfold";
  kfold.k = cfg.eval.k;
  kfold.seed = derive_seed(cfg.rng_seed, "evaluate/kfold");
  kfold.threshold = cfg.eval.threshold;
  EvalReport hold;
  hold.procedure = "holdout";
  hold.train_fraction = cfg.eval.train_fraction;
  hold.repeats = cfg.eval.repeats;
  hold.seed = derive_seed(cfg.rng_seed, "evaluate/holdout");
  hold.threshold = cfg.eval.threshold;
  for (std::size_t b = 0; b < kBinCount; ++b) {
    std::optional<SelectionOptions> selection;
    if (cfg.eval.select_top > 0) selection = SelectionOptions{cfg.eval.select_top, detail::stage_forest(cfg, "evaluate", b)};
    const Learner learner = blr_learner(cfg.blr, selection);
    const auto bin = static_cast<int>(b);
    kfold.per_bin[bin] = cross_validate(datasets[b], learner, cfg.eval.k, hash_combine(kfold.seed, b), cfg.eval.threshold);
    hold.per_bin[bin] = holdout(datasets[b], learner, cfg.eval.train_fraction, cfg.eval.repeats,
                                hash_combine(hold.seed, b), cfg.eval.threshold);
    for (const auto& f : kfold.per_bin[bin].folds) kfold.folds.push_back(f);
    for (const auto& f : hold.per_bin[bin].folds) hold.folds.push_back(f);
  }
  kfold.summarize();
  hold.summarize();
  ws.write_json("evaluate_report.json", {{"select_top", cfg.eval.select_top},
                                         {"kfold", to_json(kfold)},
                                         {"holdout", to_json(hold)}});
  ws.write_with("evaluate_kfold.csv", [&](std::ostream& out) { write_summary_csv(out, kfold); });
  ws.write_with("evaluate_holdout.csv", [&](std::ostream& out) { write_summary_csv(out, hold); });
  return ws.finish();
}

Manifest run_cross_test(const PipelineConfig& cfg) {
  Workspace ws(cfg, "cross-test");
  if (cfg.model || cfg.dataset) {
    if (!cfg.model || !cfg.dataset) throw ConfigError("cross-test needs both model and dataset, or neither");
    const BlrModel m = blr_from_json(detail::read_json_file(ws.input(*cfg.model)));
    const Dataset d = load_csv(ws.input(*cfg.dataset));
    const EvalReport r = cross_test(m, d, cfg.eval.threshold);
    ws.write_json("cross_test_report.json", to_json(r));
    return ws.finish();
  }
  const auto datasets = detail::load_bin_datasets(ws);
  const auto models = detail::load_bin_models(ws, "model");
  ws.write_with("cross_test.csv", [&](std::ostream& out) {
    out << "model_bin,dataset_bin,precision,recall,f1,auc\n";
    for (std::size_t a = 0; a < kBinCount; ++a) {
      for (std::size_t b = 0; b < kBinCount; ++b) {
        const EvalReport r = cross_test(models[a], datasets[b], cfg.eval.threshold);
        out << a << ',' << b << ',' << format_value(r.precision.mean) << ',' << format_value(r.recall.mean) << ','
            << format_value(r.f1.mean) << ',' << format_value(r.auc.mean) << '\n';
      }
    }
  });
  return ws.finish();
}

Manifest run_time_report(const PipelineConfig& cfg) {
  Workspace ws(cfg, "time-report");
  const IngestResult in = detail::load_inputs(ws, cfg);
  const Topic topic = load_topic(ws.input(cfg.paths.topic));
  const auto datasets = detail::load_bin_datasets(ws);
  const auto models = detail::load_bin_models(ws, "model");
  const auto rows = time_to_tweet_report(in.log, topic, datasets, models);
  ws.write_with("time_report.csv", [&](std::ostream& out) { write_time_report_csv(out, rows); });
  return ws.finish();
}

Manifest run_predict_virality(const PipelineConfig& cfg) {
  Workspace ws(cfg, "predict-virality");
  const ViralityConfig& vc = cfg.virality;
  const ViralityCorpus corpus = synthesize_virality_corpus(vc);
  const auto samples = interaction_samples(corpus);
  const auto [train, test] = split_by_message(samples, vc.train_fraction, derive_seed(vc.rng_seed, "virality-split"));
  const BlrModel model = train_virality(train, cfg.blr);
  const EventType tie = vc.tie_trending ? EventType::trending : EventType::informative;
  const ViralityEvaluation ev = evaluate_virality(model, test, vc.threshold, tie);
  ws.write_json("virality_model.json", to_json(model));
  ws.write_with("virality_verdicts.csv", [&](std::ostream& out) { write_verdicts_csv(out, ev); });
  ws.write_json("virality_report.json", {{"messages", corpus.messages.size()},
                                         {"interactions", samples.size()},
                                         {"train_interactions", train.size()},
                                         {"test_messages", ev.verdicts.size()},
                                         {"precision", ev.metrics.precision},
                                         {"recall", ev.metrics.recall},
                                         {"f1", ev.metrics.f1},
                                         {"interaction_auc", ev.interaction_auc}});
  return ws.finish();
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"simulate", "ingest",     "extract",    "train",
                                                 "rank",     "retrain-topk", "evaluate", "cross-test",
                                                 "time-report", "predict-virality"};
  return names;
}

bool is_stochastic(const std::string& name) {
  return name == "simulate" || name == "rank" || name == "evaluate" || name == "predict-virality";
}

Manifest run_subcommand(const std::string& name, const PipelineConfig& cfg) {
  if (is_stochastic(name) && !cfg.seed_given) throw ConfigError(name + " needs rng_seed (config key or --seed)");
  if (name == "simulate") return run_simulate(cfg);
  if (name == "ingest") return run_ingest(cfg);
  if (name == "extract") return run_extract(cfg);
  if (name == "train") return run_train(cfg);
  if (name == "rank") return run_rank(cfg);
  if (name == "retrain-topk") return run_retrain_topk(cfg);
  if (name == "evaluate") return run_evaluate(cfg);
  if (name == "cross-test") return run_cross_test(cfg);
  if (name == "time-report") return run_time_report(cfg);
  if (name == "predict-virality") return run_predict_virality(cfg);
  throw ConfigError("unknown subcommand '" + name + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const LearnerError*>(&e)) return 3;
  return 2;
}

}  // namespace midmod
