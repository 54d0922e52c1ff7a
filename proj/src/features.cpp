#include "midmod/features.hpp"

namespace midmod {

const std::vector<std::string>& edge_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (auto f : kUserFeatureNames) n.push_back("src_" + std::string(f));
    for (auto f : kUserFeatureNames) n.push_back("dst_" + std::string(f));
    n.emplace_back("social_homogeneity");
    return n;
  }();
  return names;
}

std::optional<std::size_t> edge_feature_index(std::string_view name) {
  const auto& names = edge_feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

bool is_temporal_column(std::size_t col) {
  if (col == kSocialHomogeneityColumn) return false;
  return is_temporal_feature(col % kUserFeatureCount);
}

Dataset to_dataset(std::span<const EdgeSample> samples) {
  Dataset d(edge_feature_names());
  for (const auto& s : samples) {
    d.add_row(RowKey{s.source, s.destination, s.bin.index}, s.x, s.label);
  }
  return d;
}

UserFeatureVector extract_user(NodeId user, NodeId partner, TimeBin bin,
                                      const EventLog& log, const UserProfile* profile,
                                      const SocialGraph& graph, const Topic& topic,
                                      const Lexicon* lexicon) {
  const FeatureContext ctx(log, topic, lexicon);
  return ctx.user_features(user, partner, bin, profile, &graph);
}

int label_edge(NodeId v, NodeId u, const EventLog& log, const Topic& topic) {
  for (std::size_t idx : log.by_user(u)) {
    const auto& r = log.records()[idx];
    if (!is_forward(r.kind) || r.ref_author != v || !r.ref_event) continue;
    const EventRecord* ref = log.find(*r.ref_event);
    if (ref && is_relevant(*ref, topic)) return 1;
  }
  return 0;
}

EdgeSample make_edge_sample(const FeatureContext& ctx, const SocialGraph& graph,
                                   NodeId v, NodeId u, TimeBin bin,
                                   const UserProfile* pv, const UserProfile* pu) {
  EdgeSample s;
  s.source = v;
  s.destination = u;
  s.bin = bin;
  const auto src = ctx.user_features(v, u, bin, pv, &graph);
  const auto dst = ctx.user_features(u, v, bin, pu, &graph);
  std::copy(src.values.begin(), src.values.end(), s.x.begin());
  std::copy(dst.values.begin(), dst.values.end(), s.x.begin() + kUserFeatureCount);
  s.x[kSocialHomogeneityColumn] = graph.social_homogeneity(v, u);
  s.label = ctx.label(v, u);
  return s;
}

DatasetBuild build_dataset(const SocialGraph& graph, const FeatureContext& ctx,
                                  const ProfileMap& profiles, TimeBin bin) {
  DatasetBuild out;
  out.samples.reserve(graph.edge_count());
  for (const auto& [v, u] : graph.edges()) {
    const auto pv = profiles.find(v);
    const auto pu = profiles.find(u);
    if (pv == profiles.end() || pu == profiles.end()) {
      ++out.skipped_missing_profile;
      continue;
    }
    out.samples.push_back(make_edge_sample(ctx, graph, v, u, bin, &pv->second, &pu->second));
  }
  return out;
}

DatasetBuild build_dataset(const SocialGraph& graph, const EventLog& log,
                                  const ProfileMap& profiles, const Topic& topic, TimeBin bin,
                                  const Lexicon* lexicon) {
  const FeatureContext ctx(log, topic, lexicon);
  return build_dataset(graph, ctx, profiles, bin);
}

std::array<DatasetBuild, kBinCount> build_all_bins(const SocialGraph& graph,
                                                          const EventLog& log,
                                                          const ProfileMap& profiles,
                                                          const Topic& topic,
                                                          const Lexicon* lexicon) {
  const FeatureContext ctx(log, topic, lexicon);
  std::array<DatasetBuild, kBinCount> out;
  for (std::size_t b = 0; b < kBinCount; ++b) {
    out[b] = build_dataset(graph, ctx, profiles, TimeBin{static_cast<int>(b)});
  }
  return out;
}

}  // namespace midmod
