#include "midmod/forest.hpp"

namespace midmod {

std::size_t default_features_per_split(std::size_t d) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
}

ForestModel fit_forest(const Dataset& data, const ForestOptions& opt) {
  if (data.rows() < 2) throw LearnerError("need at least 2 samples");
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.rows()) throw LearnerError("training labels contain a single class");
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (!std::isfinite(data.at(i, j))) {
        throw LearnerError("non-finite value in column '" + data.columns()[j] + "'");
      }
    }
  }
  if (opt.n_trees < 1 || opt.max_depth < 0 || opt.min_leaf < 1 || opt.max_bins < 2 ||
      opt.max_bins > 65535) {
    throw ConfigError("invalid forest options");
  }
  const std::size_t d = data.cols();
  const std::size_t mtry = opt.features_per_split > 0
                               ? static_cast<std::size_t>(opt.features_per_split)
                               : default_features_per_split(d);

  ForestModel model;
  model.feature_names = data.columns();
  model.options = opt;
  const detail::BinnedFeatures bins(data, opt.max_bins);
  std::vector<double> total(d, 0.0);
  std::size_t trees_with_splits = 0;
  for (int t = 0; t < opt.n_trees; ++t) {
    std::vector<double> imp(d, 0.0);
    detail::TreeBuilder builder(bins, data.labels(), opt, mtry, imp);
    model.trees.push_back(builder.build(hash_combine(opt.seed, static_cast<std::uint64_t>(t))));
    model.split_count += builder.splits();
    double s = 0;
    for (double v : imp) s += v;
    if (s > 0) {
      ++trees_with_splits;
      for (std::size_t j = 0; j < d; ++j) total[j] += imp[j] / s;
    }
  }
  double s = 0;
  for (double v : total) s += v;
  model.importances.assign(d, 0.0);
  if (s > 0) {
    for (std::size_t j = 0; j < d; ++j) model.importances[j] = total[j] / s;
  }
  return model;
}

std::vector<RankedFeature> importance_ranking(const ForestModel& m) {
  std::vector<RankedFeature> out;
  for (std::size_t j = 0; j < m.importances.size(); ++j) {
    out.push_back({j, m.feature_names[j], m.importances[j]});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.index < b.index;
  });
  return out;
}

std::vector<std::size_t> select_top_k(std::span<const RankedFeature> ranking, std::size_t k) {
  if (k < 1 || k > ranking.size()) {
    throw ConfigError("k must be in [1, " + std::to_string(ranking.size()) + "], got " +
                      std::to_string(k));
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < k; ++i) idx.push_back(ranking[i].index);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double forest_auc(const ForestModel& m, const Dataset& data) {
  std::vector<double> scores(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) scores[i] = m.score(data.row(i));
  return auc_roc(data.labels(), scores);
}

std::vector<RankedFeature> pooled_ranking(std::span<const ForestModel> forests) {
  if (forests.empty()) return {};
  ForestModel pooled;
  pooled.feature_names = forests.front().feature_names;
  pooled.importances.assign(pooled.feature_names.size(), 0.0);
  for (const auto& f : forests) {
    if (f.feature_names != pooled.feature_names) throw DataError("forest schema mismatch");
    for (std::size_t j = 0; j < f.importances.size(); ++j) pooled.importances[j] += f.importances[j];
  }
  double s = 0;
  for (double v : pooled.importances) s += v;
  if (s > 0) {
    for (double& v : pooled.importances) v /= s;
  }
  return importance_ranking(pooled);
}

void write_ranking_csv(std::ostream& out, std::span<const RankedFeature> ranking) {
  out << "rank,feature_name,importance\n";
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out << (i + 1) << ',' << ranking[i].name << ',' << format_value(ranking[i].importance) << '\n';
  }
}

std::vector<RankedFeature> read_ranking_csv(std::istream& in,
                                                   std::span<const std::string> columns) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("rank,feature_name,importance", 0) != 0) {
    throw DataError("ranking file must start with 'rank,feature_name,importance'");
  }
  std::vector<RankedFeature> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 3) throw DataError("ranking row must have 3 cells");
    RankedFeature r;
    r.name = cells[1];
    const auto it = std::find(columns.begin(), columns.end(), r.name);
    if (it == columns.end()) throw DataError("ranking names unknown column '" + r.name + "'");
    r.index = static_cast<std::size_t>(it - columns.begin());
    r.importance = detail::parse_double(cells[2], out.size() + 2);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace midmod
