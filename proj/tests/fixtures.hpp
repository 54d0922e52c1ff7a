#pragma once

#include <functional>
#include <string>
#include <vector>

#include "midmod/common.hpp"
#include "midmod/dataset.hpp"

namespace fixture {

inline std::vector<std::string> column_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

// n rows of standard-normal features; the label comes from `label(x, rng)`.
inline midmod::Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                      const std::function<int(const std::vector<double>&, midmod::Rng&)>& label) {
  midmod::Rng rng(seed);
  midmod::Dataset data(column_names(d));
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.normal();
    data.add_row({i, i + 1, 0}, x, label(x, rng));
  }
  return data;
}

// Logistic labels with the given weights on the first columns.
inline midmod::Dataset logistic_dataset(std::size_t n, std::size_t d, std::vector<double> w, double b,
                                        std::uint64_t seed) {
  return random_dataset(n, d, seed, [w, b](const std::vector<double>& x, midmod::Rng& rng) {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
    return rng.bernoulli(midmod::logistic(z)) ? 1 : 0;
  });
}

}  // namespace fixture
