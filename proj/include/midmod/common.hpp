#pragma once

// Shared vocabulary types, error categories and seeded randomness.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace midmod {

using NodeId = std::uint64_t;
using EventId = std::int64_t;
using Timestamp = std::int64_t;  // seconds since epoch, UTC

inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerBin = 21600;

// Error categories map one-to-one onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad invocation or configuration (exit 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a format or invariant (exit 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class SelfLinkError : public DataError {
 public:
  explicit SelfLinkError(NodeId v)
      : DataError("self-link rejected for node " + std::to_string(v)) {}
};

// A model could not be fitted or applied (exit 3).
class LearnerError : public Error {
 public:
  using Error::Error;
};

// Collects every configuration problem so they can be reported together.
class ConfigIssues {
 public:
  void add(std::string message) { items_.push_back(std::move(message)); }
  bool empty() const { return items_.empty(); }
  const std::vector<std::string>& items() const { return items_; }

  void raise() const {
    if (items_.empty()) return;
    std::string all;
    for (const auto& m : items_) all += (all.empty() ? "" : "; ") + m;
    throw ConfigError(all);
  }

 private:
  std::vector<std::string> items_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ splitmix64(value));
}

// Per-stage seed: FNV-1a of the stage name mixed into the root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return hash_combine(root, h);
}

// Uniform in the open interval (0, 1) from 53 random bits.
inline double unit_from_bits(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return unit_from_bits(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  bool bernoulli(double p) { return uniform() < p; }
  double normal() { return std::normal_distribution<double>{}(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential(double mean) { return -mean * std::log(uniform()); }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>{mean}(engine_);
  }

  std::uint64_t next() { return engine_(); }

  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      std::swap(c[i - 1], c[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

}  // namespace midmod
