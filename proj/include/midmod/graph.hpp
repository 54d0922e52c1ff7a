#pragma once

// Directed followership graph. An edge (v, u) means u follows v, so
// information posted by v can reach u.

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "midmod/common.hpp"

namespace midmod {

using Edge = std::pair<NodeId, NodeId>;

struct EdgeHash {
  std::size_t operator()(const Edge& e) const noexcept {
    return static_cast<std::size_t>(hash_combine(e.first, e.second));
  }
};

class SocialGraph {
 public:
  void add_node(NodeId v) { slot(v); }

  // Idempotent. Throws SelfLinkError when v == u.
  void add_edge(NodeId v, NodeId u) {
    if (v == u) throw SelfLinkError(v);
    const std::size_t sv = slot(v);
    const std::size_t su = slot(u);
    if (insert_sorted(followers_[sv], u)) {
      insert_sorted(friends_[su], v);
      ++edge_count_;
    }
  }

  bool contains(NodeId v) const { return index_.count(v) != 0; }

  bool has_edge(NodeId v, NodeId u) const {
    const auto f = followers(v);
    return std::binary_search(f.begin(), f.end(), u);
  }

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  // U = { u : (v, u) in E }, ascending. Empty for unknown nodes.
  std::span<const NodeId> followers(NodeId v) const {
    const auto it = index_.find(v);
    if (it == index_.end()) return {};
    return followers_[it->second];
  }

  // W = { w : (w, v) in E }, ascending. Empty for unknown nodes.
  std::span<const NodeId> friends(NodeId v) const {
    const auto it = index_.find(v);
    if (it == index_.end()) return {};
    return friends_[it->second];
  }

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out = ids_;
    std::sort(out.begin(), out.end());
    return out;
  }

  // All edges sorted by (source, destination).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId v : nodes()) {
      for (NodeId u : followers(v)) out.emplace_back(v, u);
    }
    return out;
  }

  // Jaccard overlap of the two users' combined friend and follower sets,
  // with a and b themselves removed. Zero when both neighborhoods are empty.
  double social_homogeneity(NodeId a, NodeId b) const {
    const auto na = neighborhood(a, a, b);
    const auto nb = neighborhood(b, a, b);
    if (na.empty() && nb.empty()) return 0.0;
    std::size_t common = 0;
    auto i = na.begin();
    auto j = nb.begin();
    while (i != na.end() && j != nb.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
    const std::size_t uni = na.size() + nb.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
  }

 private:
  std::size_t slot(NodeId v) {
    const auto [it, inserted] = index_.try_emplace(v, ids_.size());
    if (inserted) {
      ids_.push_back(v);
      followers_.emplace_back();
      friends_.emplace_back();
    }
    return it->second;
  }

  static bool insert_sorted(std::vector<NodeId>& list, NodeId x) {
    const auto it = std::lower_bound(list.begin(), list.end(), x);
    if (it != list.end() && *it == x) return false;
    list.insert(it, x);
    return true;
  }

  std::vector<NodeId> neighborhood(NodeId x, NodeId a, NodeId b) const {
    const auto fr = friends(x);
    const auto fo = followers(x);
    std::vector<NodeId> out;
    out.reserve(fr.size() + fo.size());
    std::set_union(fr.begin(), fr.end(), fo.begin(), fo.end(),
                   std::back_inserter(out));
    std::erase_if(out, [&](NodeId n) { return n == a || n == b; });
    return out;
  }

  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<NodeId> ids_;
  std::vector<std::vector<NodeId>> followers_;
  std::vector<std::vector<NodeId>> friends_;
  std::size_t edge_count_ = 0;
};

// Edge-list text: one "v u" pair per line (u follows v), '#' comments.
inline SocialGraph read_edge_list(std::istream& in) {
  SocialGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long v = -1;
    long long u = -1;
    std::string extra;
    if (!(fields >> v >> u) || v < 0 || u < 0 || (fields >> extra)) {
      throw DataError("edge list line " + std::to_string(line_no) +
                      ": expected two non-negative ids");
    }
    g.add_edge(static_cast<NodeId>(v), static_cast<NodeId>(u));
  }
  return g;
}

inline SocialGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read edge list: " + path);
  return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const SocialGraph& g) {
  out << "# v u  (u follows v)\n";
  for (const auto& [v, u] : g.edges()) out << v << ' ' << u << '\n';
}

}  // namespace midmod
