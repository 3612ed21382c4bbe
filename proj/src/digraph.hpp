#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rng.hpp"

namespace qwbc {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

struct Edge {
  NodeId src;
  NodeId dst;
  friend bool operator==(const Edge&, const Edge&) = default;
};

inline constexpr std::int32_t kInfiniteDistance = std::numeric_limits<std::int32_t>::max();

// Immutable directed graph. Edges carry direction: information on (src, dst)
// flows from src to dst only. No self-loops, no duplicate edges. Edge ids are
// assigned in (src, dst) lexicographic order so that identical edge sets get
// identical ids everywhere.
class Digraph {
public:
  Digraph(NodeId n_nodes, std::vector<Edge> edges);

  // A directed ring 0->1->...->n-1->0 plus, for each ordered non-ring pair
  // (i, j) taken in lexicographic order, an extra edge with probability p.
  // One stream draw is consumed per considered pair, so the result is a
  // deterministic function of (n, p, stream key).
  static Digraph ring_plus_random(NodeId n_nodes, double edge_prob, CounterStream& rng);

  NodeId node_count() const { return n_; }
  EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const NodeId> out_neighbors(NodeId i) const { return out_nbr_[static_cast<std::size_t>(i)]; }
  std::span<const NodeId> in_neighbors(NodeId i) const { return in_nbr_[static_cast<std::size_t>(i)]; }
  std::span<const EdgeId> out_edges(NodeId i) const { return out_eid_[static_cast<std::size_t>(i)]; }
  std::span<const EdgeId> in_edges(NodeId i) const { return in_eid_[static_cast<std::size_t>(i)]; }
  int out_degree(NodeId i) const { return static_cast<int>(out_nbr_[static_cast<std::size_t>(i)].size()); }
  int in_degree(NodeId i) const { return static_cast<int>(in_nbr_[static_cast<std::size_t>(i)].size()); }

  bool strongly_connected() const;

  // For every node i, the length of the shortest directed path from i into
  // `targets` (0 for targets themselves, kInfiniteDistance if unreachable).
  std::vector<std::int32_t> distances_to(std::span<const NodeId> targets) const;

  void save(std::ostream& os) const;
  static Digraph load(std::istream& is);
  void save_file(const std::string& path) const;
  static Digraph load_file(const std::string& path);

private:
  NodeId n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> out_nbr_, in_nbr_;
  std::vector<std::vector<EdgeId>> out_eid_, in_eid_;
};

}  // namespace qwbc
