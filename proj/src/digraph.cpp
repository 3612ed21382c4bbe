#include "digraph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include "errors.hpp"

namespace qwbc {

Digraph::Digraph(NodeId n_nodes, std::vector<Edge> edges) : n_(n_nodes), edges_(std::move(edges)) {
  if (n_ < 1) throw InvalidParameter("digraph needs at least one node");
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.src != b.src ? a.src < b.src : a.dst < b.dst; });
  out_nbr_.assign(static_cast<std::size_t>(n_), {});
  in_nbr_.assign(static_cast<std::size_t>(n_), {});
  out_eid_.assign(static_cast<std::size_t>(n_), {});
  in_eid_.assign(static_cast<std::size_t>(n_), {});
  for (EdgeId e = 0; e < edge_count(); ++e) {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    if (ed.src < 0 || ed.src >= n_ || ed.dst < 0 || ed.dst >= n_)
      throw InvalidParameter("edge endpoint out of range");
    if (ed.src == ed.dst) throw InvalidParameter("self-loops are not allowed");
    if (e > 0 && edges_[static_cast<std::size_t>(e - 1)] == ed)
      throw InvalidParameter("duplicate edge");
    out_nbr_[static_cast<std::size_t>(ed.src)].push_back(ed.dst);
    out_eid_[static_cast<std::size_t>(ed.src)].push_back(e);
    in_nbr_[static_cast<std::size_t>(ed.dst)].push_back(ed.src);
    in_eid_[static_cast<std::size_t>(ed.dst)].push_back(e);
  }
  // in_* lists come out ordered by src because edges_ is sorted by (src, dst).
}

Digraph Digraph::ring_plus_random(NodeId n, double p, CounterStream& rng) {
  if (n < 2) throw InvalidParameter("ring_plus_random requires at least 2 nodes");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("edge probability must lie in [0, 1]");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * 2);
  for (NodeId i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      if (j == (i + 1) % n) continue;  // ring edge already present
      const double u = rng.next_u01();
      if (u < p) edges.push_back({i, j});
    }
  }
  return Digraph(n, std::move(edges));
}

namespace {

// Nodes reachable from `start` following edges in the direction given by `nbr`.
int reach_count(const Digraph& g, NodeId start, bool forward) {
  std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
  std::queue<NodeId> q;
  seen[static_cast<std::size_t>(start)] = 1;
  q.push(start);
  int count = 1;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    auto nbrs = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (NodeId v : nbrs) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count;
}

}  // namespace

bool Digraph::strongly_connected() const {
  if (n_ == 1) return true;
  return reach_count(*this, 0, true) == n_ && reach_count(*this, 0, false) == n_;
}

std::vector<std::int32_t> Digraph::distances_to(std::span<const NodeId> targets) const {
  if (targets.empty()) throw InvalidParameter("distance query requires a nonempty target set");
  std::vector<std::int32_t> dist(static_cast<std::size_t>(n_), kInfiniteDistance);
  std::queue<NodeId> q;
  for (NodeId t : targets) {
    if (t < 0 || t >= n_) throw InvalidParameter("distance target out of range");
    if (dist[static_cast<std::size_t>(t)] != 0) {
      dist[static_cast<std::size_t>(t)] = 0;
      q.push(t);
    }
  }
  // BFS along reversed edges: d(j, targets) <= d(u, targets) + 1 for j -> u.
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId j : in_neighbors(u)) {
      if (dist[static_cast<std::size_t>(j)] == kInfiniteDistance) {
        dist[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(j);
      }
    }
  }
  return dist;
}

void Digraph::save(std::ostream& os) const {
  os << "n " << n_ << "\n";
  for (const Edge& e : edges_) os << e.src << " " << e.dst << "\n";
}

Digraph Digraph::load(std::istream& is) {
  std::string tag;
  NodeId n = 0;
  if (!(is >> tag >> n) || tag != "n") throw IoError("graph file: expected header line 'n <count>'");
  std::vector<Edge> edges;
  NodeId a, b;
  while (is >> a >> b) edges.push_back({a, b});
  if (!is.eof() && is.fail()) throw IoError("graph file: malformed edge line");
  return Digraph(n, std::move(edges));
}

void Digraph::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  save(os);
  if (!os) throw IoError("write failed: " + path);
}

Digraph Digraph::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open graph file: " + path);
  return load(is);
}

}  // namespace qwbc
