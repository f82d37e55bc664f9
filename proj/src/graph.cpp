#include "tdac/graph.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <stdexcept>

namespace tdac {

Graph::Graph(std::size_t node_count, const std::vector<Edge>& edges) {
  if (node_count < 2) {
    throw std::invalid_argument("graph needs at least 2 nodes, got " + std::to_string(node_count));
  }
  adjacency_.resize(node_count);
  for (NodeId j = 0; j < node_count; ++j) present_.insert(j);
  std::set<Edge> unique;
  for (auto [a, b] : edges) {
    if (a >= node_count || b >= node_count) {
      throw std::invalid_argument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") references a node id >= " + std::to_string(node_count));
    }
    if (a == b) throw std::invalid_argument("self-loop on node " + std::to_string(a));
    unique.insert({std::min(a, b), std::max(a, b)});
  }
  edges_.assign(unique.begin(), unique.end());
  for (auto [a, b] : edges_) {
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
  }
}

void Graph::check_id(NodeId j) const {
  if (j >= adjacency_.size() || !present_.count(j)) {
    throw std::out_of_range("node id " + std::to_string(j) + " not in graph");
  }
}

const NodeSet& Graph::neighbors(NodeId j) const {
  check_id(j);
  return adjacency_[j];
}

NodeSet Graph::two_hop_set(NodeId j) const {
  check_id(j);
  NodeSet out = adjacency_[j];
  for (NodeId i : adjacency_[j]) out.insert(adjacency_[i].begin(), adjacency_[i].end());
  out.erase(j);
  return out;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  return a < adjacency_.size() && adjacency_[a].count(b) != 0;
}

Graph Graph::induced_subgraph(const NodeSet& keep) const {
  for (NodeId j : keep) check_id(j);
  Graph g;
  g.adjacency_.resize(adjacency_.size());
  g.present_ = keep;
  for (auto [a, b] : edges_) {
    if (keep.count(a) && keep.count(b)) {
      g.edges_.push_back({a, b});
      g.adjacency_[a].insert(b);
      g.adjacency_[b].insert(a);
    }
  }
  return g;
}

bool Graph::is_connected() const {
  if (present_.empty()) return true;
  std::vector<bool> seen(adjacency_.size(), false);
  std::queue<NodeId> frontier;
  frontier.push(*present_.begin());
  seen[*present_.begin()] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == present_.size();
}

Graph build_graph(std::size_t node_count, const std::vector<Edge>& edges) {
  return Graph(node_count, edges);
}

std::string to_string(CheckingMode mode) {
  switch (mode) {
    case CheckingMode::oracle: return "oracle";
    case CheckingMode::concurrent: return "concurrent";
    case CheckingMode::infrequent: return "infrequent";
  }
  return "unknown";
}

std::string to_string(AssumptionViolation v) {
  switch (v) {
    case AssumptionViolation::trustworthy_subgraph_disconnected: return "trustworthy_subgraph_disconnected";
    case AssumptionViolation::adjacent_malicious_pair: return "adjacent_malicious_pair";
  }
  return "unknown";
}

ValidationReport validate_assumptions(const Graph& g, const NodeSet& malicious, CheckingMode mode) {
  ValidationReport report;
  for (NodeId m : malicious) {
    if (m >= g.node_count()) throw std::out_of_range("malicious id " + std::to_string(m) + " out of range");
  }
  NodeSet trusted = set_difference(g.nodes(), malicious);
  if (!g.induced_subgraph(trusted).is_connected()) {
    report.violations.push_back({AssumptionViolation::trustworthy_subgraph_disconnected,
                                 "subgraph induced by non-malicious nodes is not connected"});
  }
  if (trusted.empty()) {
    report.violations.push_back({AssumptionViolation::trustworthy_subgraph_disconnected,
                                 "no non-malicious nodes"});
  }
  if (mode != CheckingMode::oracle) {
    for (auto [a, b] : g.edges()) {
      if (malicious.count(a) && malicious.count(b)) {
        report.violations.push_back({AssumptionViolation::adjacent_malicious_pair,
                                     "malicious nodes " + std::to_string(a) + " and " + std::to_string(b) +
                                         " are neighbors"});
      }
    }
  }
  return report;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

bool is_subset(const NodeSet& a, const NodeSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool is_strict_subset(const NodeSet& a, const NodeSet& b) {
  return a.size() < b.size() && is_subset(a, b);
}

NodeSet all_nodes(std::size_t n) {
  NodeSet out;
  for (NodeId j = 0; j < n; ++j) out.insert(out.end(), j);
  return out;
}

Graph random_connected_graph(std::size_t n, double extra_edge_probability, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeId> order(n);
  for (NodeId j = 0; j < n; ++j) order[j] = j;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Edge> edges;
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    edges.push_back({order[k], order[pick(rng)]});
  }
  std::bernoulli_distribution extra(extra_edge_probability);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (extra(rng)) edges.push_back({a, b});
    }
  }
  return Graph(n, edges);
}

} // namespace tdac
