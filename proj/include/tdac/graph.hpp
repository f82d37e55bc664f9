#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tdac {

using NodeId = std::size_t;
using NodeSet = std::set<NodeId>;
using Edge = std::pair<NodeId, NodeId>;

/// Fixed bidirectional communication topology over dense ids 0..N-1.
class Graph {
public:
  /// Empty placeholder; holds no nodes.
  Graph() = default;

  /// Builds a graph from an edge list; duplicate and reversed pairs collapse.
  /// Throws std::invalid_argument on self-loops, out-of-range ids or
  /// node_count < 2.
  Graph(std::size_t node_count, const std::vector<Edge>& edges);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Unordered edges, each stored as (min, max), sorted.
  const std::vector<Edge>& edges() const { return edges_; }

  const NodeSet& neighbors(NodeId j) const;
  NodeSet two_hop_set(NodeId j) const;
  bool has_edge(NodeId a, NodeId b) const;
  bool contains(NodeId j) const { return present_.count(j) != 0; }

  /// Ids actually present in this graph (all of 0..N-1 unless induced).
  const NodeSet& nodes() const { return present_; }

  Graph induced_subgraph(const NodeSet& keep) const;

  /// Every present node reachable from the smallest present id.
  bool is_connected() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.present_ == b.present_ && a.edges_ == b.edges_ &&
           a.adjacency_.size() == b.adjacency_.size();
  }

private:
  void check_id(NodeId j) const;

  std::vector<NodeSet> adjacency_;
  std::vector<Edge> edges_;
  NodeSet present_;
};

Graph build_graph(std::size_t node_count, const std::vector<Edge>& edges);

enum class CheckingMode { oracle, concurrent, infrequent };

std::string to_string(CheckingMode mode);

enum class AssumptionViolation { trustworthy_subgraph_disconnected, adjacent_malicious_pair };

struct ViolationEntry {
  AssumptionViolation kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<ViolationEntry> violations;
  bool ok() const { return violations.empty(); }
};

/// Connectivity of the non-malicious subgraph in every mode; additionally
/// no adjacent malicious pair in the two checking modes.
ValidationReport validate_assumptions(const Graph& g, const NodeSet& malicious, CheckingMode mode);

std::string to_string(AssumptionViolation v);

// Small set helpers used across the protocol code.
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_intersection(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool is_subset(const NodeSet& a, const NodeSet& b);
bool is_strict_subset(const NodeSet& a, const NodeSet& b);
NodeSet all_nodes(std::size_t n);

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability extra_edge_probability.
Graph random_connected_graph(std::size_t n, double extra_edge_probability, std::uint64_t seed);

} // namespace tdac
