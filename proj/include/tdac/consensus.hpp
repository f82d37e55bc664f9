#pragma once

#include <map>

#include "tdac/graph.hpp"

namespace tdac {

/// Shared tolerance for every quantity that is exactly zero in real
/// arithmetic. Scaled by max(1, magnitude) at each use.
inline constexpr double kZeroTolerance = 1e-9;

using SigmaMap = std::map<NodeId, double>;

/// Full per-node state of the running-sum averaging iteration.
struct NodeState {
  NodeId id = 0;
  double x0 = 0.0;
  double x = 0.0;
  double sigma = 0.0;
  double prev_sigma = 0.0;
  SigmaMap mu;          // one entry per neighbor
  NodeSet prev_trust;   // trust set used in the previous round
  std::size_t n_total = 0;
  NodeSet nbrs;
};

/// Trust bookkeeping for one round, relative to the node's neighborhood.
struct TrustDelta {
  NodeSet active_nbrs;
  std::size_t degree = 0;
  NodeSet dropped;
  NodeSet added;
};

/// One-hop payload emitted at the end of a round.
struct Broadcast {
  NodeId sender = 0;
  double sigma_next = 0.0;
  double x_next = 0.0;
  NodeSet trust_set;
};

NodeState init_node(NodeId id, double x0, const NodeSet& nbrs, std::size_t n_total);

/// Throws std::invalid_argument if trust_now does not contain the node itself.
TrustDelta update_trust_sets(const NodeState& state, const NodeSet& trust_now);

/// sigma[k+1] = sigma[k] + x[k]. Does not modify the state.
double advance_running_sum(const NodeState& state);

/// Accepted running sums for this round: received value for trusted
/// neighbors, 0 for the rest. Throws if a neighbor has no received entry.
SigmaMap update_mu(const NodeState& state, const TrustDelta& delta, const SigmaMap& received);

/// (|dropped| - |added|) * sigma / N, where sigma must be sigma[k].
double correction_term(const NodeState& state, const TrustDelta& delta);
double correction_term(double sigma_k, const TrustDelta& delta, std::size_t n_total);

double step_value(const NodeState& state, const TrustDelta& delta, const SigmaMap& mu_next, double e);

/// Invariant residual
///   (x[k] - x0) + D[k-1]/N * sigma[k] - 1/N * sum_{i in N[k-1]} sigma_i[k],
/// zero for an honest node. nbr_sigmas must cover delta_prev.active_nbrs.
double invariant_residual(const NodeState& state, const TrustDelta& delta_prev, const SigmaMap& nbr_sigmas);

/// Tolerance used for residual comparisons: kZeroTolerance * max(1, |m|...).
double scaled_tolerance(std::initializer_list<double> magnitudes);

/// Convenience driver for one full honest iteration: trust update, correction,
/// running-sum step, mu update and value step, in that order. `received` holds
/// the neighbors' sigma[k+1]. Returns the delta used.
struct StepResult {
  TrustDelta delta;
  double e = 0.0;
};
StepResult advance_node(NodeState& state, const NodeSet& trust_now, const SigmaMap& received);

} // namespace tdac
