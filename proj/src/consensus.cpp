#include "tdac/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace tdac {

NodeState init_node(NodeId id, double x0, const NodeSet& nbrs, std::size_t n_total) {
  if (nbrs.count(id)) throw std::invalid_argument("node " + std::to_string(id) + " listed as its own neighbor");
  if (n_total < nbrs.size() + 1) throw std::invalid_argument("n_total smaller than neighborhood");
  NodeState s;
  s.id = id;
  s.x0 = x0;
  s.x = x0;
  s.n_total = n_total;
  s.nbrs = nbrs;
  for (NodeId i : nbrs) s.mu[i] = 0.0;
  s.prev_trust = all_nodes(n_total);
  return s;
}

TrustDelta update_trust_sets(const NodeState& state, const NodeSet& trust_now) {
  if (!trust_now.count(state.id)) {
    throw std::invalid_argument("trust set of node " + std::to_string(state.id) + " must contain itself");
  }
  TrustDelta d;
  d.active_nbrs = set_intersection(state.nbrs, trust_now);
  d.degree = d.active_nbrs.size();
  d.dropped = set_intersection(state.nbrs, set_difference(state.prev_trust, trust_now));
  d.added = set_intersection(state.nbrs, set_difference(trust_now, state.prev_trust));
  return d;
}

double advance_running_sum(const NodeState& state) { return state.sigma + state.x; }

SigmaMap update_mu(const NodeState& state, const TrustDelta& delta, const SigmaMap& received) {
  SigmaMap next;
  for (NodeId i : state.nbrs) {
    auto it = received.find(i);
    if (it == received.end()) {
      throw std::invalid_argument("no running sum received from neighbor " + std::to_string(i));
    }
    next[i] = delta.active_nbrs.count(i) ? it->second : 0.0;
  }
  return next;
}

double correction_term(double sigma_k, const TrustDelta& delta, std::size_t n_total) {
  const double diff = static_cast<double>(delta.dropped.size()) - static_cast<double>(delta.added.size());
  return diff * sigma_k / static_cast<double>(n_total);
}

double correction_term(const NodeState& state, const TrustDelta& delta) {
  return correction_term(state.sigma, delta, state.n_total);
}

double step_value(const NodeState& state, const TrustDelta& delta, const SigmaMap& mu_next, double e) {
  const double n = static_cast<double>(state.n_total);
  double mu_change = 0.0;
  for (NodeId i : state.nbrs) mu_change += mu_next.at(i) - state.mu.at(i);
  return (1.0 - static_cast<double>(delta.degree) / n) * state.x + mu_change / n + e;
}

double invariant_residual(const NodeState& state, const TrustDelta& delta_prev, const SigmaMap& nbr_sigmas) {
  const double n = static_cast<double>(state.n_total);
  double incoming = 0.0;
  for (NodeId i : delta_prev.active_nbrs) {
    auto it = nbr_sigmas.find(i);
    if (it == nbr_sigmas.end()) throw std::invalid_argument("missing sigma for neighbor " + std::to_string(i));
    incoming += it->second;
  }
  return (state.x - state.x0) + static_cast<double>(delta_prev.degree) / n * state.sigma - incoming / n;
}

double scaled_tolerance(std::initializer_list<double> magnitudes) {
  double scale = 1.0;
  for (double m : magnitudes) scale = std::max(scale, std::abs(m));
  return kZeroTolerance * scale;
}

StepResult advance_node(NodeState& state, const NodeSet& trust_now, const SigmaMap& received) {
  StepResult r;
  r.delta = update_trust_sets(state, trust_now);
  r.e = correction_term(state, r.delta);
  const double sigma_next = advance_running_sum(state);
  SigmaMap mu_next = update_mu(state, r.delta, received);
  const double x_next = step_value(state, r.delta, mu_next, r.e);
  state.prev_sigma = state.sigma;
  state.sigma = sigma_next;
  state.x = x_next;
  state.mu = std::move(mu_next);
  state.prev_trust = trust_now;
  return r;
}

} // namespace tdac
