#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tdac/consensus.hpp"

namespace tdac {

struct Behavior;

/// Runs the honest iteration; only its label says otherwise.
struct HonestDespiteLabel {
  friend bool operator==(const HonestDespiteLabel&, const HonestDespiteLabel&) = default;
};

/// Adds uniform(-amplitude, amplitude) to its own x every round. The offset
/// lands in the internal state, so later running sums stay self-consistent.
struct RandomOffset {
  double amplitude = 1.0;
  std::optional<std::uint64_t> seed;  // derived from the scenario seed when absent
  friend bool operator==(const RandomOffset&, const RandomOffset&) = default;
};

/// Reports sigma + delta (one-hop and two-hop alike) from start_round on.
struct SigmaForge {
  double delta = 0.0;
  std::int64_t start_round = 0;
  friend bool operator==(const SigmaForge&, const SigmaForge&) = default;
};

/// Honest one-hop running sums; two-hop answers are off by delta.
struct TwoHopMismatch {
  double delta = 0.0;
  std::int64_t start_round = 0;
  friend bool operator==(const TwoHopMismatch&, const TwoHopMismatch&) = default;
};

/// Drops an honest neighbor from its trust set and computes honestly under it.
struct UnfairDeclare {
  NodeId victim = 0;
  std::int64_t start_round = 0;
  friend bool operator==(const UnfairDeclare&, const UnfairDeclare&) = default;
};

struct DelayedMisbehavior {
  std::int64_t honest_until = 0;
  std::vector<Behavior> then;  // exactly one element

  const Behavior& inner() const { return then.front(); }
  friend bool operator==(const DelayedMisbehavior& a, const DelayedMisbehavior& b);
};

struct Behavior {
  std::variant<HonestDespiteLabel, RandomOffset, SigmaForge, TwoHopMismatch, UnfairDeclare, DelayedMisbehavior> kind;

  friend bool operator==(const Behavior& a, const Behavior& b) { return a.kind == b.kind; }
};

inline bool operator==(const DelayedMisbehavior& a, const DelayedMisbehavior& b) {
  return a.honest_until == b.honest_until && a.then == b.then;
}

Behavior delayed(std::int64_t honest_until, Behavior then);

std::string kind_name(const Behavior& b);

/// False once the behavior ever reports values an honest node would not.
/// Nodes for which this stays true keep their initial value in the average.
bool respects_update_rule(const Behavior& b, std::int64_t max_rounds);

/// Validates parameters against the node's neighborhood; throws std::invalid_argument.
void check_behavior(const Behavior& b, const NodeSet& own_nbrs);

// Piecewise transforms, applied by the engine in round order.
NodeSet declared_trust(const Behavior& b, const NodeSet& honest_trust, std::int64_t k);
double forge_running_sum(const Behavior& b, double sigma_next, std::int64_t k);
double perturb_value(const Behavior& b, double x_next, std::int64_t k, std::mt19937_64& rng);

struct TwoHopAnswer {
  double sigma_prev = 0.0;  // sigma-tilde[k]
  double sigma_now = 0.0;   // sigma-tilde[k+1]
};
/// Answer to a two-hop request, given what the node reported one-hop.
TwoHopAnswer answer_two_hop(const Behavior& b, double reported_prev, double reported_now, std::int64_t k);

struct Emission {
  Broadcast one_hop;
  TwoHopAnswer two_hop;
};

/// All output-side transforms composed on one honest emission.
/// `reported_sigma_prev` is the running sum the node broadcast last round.
/// Trust changes that must feed the node's own computation go through
/// declared_trust before the step; here they only touch the reported set.
Emission apply_behavior(const Behavior& b, const Broadcast& honest, double reported_sigma_prev, std::int64_t k,
                        std::mt19937_64& rng);

} // namespace tdac
