#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "tdac/adversary.hpp"
#include "tdac/consensus.hpp"
#include "tdac/graph.hpp"
#include "tdac/trust.hpp"

namespace tdac {

/// Scenario-level random schedule; the seed defaults to one derived from the
/// scenario seed.
struct RandomUntilSpec {
  std::int64_t settle_round = 0;
  std::optional<std::uint64_t> seed;
  friend bool operator==(const RandomUntilSpec&, const RandomUntilSpec&) = default;
};

struct OracleMode {
  std::variant<CorrectFromStart, RandomUntilSpec, CustomTable> schedule;
  friend bool operator==(const OracleMode&, const OracleMode&) = default;
};

struct ConcurrentMode {
  bool enforce_monotone = false;
  friend bool operator==(const ConcurrentMode&, const ConcurrentMode&) = default;
};

struct InfrequentMode {
  double check_probability = 0.1;
  std::optional<std::uint64_t> seed;
  friend bool operator==(const InfrequentMode&, const InfrequentMode&) = default;
};

using TrustMode = std::variant<OracleMode, ConcurrentMode, InfrequentMode>;

CheckingMode checking_mode(const TrustMode& m);

inline constexpr std::int64_t kDefaultMaxRounds = 2000;
inline constexpr double kDefaultConvergenceTol = 1e-6;

struct Scenario {
  Graph graph;
  std::vector<double> initial_values;
  std::map<NodeId, Behavior> malicious;
  TrustMode trust_mode = OracleMode{};
  std::int64_t max_rounds = kDefaultMaxRounds;
  double convergence_tol = kDefaultConvergenceTol;
  std::uint64_t seed = 0;

  NodeSet malicious_ids() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Structural checks (lengths, ids, behavior parameters). Throws std::invalid_argument.
void check_scenario(const Scenario& s);

/// Label-based: mean initial value over nodes not labelled malicious.
double label_average(const Scenario& s);
/// Behavior-based: additionally counts labelled nodes that never break the update rule.
double behavior_average(const Scenario& s);
/// The target the honest nodes should reach: label-based in oracle mode,
/// behavior-based in the checking modes. Throws if no node qualifies.
double trustworthy_average(const Scenario& s);

struct VerdictEvent {
  std::int64_t round = 0;  // iteration at whose end the verdict was set
  NodeId observer = 0;
  NodeId subject = 0;
  VerdictStatus status = VerdictStatus::trusted;
  VerdictReason reason = VerdictReason::none;
  friend bool operator==(const VerdictEvent&, const VerdictEvent&) = default;
};

/// State of one node at the start of `round`: x[k], sigma[k], the trust set
/// that produced them (T[k-1]; all nodes at k = 0) and the verdicts this node
/// set at the end of iteration k-1.
struct RoundRecord {
  std::int64_t round = 0;
  NodeId node = 0;
  double x = 0.0;
  double sigma = 0.0;
  NodeSet trust_set;
  std::vector<VerdictEvent> verdicts;
  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct TraceSummary {
  double label_target = 0.0;
  double behavior_target = 0.0;
  double target = 0.0;
  std::optional<std::int64_t> rounds_to_tolerance;
  double max_error_final = 0.0;
  std::vector<double> final_values;
  /// adversary -> observer -> iteration of the malicious verdict
  std::map<NodeId, std::map<NodeId, std::int64_t>> detection_rounds;
  std::vector<ViolationEntry> violations;
  std::size_t monotone_warnings = 0;
};

struct Trace {
  std::size_t node_count = 0;
  NodeSet honest;  // nodes not labelled malicious
  std::int64_t rounds = 0;
  std::vector<RoundRecord> records;  // round-major, node-minor
  std::vector<VerdictEvent> events;
  TraceSummary summary;

  const RoundRecord& at(std::int64_t round, NodeId node) const {
    return records[static_cast<std::size_t>(round) * node_count + node];
  }
};

struct ConvergenceMetrics {
  bool converged = false;
  std::optional<std::int64_t> round;
  double max_error_final = 0.0;
};

/// Honest nodes only. `round` is the first round from which every honest
/// value stays within tol of target through the end of the trace.
ConvergenceMetrics convergence_metrics(const Trace& t, double target, double tol);

/// The synchronous round loop. Owns every node's state, the adversary
/// streams and the per-observer verdict tables.
class Simulation {
public:
  explicit Simulation(Scenario scenario);

  /// Advances one iteration and appends one record per node.
  void run_round();
  void run(std::int64_t rounds);

  std::int64_t round() const { return round_; }
  const Scenario& scenario() const { return scenario_; }
  const NodeState& node(NodeId j) const { return nodes_.at(j); }
  const TrustDelta& last_delta(NodeId j) const { return last_delta_.at(j); }
  bool is_adversary(NodeId j) const { return behaviors_.at(j).has_value(); }
  Verdict verdict(NodeId observer, NodeId subject) const;
  /// Trust set node j used in the last completed round.
  const NodeSet& trust_in_force(NodeId j) const { return published_.at(j).trust; }

  /// Summarizes and returns the trace; the simulation may keep running after.
  Trace trace() const;

private:
  struct Published {
    double x = 0.0;
    double sigma = 0.0;  // as reported one-hop
    NodeSet trust;
    TwoHopAnswer two_hop;
  };

  NodeSet trust_input(NodeId j, std::int64_t k) const;
  CheckEvidence evidence(NodeId observer, NodeId subject, const std::vector<Published>& now, bool two_hop) const;
  void run_checks(std::int64_t k, const std::vector<Published>& now);
  void record_round();

  Scenario scenario_;
  CheckingMode mode_;
  std::optional<TrustSchedule> schedule_;
  std::uint64_t check_seed_ = 0;
  std::size_t n_ = 0;
  std::int64_t round_ = 0;

  std::vector<NodeState> nodes_;
  std::vector<std::optional<Behavior>> behaviors_;
  std::vector<std::mt19937_64> adversary_rng_;
  std::vector<TrustDelta> last_delta_;
  std::vector<Published> published_;  // last round's broadcasts
  std::vector<std::map<NodeId, Verdict>> verdicts_;
  std::vector<std::vector<VerdictEvent>> pending_events_;

  std::vector<RoundRecord> records_;
  std::vector<VerdictEvent> events_;
  std::size_t monotone_warnings_ = 0;
};

Trace run_scenario(const Scenario& s);

} // namespace tdac
