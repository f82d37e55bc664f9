#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tdac/consensus.hpp"

namespace tdac {

// ---------------------------------------------------------------------------
// Oracle trust schedules
// ---------------------------------------------------------------------------

struct CorrectFromStart {
  friend bool operator==(const CorrectFromStart&, const CorrectFromStart&) = default;
};

/// Independent fair coin per (k, j, i) before settle_round, truth afterwards.
struct RandomUntil {
  std::int64_t settle_round = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const RandomUntil&, const RandomUntil&) = default;
};

/// table[k][j] is T_j[k]; rounds past the end of the table yield the truth.
struct CustomTable {
  std::vector<std::map<NodeId, NodeSet>> table;
  friend bool operator==(const CustomTable&, const CustomTable&) = default;
};

using ScheduleMode = std::variant<CorrectFromStart, RandomUntil, CustomTable>;

struct TrustSchedule {
  ScheduleMode mode;
  NodeSet truth;
  std::size_t n_total = 0;
};

/// T_j[k] under the schedule. Always contains j. Throws std::out_of_range if
/// a custom table lacks the (k, j) entry and std::invalid_argument if the
/// entry omits j.
NodeSet oracle_trust(const TrustSchedule& schedule, std::int64_t k, NodeId j);

/// Deterministic 64-bit mix of the arguments (splitmix64 finalizer chain).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Uniform draw in [0, 1) from mix_seed.
double unit_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

// ---------------------------------------------------------------------------
// Parity checks
// ---------------------------------------------------------------------------

/// Everything an observer holds about subject i when checking iteration K.
/// One-hop values come from i's own broadcasts; two-hop values are the
/// sigma-tilde responses (identical to one-hop in concurrent mode).
struct CheckEvidence {
  NodeId subject = 0;
  NodeId observer = 0;
  NodeSet subject_nbrs;          // N_i
  double x0 = 0.0;               // x_i, known since initialization
  double x_prev = 0.0;           // x_i[K]
  double x_now = 0.0;            // x_i[K+1]
  double sigma_prev = 0.0;       // sigma_i[K], one-hop
  double sigma_now = 0.0;        // sigma_i[K+1], one-hop
  double two_hop_sigma_prev = 0.0;  // sigma-tilde_i[K]
  double two_hop_sigma_now = 0.0;   // sigma-tilde_i[K+1]
  NodeSet trust_prev;            // T_i[K-1]
  NodeSet trust_now;             // T_i[K]
  SigmaMap nbr_sigma_prev;       // sigma-tilde_l[K], l in N_i
  SigmaMap nbr_sigma_now;        // sigma-tilde_l[K+1], l in N_i
};

struct ParityChecks {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double s = 0.0;
  bool has_r_s = false;  // infrequent checks only
  double tolerance = kZeroTolerance;

  bool self_inconsistent() const;  // q or s beyond tolerance
  bool third_party_mismatch() const;  // p or r beyond tolerance
};

/// x-hat_i[K+1], reconstructed with the same routines the subject runs.
double predict_value(const CheckEvidence& ev, std::size_t n_total);

ParityChecks concurrent_check(const CheckEvidence& ev, std::size_t n_total, double eps = kZeroTolerance);
ParityChecks infrequent_check(const CheckEvidence& ev, std::size_t n_total, double eps = kZeroTolerance);

/// The s-check on its own: one-hop vs two-hop running sums of one node.
double two_hop_consistency(double one_hop_prev, double one_hop_now, double two_hop_prev, double two_hop_now);

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class VerdictStatus { trusted, possibly_untrustworthy, malicious };

enum class VerdictReason {
  none,
  p_fail,
  q_fail,
  r_fail,
  s_fail,
  no_shrink_after_suspect,
  unfairly_declared_me,
  trust_set_grew,
};

std::string to_string(VerdictStatus s);
std::string to_string(VerdictReason r);

struct Verdict {
  VerdictStatus status = VerdictStatus::trusted;
  VerdictReason reason = VerdictReason::none;
  /// Rounds in which a strict shrink of the subject's trust set was used to
  /// explain a third-party mismatch. Bounded by the subject's degree.
  std::size_t shrinks_credited = 0;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct ClassifyContext {
  CheckingMode mode = CheckingMode::concurrent;
  NodeId observer = 0;
  std::size_t subject_degree = 0;
  bool enforce_monotone = false;  // growth rule in concurrent mode
};

/// One observer's updated view of one subject after a round. `checks` is
/// empty on rounds without a parity check; trust-set rules still apply.
Verdict classify(const Verdict& prior, const std::optional<ParityChecks>& checks, const NodeSet& trust_now,
                 const NodeSet& trust_prev, const ClassifyContext& ctx);

} // namespace tdac
