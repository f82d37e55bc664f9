#include "tdac/trust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdac {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

double unit_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return static_cast<double>(mix_seed(seed, a, b, c) >> 11) * 0x1.0p-53;
}

NodeSet oracle_trust(const TrustSchedule& schedule, std::int64_t k, NodeId j) {
  if (k < 0) throw std::invalid_argument("round must be non-negative");
  NodeSet settled = schedule.truth;
  settled.insert(j);
  return std::visit(
      overloaded{
          [&](const CorrectFromStart&) { return settled; },
          [&](const RandomUntil& r) {
            if (k >= r.settle_round) return settled;
            NodeSet out{j};
            for (NodeId i = 0; i < schedule.n_total; ++i) {
              if (i != j && (mix_seed(r.seed, static_cast<std::uint64_t>(k), j, i) & 1U)) out.insert(i);
            }
            return out;
          },
          [&](const CustomTable& c) {
            if (static_cast<std::size_t>(k) >= c.table.size()) return settled;
            const auto& row = c.table[static_cast<std::size_t>(k)];
            auto it = row.find(j);
            if (it == row.end()) {
              throw std::out_of_range("custom trust table has no entry for round " + std::to_string(k) +
                                      ", node " + std::to_string(j));
            }
            if (!it->second.count(j)) {
              throw std::invalid_argument("custom trust entry for node " + std::to_string(j) + " omits itself");
            }
            return it->second;
          },
      },
      schedule.mode);
}

// ---------------------------------------------------------------------------

bool ParityChecks::self_inconsistent() const {
  return std::abs(q) > tolerance || (has_r_s && std::abs(s) > tolerance);
}

bool ParityChecks::third_party_mismatch() const {
  return std::abs(p) > tolerance || (has_r_s && std::abs(r) > tolerance);
}

namespace {

void require_cover(const SigmaMap& m, const NodeSet& nbrs, const char* what) {
  for (NodeId l : nbrs) {
    if (!m.count(l)) {
      throw std::invalid_argument(std::string("evidence lacks ") + what + " for node " + std::to_string(l));
    }
  }
}

// Rebuilds the subject's state at iteration K from the evidence.
NodeState reconstruct(const CheckEvidence& ev, std::size_t n_total) {
  require_cover(ev.nbr_sigma_prev, ev.subject_nbrs, "previous two-hop running sum");
  require_cover(ev.nbr_sigma_now, ev.subject_nbrs, "current two-hop running sum");
  NodeState s;
  s.id = ev.subject;
  s.x0 = ev.x0;
  s.x = ev.x_prev;
  s.sigma = ev.sigma_prev;
  s.n_total = n_total;
  s.nbrs = ev.subject_nbrs;
  s.prev_trust = ev.trust_prev;
  s.prev_trust.insert(ev.subject);
  for (NodeId l : ev.subject_nbrs) s.mu[l] = ev.trust_prev.count(l) ? ev.nbr_sigma_prev.at(l) : 0.0;
  return s;
}

NodeSet reported_trust(const CheckEvidence& ev) {
  NodeSet t = ev.trust_now;
  t.insert(ev.subject);
  return t;
}

double evidence_scale(const CheckEvidence& ev) {
  double scale = std::max({1.0, std::abs(ev.x_prev), std::abs(ev.x_now), std::abs(ev.sigma_prev),
                           std::abs(ev.sigma_now), std::abs(ev.x0)});
  for (auto& [l, v] : ev.nbr_sigma_now) scale = std::max(scale, std::abs(v));
  for (auto& [l, v] : ev.nbr_sigma_prev) scale = std::max(scale, std::abs(v));
  return scale;
}

} // namespace

double predict_value(const CheckEvidence& ev, std::size_t n_total) {
  NodeState s = reconstruct(ev, n_total);
  TrustDelta delta = update_trust_sets(s, reported_trust(ev));
  const double e = correction_term(s, delta);
  SigmaMap mu_next = update_mu(s, delta, ev.nbr_sigma_now);
  return step_value(s, delta, mu_next, e);
}

ParityChecks concurrent_check(const CheckEvidence& ev, std::size_t n_total, double eps) {
  ParityChecks c;
  c.p = ev.x_now - predict_value(ev, n_total);
  c.q = ev.sigma_now - (ev.sigma_prev + ev.x_prev);
  c.tolerance = eps * evidence_scale(ev);
  return c;
}

double two_hop_consistency(double one_hop_prev, double one_hop_now, double two_hop_prev, double two_hop_now) {
  return std::abs(two_hop_prev - one_hop_prev) + std::abs(two_hop_now - one_hop_now);
}

ParityChecks infrequent_check(const CheckEvidence& ev, std::size_t n_total, double eps) {
  ParityChecks c = concurrent_check(ev, n_total, eps);
  c.has_r_s = true;
  const double n = static_cast<double>(n_total);
  const NodeSet active = set_intersection(ev.subject_nbrs, reported_trust(ev));
  double incoming = 0.0;
  for (NodeId l : active) incoming += ev.nbr_sigma_now.at(l);
  c.r = ev.x_now - ev.x0 + static_cast<double>(active.size()) / n * ev.sigma_now - incoming / n;
  c.s = two_hop_consistency(ev.sigma_prev, ev.sigma_now, ev.two_hop_sigma_prev, ev.two_hop_sigma_now);
  c.tolerance = eps * std::max({evidence_scale(ev), std::abs(ev.two_hop_sigma_prev), std::abs(ev.two_hop_sigma_now)});
  return c;
}

// ---------------------------------------------------------------------------

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::trusted: return "trusted";
    case VerdictStatus::possibly_untrustworthy: return "possibly_untrustworthy";
    case VerdictStatus::malicious: return "malicious";
  }
  return "unknown";
}

std::string to_string(VerdictReason r) {
  switch (r) {
    case VerdictReason::none: return "none";
    case VerdictReason::p_fail: return "p_fail";
    case VerdictReason::q_fail: return "q_fail";
    case VerdictReason::r_fail: return "r_fail";
    case VerdictReason::s_fail: return "s_fail";
    case VerdictReason::no_shrink_after_suspect: return "no_shrink_after_suspect";
    case VerdictReason::unfairly_declared_me: return "unfairly_declared_me";
    case VerdictReason::trust_set_grew: return "trust_set_grew";
  }
  return "unknown";
}

Verdict classify(const Verdict& prior, const std::optional<ParityChecks>& checks, const NodeSet& trust_now,
                 const NodeSet& trust_prev, const ClassifyContext& ctx) {
  if (prior.status == VerdictStatus::malicious) return prior;

  Verdict v = prior;
  auto condemn = [&v](VerdictReason why) {
    v.status = VerdictStatus::malicious;
    v.reason = why;
    return v;
  };

  if (checks && std::abs(checks->q) > checks->tolerance) return condemn(VerdictReason::q_fail);
  if (checks && checks->has_r_s && std::abs(checks->s) > checks->tolerance) return condemn(VerdictReason::s_fail);

  if (trust_prev.count(ctx.observer) && !trust_now.count(ctx.observer)) {
    return condemn(VerdictReason::unfairly_declared_me);
  }

  const bool grew = !is_subset(trust_now, trust_prev);
  if (grew && (ctx.mode == CheckingMode::infrequent || ctx.enforce_monotone)) {
    return condemn(VerdictReason::trust_set_grew);
  }

  const bool mismatch = checks && checks->third_party_mismatch();
  const VerdictReason mismatch_reason =
      (checks && std::abs(checks->p) > checks->tolerance) ? VerdictReason::p_fail : VerdictReason::r_fail;

  // Concurrent evidence is exactly what the subject used, so any mismatch is final.
  if (mismatch && ctx.mode != CheckingMode::infrequent) return condemn(mismatch_reason);

  const bool pending = prior.status == VerdictStatus::possibly_untrustworthy;
  const bool shrank = is_strict_subset(trust_now, trust_prev);

  if (shrank && (pending || mismatch)) {
    ++v.shrinks_credited;
    if (v.shrinks_credited > ctx.subject_degree) return condemn(VerdictReason::no_shrink_after_suspect);
  }
  if (pending && !shrank) return condemn(VerdictReason::no_shrink_after_suspect);

  if (mismatch && !shrank) {
    v.status = VerdictStatus::possibly_untrustworthy;
    v.reason = mismatch_reason;
  } else {
    v.status = VerdictStatus::trusted;
    v.reason = VerdictReason::none;
  }
  return v;
}

} // namespace tdac
