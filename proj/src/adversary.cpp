#include "tdac/adversary.hpp"

#include <stdexcept>

namespace tdac {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool active_from(std::int64_t start, std::int64_t k) { return k >= start; }

} // namespace

Behavior delayed(std::int64_t honest_until, Behavior then) {
  DelayedMisbehavior d;
  d.honest_until = honest_until;
  d.then.push_back(std::move(then));
  return Behavior{std::move(d)};
}

std::string kind_name(const Behavior& b) {
  return std::visit(overloaded{
                        [](const HonestDespiteLabel&) { return std::string("honest_despite_label"); },
                        [](const RandomOffset&) { return std::string("random_offset"); },
                        [](const SigmaForge&) { return std::string("sigma_forge"); },
                        [](const TwoHopMismatch&) { return std::string("two_hop_mismatch"); },
                        [](const UnfairDeclare&) { return std::string("unfair_declare"); },
                        [](const DelayedMisbehavior&) { return std::string("delayed_misbehavior"); },
                    },
                    b.kind);
}

bool respects_update_rule(const Behavior& b, std::int64_t max_rounds) {
  return std::visit(overloaded{
                        [](const HonestDespiteLabel&) { return true; },
                        [](const UnfairDeclare&) { return true; },
                        [&](const DelayedMisbehavior& d) {
                          return d.honest_until >= max_rounds || respects_update_rule(d.inner(), max_rounds);
                        },
                        [](const auto&) { return false; },
                    },
                    b.kind);
}

void check_behavior(const Behavior& b, const NodeSet& own_nbrs) {
  std::visit(overloaded{
                 [](const RandomOffset& r) {
                   if (!(r.amplitude > 0.0)) throw std::invalid_argument("random_offset amplitude must be > 0");
                 },
                 [&](const UnfairDeclare& u) {
                   if (!own_nbrs.count(u.victim)) {
                     throw std::invalid_argument("unfair_declare victim " + std::to_string(u.victim) +
                                                 " is not a neighbor");
                   }
                 },
                 [&](const DelayedMisbehavior& d) {
                   if (d.then.size() != 1) throw std::invalid_argument("delayed_misbehavior needs one inner behavior");
                   check_behavior(d.inner(), own_nbrs);
                 },
                 [](const auto&) {},
             },
             b.kind);
}

NodeSet declared_trust(const Behavior& b, const NodeSet& honest_trust, std::int64_t k) {
  return std::visit(overloaded{
                        [&](const UnfairDeclare& u) {
                          NodeSet t = honest_trust;
                          if (active_from(u.start_round, k)) t.erase(u.victim);
                          return t;
                        },
                        [&](const DelayedMisbehavior& d) {
                          return k < d.honest_until ? honest_trust : declared_trust(d.inner(), honest_trust, k);
                        },
                        [&](const auto&) { return honest_trust; },
                    },
                    b.kind);
}

double forge_running_sum(const Behavior& b, double sigma_next, std::int64_t k) {
  return std::visit(overloaded{
                        [&](const SigmaForge& f) { return active_from(f.start_round, k) ? sigma_next + f.delta : sigma_next; },
                        [&](const DelayedMisbehavior& d) {
                          return k < d.honest_until ? sigma_next : forge_running_sum(d.inner(), sigma_next, k);
                        },
                        [&](const auto&) { return sigma_next; },
                    },
                    b.kind);
}

double perturb_value(const Behavior& b, double x_next, std::int64_t k, std::mt19937_64& rng) {
  return std::visit(overloaded{
                        [&](const RandomOffset& r) {
                          std::uniform_real_distribution<double> offset(-r.amplitude, r.amplitude);
                          return x_next + offset(rng);
                        },
                        [&](const DelayedMisbehavior& d) {
                          return k < d.honest_until ? x_next : perturb_value(d.inner(), x_next, k, rng);
                        },
                        [&](const auto&) { return x_next; },
                    },
                    b.kind);
}

TwoHopAnswer answer_two_hop(const Behavior& b, double reported_prev, double reported_now, std::int64_t k) {
  return std::visit(overloaded{
                        [&](const TwoHopMismatch& m) {
                          if (!active_from(m.start_round, k)) return TwoHopAnswer{reported_prev, reported_now};
                          return TwoHopAnswer{reported_prev + m.delta, reported_now + m.delta};
                        },
                        [&](const DelayedMisbehavior& d) {
                          return k < d.honest_until ? TwoHopAnswer{reported_prev, reported_now}
                                                    : answer_two_hop(d.inner(), reported_prev, reported_now, k);
                        },
                        [&](const auto&) { return TwoHopAnswer{reported_prev, reported_now}; },
                    },
                    b.kind);
}

Emission apply_behavior(const Behavior& b, const Broadcast& honest, double reported_sigma_prev, std::int64_t k,
                        std::mt19937_64& rng) {
  Emission out;
  out.one_hop = honest;
  out.one_hop.trust_set = declared_trust(b, honest.trust_set, k);
  out.one_hop.sigma_next = forge_running_sum(b, honest.sigma_next, k);
  out.one_hop.x_next = perturb_value(b, honest.x_next, k, rng);
  out.two_hop = answer_two_hop(b, reported_sigma_prev, out.one_hop.sigma_next, k);
  return out;
}

} // namespace tdac
