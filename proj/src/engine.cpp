#include "tdac/engine.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tdac {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Stream tags keep derived seeds independent of each other.
constexpr std::uint64_t kScheduleTag = 0x7472757374ULL;
constexpr std::uint64_t kCheckTag = 0x636865636bULL;
constexpr std::uint64_t kAdversaryTag = 0x6164766572ULL;

std::optional<std::uint64_t> explicit_offset_seed(const Behavior& b) {
  if (auto* r = std::get_if<RandomOffset>(&b.kind)) return r->seed;
  if (auto* d = std::get_if<DelayedMisbehavior>(&b.kind)) return explicit_offset_seed(d->inner());
  return std::nullopt;
}

double mean_over(const std::vector<double>& values, const NodeSet& ids) {
  if (ids.empty()) throw std::invalid_argument("trustworthy set is empty");
  double sum = 0.0;
  for (NodeId j : ids) sum += values[j];
  return sum / static_cast<double>(ids.size());
}

} // namespace

CheckingMode checking_mode(const TrustMode& m) {
  return std::visit(overloaded{
                        [](const OracleMode&) { return CheckingMode::oracle; },
                        [](const ConcurrentMode&) { return CheckingMode::concurrent; },
                        [](const InfrequentMode&) { return CheckingMode::infrequent; },
                    },
                    m);
}

NodeSet Scenario::malicious_ids() const {
  NodeSet out;
  for (auto& [id, b] : malicious) out.insert(id);
  return out;
}

void check_scenario(const Scenario& s) {
  const std::size_t n = s.graph.node_count();
  if (n < 2) throw std::invalid_argument("graph: needs at least 2 nodes");
  if (s.initial_values.size() != n) {
    throw std::invalid_argument("x0: expected " + std::to_string(n) + " values, got " +
                                std::to_string(s.initial_values.size()));
  }
  for (auto& [id, b] : s.malicious) {
    if (id >= n) throw std::invalid_argument("malicious: node id " + std::to_string(id) + " out of range");
    check_behavior(b, s.graph.neighbors(id));
  }
  if (s.max_rounds < 0) throw std::invalid_argument("max_rounds: must be non-negative");
  if (!(s.convergence_tol > 0.0)) throw std::invalid_argument("tol: must be positive");
  if (auto* inf = std::get_if<InfrequentMode>(&s.trust_mode)) {
    if (!(inf->check_probability > 0.0 && inf->check_probability <= 1.0)) {
      throw std::invalid_argument("trust_mode.check_probability: must lie in (0, 1]");
    }
  }
  if (auto* o = std::get_if<OracleMode>(&s.trust_mode)) {
    if (auto* r = std::get_if<RandomUntilSpec>(&o->schedule); r && r->settle_round < 0) {
      throw std::invalid_argument("trust_mode.settle_round: must be non-negative");
    }
    if (auto* c = std::get_if<CustomTable>(&o->schedule)) {
      for (auto& row : c->table) {
        for (auto& [j, set] : row) {
          if (j >= n) throw std::invalid_argument("trust_mode.table: node id out of range");
          for (NodeId i : set) {
            if (i >= n) throw std::invalid_argument("trust_mode.table: trusted id out of range");
          }
        }
      }
    }
  }
}

double label_average(const Scenario& s) {
  return mean_over(s.initial_values, set_difference(s.graph.nodes(), s.malicious_ids()));
}

double behavior_average(const Scenario& s) {
  NodeSet members = set_difference(s.graph.nodes(), s.malicious_ids());
  for (auto& [id, b] : s.malicious) {
    if (respects_update_rule(b, s.max_rounds)) members.insert(id);
  }
  return mean_over(s.initial_values, members);
}

double trustworthy_average(const Scenario& s) {
  return checking_mode(s.trust_mode) == CheckingMode::oracle ? label_average(s) : behavior_average(s);
}

ConvergenceMetrics convergence_metrics(const Trace& t, double target, double tol) {
  ConvergenceMetrics m;
  if (t.records.empty()) return m;
  auto max_err = [&](std::int64_t k) {
    double e = 0.0;
    for (NodeId j : t.honest) e = std::max(e, std::abs(t.at(k, j).x - target));
    return e;
  };
  m.max_error_final = max_err(t.rounds);
  std::optional<std::int64_t> since;
  for (std::int64_t k = t.rounds; k >= 0; --k) {
    if (max_err(k) <= tol) {
      since = k;
    } else {
      break;
    }
  }
  m.converged = since.has_value();
  m.round = since;
  return m;
}

// ---------------------------------------------------------------------------

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)) {
  check_scenario(scenario_);
  n_ = scenario_.graph.node_count();
  mode_ = checking_mode(scenario_.trust_mode);
  const NodeSet everyone = all_nodes(n_);
  const NodeSet truth = set_difference(everyone, scenario_.malicious_ids());

  if (auto* o = std::get_if<OracleMode>(&scenario_.trust_mode)) {
    TrustSchedule sched;
    sched.truth = truth;
    sched.n_total = n_;
    sched.mode = std::visit(overloaded{
                                [](const CorrectFromStart& c) -> ScheduleMode { return c; },
                                [&](const RandomUntilSpec& r) -> ScheduleMode {
                                  return RandomUntil{r.settle_round,
                                                     r.seed.value_or(mix_seed(scenario_.seed, kScheduleTag))};
                                },
                                [](const CustomTable& c) -> ScheduleMode { return c; },
                            },
                            o->schedule);
    schedule_ = std::move(sched);
  }
  if (auto* inf = std::get_if<InfrequentMode>(&scenario_.trust_mode)) {
    check_seed_ = inf->seed.value_or(mix_seed(scenario_.seed, kCheckTag));
  }

  behaviors_.resize(n_);
  adversary_rng_.resize(n_);
  verdicts_.resize(n_);
  pending_events_.resize(n_);
  for (NodeId j = 0; j < n_; ++j) {
    const NodeSet& nbrs = scenario_.graph.neighbors(j);
    nodes_.push_back(init_node(j, scenario_.initial_values[j], nbrs, n_));
    TrustDelta initial;
    initial.active_nbrs = nbrs;
    initial.degree = nbrs.size();
    last_delta_.push_back(initial);
    published_.push_back(Published{scenario_.initial_values[j], 0.0, everyone, {}});
    auto it = scenario_.malicious.find(j);
    if (it != scenario_.malicious.end()) {
      behaviors_[j] = it->second;
      adversary_rng_[j].seed(explicit_offset_seed(it->second).value_or(mix_seed(scenario_.seed, kAdversaryTag, j)));
    }
    for (NodeId i : nbrs) verdicts_[j][i] = Verdict{};
  }
  record_round();
}

Verdict Simulation::verdict(NodeId observer, NodeId subject) const {
  auto& row = verdicts_.at(observer);
  auto it = row.find(subject);
  return it == row.end() ? Verdict{} : it->second;
}

NodeSet Simulation::trust_input(NodeId j, std::int64_t k) const {
  NodeSet base;
  if (mode_ == CheckingMode::oracle) {
    base = oracle_trust(*schedule_, k, j);
  } else {
    base = all_nodes(n_);
    if (!is_adversary(j)) {
      for (auto& [i, v] : verdicts_[j]) {
        if (v.status == VerdictStatus::malicious) base.erase(i);
      }
    }
  }
  if (is_adversary(j)) base = declared_trust(*behaviors_[j], base, k);
  base.insert(j);
  return base;
}

void Simulation::run_round() {
  const std::int64_t k = round_;

  std::vector<NodeSet> trust(n_);
  std::vector<TrustDelta> delta(n_);
  std::vector<double> e(n_), sigma_next(n_), reported(n_);
  for (NodeId j = 0; j < n_; ++j) {
    trust[j] = trust_input(j, k);
    delta[j] = update_trust_sets(nodes_[j], trust[j]);
    e[j] = correction_term(nodes_[j], delta[j]);
    sigma_next[j] = advance_running_sum(nodes_[j]);
    reported[j] = is_adversary(j) ? forge_running_sum(*behaviors_[j], sigma_next[j], k) : sigma_next[j];
  }

  std::vector<Published> now(n_);
  for (NodeId j = 0; j < n_; ++j) {
    NodeState& s = nodes_[j];
    SigmaMap received;
    for (NodeId i : s.nbrs) received[i] = reported[i];
    SigmaMap mu_next = update_mu(s, delta[j], received);
    double x_next = step_value(s, delta[j], mu_next, e[j]);
    if (is_adversary(j)) x_next = perturb_value(*behaviors_[j], x_next, k, adversary_rng_[j]);
    s.prev_sigma = s.sigma;
    s.sigma = sigma_next[j];
    s.x = x_next;
    s.mu = std::move(mu_next);
    s.prev_trust = trust[j];

    now[j].x = x_next;
    now[j].sigma = reported[j];
    now[j].trust = trust[j];
    now[j].two_hop = is_adversary(j) ? answer_two_hop(*behaviors_[j], published_[j].sigma, reported[j], k)
                                     : TwoHopAnswer{published_[j].sigma, reported[j]};
  }

  if (mode_ != CheckingMode::oracle) run_checks(k, now);

  published_ = std::move(now);
  last_delta_ = std::move(delta);
  ++round_;
  record_round();
}

void Simulation::run(std::int64_t rounds) {
  for (std::int64_t r = 0; r < rounds; ++r) run_round();
}

CheckEvidence Simulation::evidence(NodeId observer, NodeId subject, const std::vector<Published>& now,
                                   bool two_hop) const {
  const Published& before = published_[subject];
  const Published& after = now[subject];
  CheckEvidence ev;
  ev.subject = subject;
  ev.observer = observer;
  ev.subject_nbrs = scenario_.graph.neighbors(subject);
  ev.x0 = scenario_.initial_values[subject];
  ev.x_prev = before.x;
  ev.x_now = after.x;
  ev.sigma_prev = before.sigma;
  ev.sigma_now = after.sigma;
  ev.trust_prev = before.trust;
  ev.trust_now = after.trust;
  if (two_hop) {
    ev.two_hop_sigma_prev = after.two_hop.sigma_prev;
    ev.two_hop_sigma_now = after.two_hop.sigma_now;
  } else {
    ev.two_hop_sigma_prev = before.sigma;
    ev.two_hop_sigma_now = after.sigma;
  }
  for (NodeId l : ev.subject_nbrs) {
    if (two_hop) {
      ev.nbr_sigma_prev[l] = now[l].two_hop.sigma_prev;
      ev.nbr_sigma_now[l] = now[l].two_hop.sigma_now;
    } else {
      ev.nbr_sigma_prev[l] = published_[l].sigma;
      ev.nbr_sigma_now[l] = now[l].sigma;
    }
  }
  return ev;
}

void Simulation::run_checks(std::int64_t k, const std::vector<Published>& now) {
  // checks[observer][subject]
  std::vector<std::map<NodeId, ParityChecks>> checks(n_);
  auto still_open = [&](NodeId o, NodeId i) { return verdicts_[o].at(i).status != VerdictStatus::malicious; };

  if (mode_ == CheckingMode::concurrent) {
    for (NodeId o = 0; o < n_; ++o) {
      if (is_adversary(o)) continue;
      for (NodeId i : scenario_.graph.neighbors(o)) {
        if (still_open(o, i)) checks[o][i] = concurrent_check(evidence(o, i, now, false), n_);
      }
    }
  } else {
    const double prob = std::get<InfrequentMode>(scenario_.trust_mode).check_probability;
    NodeSet subjects;
    for (NodeId j = 0; j < n_; ++j) {
      if (is_adversary(j)) continue;
      if (unit_draw(check_seed_, static_cast<std::uint64_t>(k), j) < prob) {
        const NodeSet& nb = scenario_.graph.neighbors(j);
        subjects.insert(nb.begin(), nb.end());
      }
    }
    NodeSet responders = subjects;
    for (NodeId i : subjects) {
      const NodeSet& nb = scenario_.graph.neighbors(i);
      responders.insert(nb.begin(), nb.end());
    }
    for (NodeId i : subjects) {
      for (NodeId o : scenario_.graph.neighbors(i)) {
        if (!is_adversary(o) && still_open(o, i)) checks[o][i] = infrequent_check(evidence(o, i, now, true), n_);
      }
    }
    for (NodeId m : responders) {
      if (subjects.count(m)) continue;
      const Published& before = published_[m];
      const Published& after = now[m];
      for (NodeId o : scenario_.graph.neighbors(m)) {
        if (is_adversary(o) || !still_open(o, m)) continue;
        ParityChecks c;
        c.has_r_s = true;
        c.s = two_hop_consistency(before.sigma, after.sigma, after.two_hop.sigma_prev, after.two_hop.sigma_now);
        c.tolerance = scaled_tolerance({before.sigma, after.sigma, after.two_hop.sigma_prev, after.two_hop.sigma_now});
        checks[o][m] = c;
      }
    }
  }

  for (NodeId o = 0; o < n_; ++o) {
    if (is_adversary(o)) continue;
    for (auto& [i, prior] : verdicts_[o]) {
      const NodeSet& t_now = now[i].trust;
      const NodeSet& t_prev = published_[i].trust;
      if (mode_ == CheckingMode::concurrent && prior.status != VerdictStatus::malicious && !is_subset(t_now, t_prev)) {
        ++monotone_warnings_;
      }
      auto found = checks[o].find(i);
      std::optional<ParityChecks> c;
      if (found != checks[o].end()) c = found->second;
      ClassifyContext ctx;
      ctx.mode = mode_;
      ctx.observer = o;
      ctx.subject_degree = scenario_.graph.neighbors(i).size();
      if (auto* cm = std::get_if<ConcurrentMode>(&scenario_.trust_mode)) ctx.enforce_monotone = cm->enforce_monotone;
      Verdict next = classify(prior, c, t_now, t_prev, ctx);
      if (next.status != prior.status || next.reason != prior.reason) {
        VerdictEvent ev{k, o, i, next.status, next.reason};
        events_.push_back(ev);
        pending_events_[o].push_back(ev);
      }
      prior = next;
    }
  }
}

void Simulation::record_round() {
  for (NodeId j = 0; j < n_; ++j) {
    RoundRecord r;
    r.round = round_;
    r.node = j;
    r.x = nodes_[j].x;
    r.sigma = nodes_[j].sigma;
    r.trust_set = published_[j].trust;
    r.verdicts = std::move(pending_events_[j]);
    pending_events_[j].clear();
    records_.push_back(std::move(r));
  }
}

Trace Simulation::trace() const {
  Trace t;
  t.node_count = n_;
  t.honest = set_difference(all_nodes(n_), scenario_.malicious_ids());
  t.rounds = round_;
  t.records = records_;
  t.events = events_;

  TraceSummary& s = t.summary;
  s.label_target = label_average(scenario_);
  s.behavior_target = behavior_average(scenario_);
  s.target = trustworthy_average(scenario_);
  ConvergenceMetrics m = convergence_metrics(t, s.target, scenario_.convergence_tol);
  s.rounds_to_tolerance = m.round;
  s.max_error_final = m.max_error_final;
  for (NodeId j = 0; j < n_; ++j) s.final_values.push_back(nodes_[j].x);
  for (const VerdictEvent& ev : events_) {
    if (ev.status == VerdictStatus::malicious) s.detection_rounds[ev.subject].emplace(ev.observer, ev.round);
  }
  s.violations = validate_assumptions(scenario_.graph, scenario_.malicious_ids(), mode_).violations;
  s.monotone_warnings = monotone_warnings_;
  return t;
}

Trace run_scenario(const Scenario& s) {
  Simulation sim(s);
  sim.run(s.max_rounds);
  return sim.trace();
}

} // namespace tdac
