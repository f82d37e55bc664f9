#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "tdac/trust.hpp"

using namespace tdac;
using support::canonical5;

namespace {

struct World {
  Graph g;
  std::vector<NodeState> nodes;

  World(Graph graph, const std::vector<double>& x0) : g(std::move(graph)) {
    for (NodeId j = 0; j < g.node_count(); ++j) nodes.push_back(init_node(j, x0[j], g.neighbors(j), g.node_count()));
  }

  void round() {
    std::vector<double> next(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) next[j] = advance_running_sum(nodes[j]);
    for (auto& s : nodes) {
      SigmaMap received;
      for (NodeId i : s.nbrs) received[i] = next[i];
      advance_node(s, all_nodes(nodes.size()), received);
    }
  }
};

// Evidence about `subject` across one all-trusted round of `w`.
CheckEvidence observe(World& w, NodeId subject, NodeId observer) {
  CheckEvidence ev;
  ev.subject = subject;
  ev.observer = observer;
  ev.subject_nbrs = w.g.neighbors(subject);
  ev.x0 = w.nodes[subject].x0;
  ev.x_prev = w.nodes[subject].x;
  ev.sigma_prev = ev.two_hop_sigma_prev = w.nodes[subject].sigma;
  ev.trust_prev = ev.trust_now = all_nodes(w.nodes.size());
  for (NodeId l : ev.subject_nbrs) ev.nbr_sigma_prev[l] = w.nodes[l].sigma;
  w.round();
  ev.x_now = w.nodes[subject].x;
  ev.sigma_now = ev.two_hop_sigma_now = w.nodes[subject].sigma;
  for (NodeId l : ev.subject_nbrs) ev.nbr_sigma_now[l] = w.nodes[l].sigma;
  return ev;
}

ClassifyContext infrequent_ctx(NodeId observer, std::size_t degree) {
  return ClassifyContext{CheckingMode::infrequent, observer, degree, false};
}

} // namespace

TEST_CASE("oracle_trust schedules") {
  TrustSchedule correct{CorrectFromStart{}, {0, 1, 2, 3}, 5};
  for (std::int64_t k : {0, 7, 100}) CHECK(oracle_trust(correct, k, 0) == NodeSet{0, 1, 2, 3});
  CHECK(oracle_trust(correct, 3, 4) == NodeSet{0, 1, 2, 3, 4});

  TrustSchedule random{RandomUntil{21, 77}, {0, 1, 2, 3}, 5};
  for (NodeId j = 0; j < 4; ++j) CHECK(oracle_trust(random, 25, j) == NodeSet{0, 1, 2, 3});
  CHECK(oracle_trust(random, 21, 2) == NodeSet{0, 1, 2, 3});

  NodeSet early = oracle_trust(random, 5, 0);
  CHECK(early.count(0) == 1);
  CHECK(is_subset(early, all_nodes(5)));
  CHECK(oracle_trust(random, 5, 0) == early);

  bool any_difference = false;
  for (std::int64_t k = 0; k < 21; ++k)
    for (NodeId j = 0; j < 5; ++j) {
      NodeSet a = oracle_trust(random, k, j);
      CHECK(a.count(j) == 1);
      TrustSchedule other{RandomUntil{21, 78}, {0, 1, 2, 3}, 5};
      if (a != oracle_trust(other, k, j)) any_difference = true;
    }
  CHECK(any_difference);
}

TEST_CASE("oracle_trust custom tables") {
  CustomTable table;
  table.table.push_back({{0, {0, 1}}, {1, {0, 1, 2}}});
  TrustSchedule s{table, {0, 1, 2}, 3};
  CHECK(oracle_trust(s, 0, 0) == NodeSet{0, 1});
  CHECK(oracle_trust(s, 1, 0) == NodeSet{0, 1, 2});
  CHECK_THROWS_AS(oracle_trust(s, 0, 2), std::out_of_range);

  CustomTable bad;
  bad.table.push_back({{0, {1, 2}}});
  CHECK_THROWS_AS(oracle_trust(TrustSchedule{bad, {0, 1, 2}, 3}, 0, 0), std::invalid_argument);
}

TEST_CASE("unit_draw is a pure function in [0, 1)") {
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (std::uint64_t k = 0; k < 20000; ++k) {
    double u = unit_draw(3, k, 7);
    CHECK(u == unit_draw(3, k, 7));
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("predict_value examples") {
  World w(canonical5(), support::one_to_n(5));
  CheckEvidence ev = observe(w, 3, 0);
  CHECK(predict_value(ev, 5) == ev.x_now);
  CHECK(predict_value(ev, 5) == doctest::Approx(3.4).epsilon(1e-15));

  CheckEvidence iso;
  iso.subject = 0;
  iso.subject_nbrs = {1};
  iso.x_prev = 2.5;
  iso.trust_prev = iso.trust_now = {0, 2};
  iso.nbr_sigma_prev = {{1, 4.0}};
  iso.nbr_sigma_now = {{1, 9.0}};
  CHECK(predict_value(iso, 3) == 2.5);
}

TEST_CASE("concurrent_check examples") {
  World w(canonical5(), support::one_to_n(5));
  for (int k = 0; k < 4; ++k) w.round();
  CheckEvidence ev = observe(w, 3, 0);

  ParityChecks honest = concurrent_check(ev, 5);
  CHECK(std::abs(honest.p) <= honest.tolerance);
  CHECK(std::abs(honest.q) <= honest.tolerance);
  CHECK_FALSE(honest.self_inconsistent());
  CHECK_FALSE(honest.third_party_mismatch());

  CheckEvidence shifted = ev;
  shifted.x_now += 0.7;
  ParityChecks p = concurrent_check(shifted, 5);
  CHECK(p.p == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(std::abs(p.q) <= p.tolerance);

  CheckEvidence inflated = ev;
  inflated.sigma_now += 0.3;
  CHECK(concurrent_check(inflated, 5).q == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("infrequent_check examples") {
  World w(canonical5(), support::one_to_n(5));
  for (int k = 0; k < 6; ++k) w.round();
  CheckEvidence ev = observe(w, 3, 0);
  ParityChecks honest = infrequent_check(ev, 5);
  CHECK(honest.has_r_s);
  for (double v : {honest.p, honest.q, honest.r, honest.s}) CHECK(std::abs(v) <= honest.tolerance);

  CheckEvidence forged = ev;
  forged.two_hop_sigma_prev += 0.5;
  ParityChecks s = infrequent_check(forged, 5);
  CHECK(s.s == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.self_inconsistent());
  CHECK(two_hop_consistency(1.0, 2.0, 1.5, 2.0) == 0.5);
}

TEST_CASE("a past injection surfaces only in r at the next check") {
  World w(canonical5(), support::one_to_n(5));
  for (int k = 0; k < 10; ++k) w.round();
  w.nodes[3].x += 0.5;
  for (int k = 10; k < 15; ++k) w.round();

  CheckEvidence ev = observe(w, 3, 0);
  ParityChecks c = infrequent_check(ev, 5);
  CHECK(std::abs(c.p) <= c.tolerance);
  CHECK(std::abs(c.q) <= c.tolerance);
  CHECK(std::abs(c.s) <= c.tolerance);

  TrustDelta d = update_trust_sets(w.nodes[3], all_nodes(5));
  const double residual = invariant_residual(w.nodes[3], d, w.nodes[3].mu);
  CHECK(c.r == doctest::Approx(residual).epsilon(1e-12));
  CHECK(c.r == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("classify examples") {
  const NodeSet t = all_nodes(5);
  ParityChecks q_bad;
  q_bad.has_r_s = true;
  q_bad.q = 0.3;
  Verdict v = classify(Verdict{}, q_bad, t, t, infrequent_ctx(0, 3));
  CHECK(v.status == VerdictStatus::malicious);
  CHECK(v.reason == VerdictReason::q_fail);

  ParityChecks pr;
  pr.has_r_s = true;
  pr.p = 0.2;
  pr.r = 0.2;
  Verdict pending = classify(Verdict{}, pr, t, t, infrequent_ctx(0, 3));
  CHECK(pending.status == VerdictStatus::possibly_untrustworthy);

  Verdict next = classify(pending, std::nullopt, t, t, infrequent_ctx(0, 3));
  CHECK(next.status == VerdictStatus::malicious);
  CHECK(next.reason == VerdictReason::no_shrink_after_suspect);

  Verdict cleared = classify(pending, std::nullopt, {0, 1, 3, 4}, t, infrequent_ctx(0, 3));
  CHECK(cleared.status == VerdictStatus::trusted);
  CHECK(cleared.shrinks_credited == 1);
}

TEST_CASE("classify trust-set rules") {
  const NodeSet t = all_nodes(5);
  ClassifyContext conc{CheckingMode::concurrent, 0, 3, false};

  Verdict unfair = classify(Verdict{}, ParityChecks{}, {1, 2, 3, 4}, t, conc);
  CHECK(unfair.status == VerdictStatus::malicious);
  CHECK(unfair.reason == VerdictReason::unfairly_declared_me);

  // Growth is tolerated in concurrent mode unless enforced.
  CHECK(classify(Verdict{}, ParityChecks{}, t, {0, 1, 3}, conc).status == VerdictStatus::trusted);
  ClassifyContext strict = conc;
  strict.enforce_monotone = true;
  CHECK(classify(Verdict{}, ParityChecks{}, t, {0, 1, 3}, strict).reason == VerdictReason::trust_set_grew);
  CHECK(classify(Verdict{}, std::nullopt, t, {0, 1, 3}, infrequent_ctx(0, 3)).reason ==
        VerdictReason::trust_set_grew);

  ParityChecks p_bad;
  p_bad.p = 1.0;
  Verdict conc_p = classify(Verdict{}, p_bad, t, t, conc);
  CHECK(conc_p.status == VerdictStatus::malicious);
  CHECK(conc_p.reason == VerdictReason::p_fail);
}

TEST_CASE("shrink credit is bounded by the subject's degree") {
  ParityChecks pr;
  pr.has_r_s = true;
  pr.r = 0.4;
  NodeSet trust = all_nodes(6);
  Verdict v;
  ClassifyContext ctx = infrequent_ctx(0, 2);
  for (NodeId drop : {5, 4}) {
    NodeSet smaller = trust;
    smaller.erase(drop);
    v = classify(v, pr, smaller, trust, ctx);
    CHECK(v.status == VerdictStatus::trusted);
    trust = smaller;
  }
  NodeSet smaller = trust;
  smaller.erase(3);
  v = classify(v, pr, smaller, trust, ctx);
  CHECK(v.status == VerdictStatus::malicious);
  CHECK(v.reason == VerdictReason::no_shrink_after_suspect);
}

TEST_CASE("malicious is absorbing") {
  Verdict m{VerdictStatus::malicious, VerdictReason::q_fail, 0};
  const NodeSet t = all_nodes(4);
  for (auto mode : {CheckingMode::concurrent, CheckingMode::infrequent}) {
    ClassifyContext ctx{mode, 0, 2, false};
    CHECK(classify(m, ParityChecks{}, t, t, ctx) == m);
    CHECK(classify(m, std::nullopt, {0, 1}, t, ctx) == m);
  }
}

TEST_CASE("verdict names") {
  CHECK(to_string(VerdictStatus::possibly_untrustworthy) == "possibly_untrustworthy");
  CHECK(to_string(VerdictReason::no_shrink_after_suspect) == "no_shrink_after_suspect");
}
