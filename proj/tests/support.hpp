#pragma once

// Scenario generators and small helpers shared by the test binaries.

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tdac/engine.hpp"
#include "tdac/scenario_io.hpp"

namespace support {

using namespace tdac;

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(TDAC_SCENARIO_DIR) / (name + ".json");
}

inline Graph canonical5() { return Graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}}); }

inline std::vector<double> one_to_n(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

/// Random malicious set of size <= max_size meeting the mode's assumptions,
/// or empty if none is found quickly.
inline NodeSet random_malicious(const Graph& g, std::size_t max_size, CheckingMode mode, std::mt19937_64& rng) {
  const std::size_t n = g.node_count();
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::uniform_int_distribution<std::size_t> size_d(1, std::max<std::size_t>(1, max_size));
    std::uniform_int_distribution<NodeId> id_d(0, n - 1);
    NodeSet m;
    const std::size_t want = size_d(rng);
    while (m.size() < want) m.insert(id_d(rng));
    if (m.size() >= n) continue;
    if (validate_assumptions(g, m, mode).ok()) return m;
  }
  return {};
}

inline Behavior random_behavior(NodeId id, const Graph& g, std::mt19937_64& rng, bool allow_all = true) {
  std::uniform_int_distribution<int> kind(0, allow_all ? 5 : 2);
  std::uniform_real_distribution<double> mag(0.1, 2.0);
  std::uniform_int_distribution<std::int64_t> start(0, 15);
  switch (kind(rng)) {
    case 0: return Behavior{RandomOffset{mag(rng), std::nullopt}};
    case 1: return Behavior{SigmaForge{mag(rng), start(rng)}};
    case 2: return Behavior{TwoHopMismatch{mag(rng), start(rng)}};
    case 3: return Behavior{HonestDespiteLabel{}};
    case 4: {
      const NodeSet& nb = g.neighbors(id);
      std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
      return Behavior{UnfairDeclare{*std::next(nb.begin(), static_cast<long>(pick(rng))), start(rng)}};
    }
    default: return delayed(start(rng), Behavior{RandomOffset{mag(rng), std::nullopt}});
  }
}

/// Oracle-mode scenario with random trust fluctuation before settling.
inline Scenario random_oracle_scenario(std::uint64_t seed, std::size_t max_n, std::int64_t rounds) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> n_d(3, max_n);
  std::uniform_real_distribution<double> p_d(0.0, 0.6);
  std::uniform_int_distribution<std::int64_t> settle_d(0, 30);
  Scenario s;
  const std::size_t n = n_d(rng);
  s.graph = random_connected_graph(n, p_d(rng), rng());
  s.initial_values = random_values(n, rng);
  for (NodeId m : random_malicious(s.graph, n / 3, CheckingMode::oracle, rng)) {
    s.malicious.emplace(m, random_behavior(m, s.graph, rng));
  }
  s.trust_mode = OracleMode{RandomUntilSpec{settle_d(rng), std::nullopt}};
  s.max_rounds = rounds;
  s.seed = rng();
  return s;
}

/// Checking-mode scenario satisfying the no-adjacent-adversaries assumption.
inline Scenario random_checking_scenario(std::uint64_t seed, std::size_t max_n, TrustMode mode,
                                         const std::vector<Behavior>& kinds, std::int64_t rounds) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> n_d(4, max_n);
  std::uniform_real_distribution<double> p_d(0.1, 0.6);
  const CheckingMode cm = checking_mode(mode);
  for (;;) {
    Scenario s;
    const std::size_t n = n_d(rng);
    s.graph = random_connected_graph(n, p_d(rng), rng());
    s.initial_values = random_values(n, rng);
    NodeSet m = random_malicious(s.graph, n / 4, cm, rng);
    if (m.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, kinds.size() - 1);
    for (NodeId id : m) s.malicious.emplace(id, kinds[pick(rng)]);
    s.trust_mode = mode;
    s.max_rounds = rounds;
    s.seed = rng();
    return s;
  }
}

inline NodeSet honest_neighbors(const Scenario& s, NodeId i) {
  return set_difference(s.graph.neighbors(i), s.malicious_ids());
}

inline std::string table_text(const Trace& t) {
  std::ostringstream out;
  write_table(t, out);
  return out.str();
}

} // namespace support
