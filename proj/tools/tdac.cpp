// tdac: validate, run and sweep averaging scenarios from the command line.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tdac/scenario_io.hpp"

namespace {

using namespace tdac;

struct Options {
  std::string scenario;
  std::string out = ".";
  std::string format = "both";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> max_rounds;
  std::uint64_t seed_from = 0;
  std::uint64_t seed_count = 10;
};

Scenario load(const Options& o) {
  Scenario s = load_scenario(o.scenario);
  if (o.seed) s.seed = *o.seed;
  if (o.max_rounds) {
    if (*o.max_rounds < 0) throw std::invalid_argument("--max-rounds must be non-negative");
    s.max_rounds = *o.max_rounds;
  }
  return s;
}

// Explicit per-component seeds would pin every sweep run to one draw.
void clear_component_seeds(Scenario& s) {
  if (auto* inf = std::get_if<InfrequentMode>(&s.trust_mode)) inf->seed.reset();
  if (auto* o = std::get_if<OracleMode>(&s.trust_mode)) {
    if (auto* r = std::get_if<RandomUntilSpec>(&o->schedule)) r->seed.reset();
  }
  for (auto& [id, b] : s.malicious) {
    Behavior* cur = &b;
    while (auto* d = std::get_if<DelayedMisbehavior>(&cur->kind)) cur = &d->then.front();
    if (auto* r = std::get_if<RandomOffset>(&cur->kind)) r->seed.reset();
  }
}

int cmd_validate(const Options& o) {
  Scenario s = load(o);
  nlohmann::json report = validation_json(s);
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_run(const Options& o) {
  Scenario s = load(o);
  Trace t = run_scenario(s);
  emit_outputs(t, o.out, parse_output_format(o.format));
  const TraceSummary& sum = t.summary;
  std::cout << "rounds " << t.rounds << ", target " << format_double(sum.target) << ", max error "
            << format_double(sum.max_error_final);
  if (sum.rounds_to_tolerance) std::cout << ", within tol from round " << *sum.rounds_to_tolerance;
  std::cout << '\n';
  return 0;
}

int cmd_sweep(const Options& o) {
  Scenario base = load(o);
  clear_component_seeds(base);
  const NodeSet adversaries = base.malicious_ids();
  const NodeSet honest = set_difference(base.graph.nodes(), adversaries);

  // adversary -> per-run first detection round (any observer) and full-coverage round
  std::map<NodeId, std::vector<std::int64_t>> first, full;
  std::map<NodeId, std::size_t> detected_by_all;
  std::size_t converged = 0;
  nlohmann::json runs = nlohmann::json::array();

  for (std::uint64_t k = 0; k < o.seed_count; ++k) {
    Scenario s = base;
    s.seed = o.seed_from + k;
    Trace t = run_scenario(s);
    if (t.summary.rounds_to_tolerance) ++converged;
    nlohmann::json run{{"seed", s.seed}, {"max_error_final", t.summary.max_error_final}};
    for (NodeId a : adversaries) {
      NodeSet watchers = set_intersection(s.graph.neighbors(a), honest);
      auto it = t.summary.detection_rounds.find(a);
      std::int64_t earliest = -1, latest = -1;
      std::size_t seen = 0;
      if (it != t.summary.detection_rounds.end()) {
        for (auto& [obs, round] : it->second) {
          if (!watchers.count(obs)) continue;
          ++seen;
          earliest = earliest < 0 ? round : std::min(earliest, round);
          latest = std::max(latest, round);
        }
      }
      if (earliest >= 0) first[a].push_back(earliest);
      if (seen == watchers.size() && !watchers.empty()) {
        ++detected_by_all[a];
        full[a].push_back(latest);
      }
      run["detection"][std::to_string(a)] = {{"first", earliest < 0 ? nlohmann::json(nullptr) : nlohmann::json(earliest)},
                                             {"observers", seen},
                                             {"neighbors", watchers.size()}};
    }
    runs.push_back(std::move(run));
  }

  auto stats = [](const std::vector<std::int64_t>& v) {
    if (v.empty()) return nlohmann::json(nullptr);
    std::vector<std::int64_t> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    return nlohmann::json{{"min", sorted.front()},
                          {"median", sorted[sorted.size() / 2]},
                          {"mean", mean},
                          {"max", sorted.back()}};
  };

  nlohmann::json out;
  out["seed_from"] = o.seed_from;
  out["seed_count"] = o.seed_count;
  out["converged_runs"] = converged;
  for (NodeId a : adversaries) {
    out["adversaries"][std::to_string(a)] = {{"behavior", kind_name(base.malicious.at(a))},
                                             {"runs_detected_by_all_neighbors", detected_by_all[a]},
                                             {"first_detection", stats(first[a])},
                                             {"all_neighbors_detection", stats(full[a])}};
  }
  out["runs"] = std::move(runs);

  std::filesystem::create_directories(o.out);
  const std::filesystem::path file = std::filesystem::path(o.out) / "sweep.json";
  std::ofstream f(file);
  if (!f) throw std::runtime_error("cannot write " + file.string());
  f << out.dump(2) << '\n';
  std::cout << "sweep of " << o.seed_count << " seeds written to " << file.string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-aware distributed averaging simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the scenario seed");
    sub->add_option("--max-rounds", o.max_rounds, "Override max_rounds");
  };

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario and report assumption violations");
  add_common(validate);

  CLI::App* run = app.add_subcommand("run", "Run one simulation and write its outputs");
  add_common(run);
  run->add_option("--out", o.out, "Output directory");
  run->add_option("--format", o.format, "Output files")->check(CLI::IsMember({"table", "summary", "both"}));

  CLI::App* sweep = app.add_subcommand("sweep", "Repeat a scenario over a seed range");
  add_common(sweep);
  sweep->add_option("--out", o.out, "Output directory");
  sweep->add_option("--seed-from", o.seed_from, "First seed of the range");
  sweep->add_option("--seeds", o.seed_count, "Number of seeds")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (run->parsed()) return cmd_run(o);
    if (sweep->parsed()) {
      if (o.seed) o.seed_from = *o.seed;
      return cmd_sweep(o);
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
