#include "tdac/scenario_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace tdac {

using nlohmann::json;

ScenarioError::ScenarioError(std::string field, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(message), field_(std::move(field)), line_(line), column_(column) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ScenarioError(field, "field '" + field + "': " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto& [key, value] : obj.items()) {
    if (!ok.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const std::string path = where.empty() ? key : where + "." + key;
  if (!obj.is_object() || !obj.contains(key)) fail(path, "missing");
  return obj.at(key);
}

std::string path_of(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_double(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::int64_t get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_uint(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

NodeId get_id(const json& v, const std::string& path) { return static_cast<NodeId>(get_uint(v, path)); }

NodeId parse_key_id(const std::string& key, const std::string& path) {
  NodeId id = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
  if (ec != std::errc() || ptr != key.data() + key.size()) fail(path, "node id key '" + key + "' is not an integer");
  return id;
}

std::optional<std::uint64_t> optional_seed(const json& obj, const std::string& where) {
  if (!obj.contains("seed")) return std::nullopt;
  return get_uint(obj.at("seed"), path_of(where, "seed"));
}

Behavior parse_behavior(const json& b, const std::string& where) {
  if (!b.is_object()) fail(where, "expected an object");
  const json& kind_v = require(b, "behavior", where);
  if (!kind_v.is_string()) fail(path_of(where, "behavior"), "expected a string");
  const std::string kind = kind_v.get<std::string>();
  if (kind == "honest_despite_label") {
    reject_unknown(b, where, {"behavior"});
    return Behavior{HonestDespiteLabel{}};
  }
  if (kind == "random_offset") {
    reject_unknown(b, where, {"behavior", "amplitude", "seed"});
    RandomOffset r;
    r.amplitude = get_double(require(b, "amplitude", where), path_of(where, "amplitude"));
    if (!(r.amplitude > 0.0)) fail(path_of(where, "amplitude"), "must be > 0");
    r.seed = optional_seed(b, where);
    return Behavior{r};
  }
  if (kind == "sigma_forge" || kind == "two_hop_mismatch") {
    reject_unknown(b, where, {"behavior", "delta", "start_round"});
    const double delta = get_double(require(b, "delta", where), path_of(where, "delta"));
    const std::int64_t start = b.contains("start_round") ? get_int(b.at("start_round"), path_of(where, "start_round")) : 0;
    if (kind == "sigma_forge") return Behavior{SigmaForge{delta, start}};
    return Behavior{TwoHopMismatch{delta, start}};
  }
  if (kind == "unfair_declare") {
    reject_unknown(b, where, {"behavior", "victim", "start_round"});
    UnfairDeclare u;
    u.victim = get_id(require(b, "victim", where), path_of(where, "victim"));
    u.start_round = b.contains("start_round") ? get_int(b.at("start_round"), path_of(where, "start_round")) : 0;
    return Behavior{u};
  }
  if (kind == "delayed_misbehavior") {
    reject_unknown(b, where, {"behavior", "honest_until", "then"});
    const std::int64_t until = get_int(require(b, "honest_until", where), path_of(where, "honest_until"));
    return delayed(until, parse_behavior(require(b, "then", where), path_of(where, "then")));
  }
  fail(path_of(where, "behavior"), "unknown behavior '" + kind + "'");
}

json behavior_to_json(const Behavior& b) {
  json out;
  out["behavior"] = kind_name(b);
  std::visit(overloaded{
                 [](const HonestDespiteLabel&) {},
                 [&](const RandomOffset& r) {
                   out["amplitude"] = r.amplitude;
                   if (r.seed) out["seed"] = *r.seed;
                 },
                 [&](const SigmaForge& f) {
                   out["delta"] = f.delta;
                   out["start_round"] = f.start_round;
                 },
                 [&](const TwoHopMismatch& m) {
                   out["delta"] = m.delta;
                   out["start_round"] = m.start_round;
                 },
                 [&](const UnfairDeclare& u) {
                   out["victim"] = u.victim;
                   out["start_round"] = u.start_round;
                 },
                 [&](const DelayedMisbehavior& d) {
                   out["honest_until"] = d.honest_until;
                   out["then"] = behavior_to_json(d.inner());
                 },
             },
             b.kind);
  return out;
}

NodeSet parse_id_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of node ids");
  NodeSet out;
  for (const json& e : v) out.insert(get_id(e, path));
  return out;
}

TrustMode parse_trust_mode(const json& t) {
  const std::string where = "trust_mode";
  if (!t.is_object()) fail(where, "expected an object");
  const json& mode_v = require(t, "mode", where);
  if (!mode_v.is_string()) fail("trust_mode.mode", "expected a string");
  const std::string mode = mode_v.get<std::string>();
  if (mode == "concurrent") {
    reject_unknown(t, where, {"mode", "enforce_monotone"});
    ConcurrentMode c;
    if (t.contains("enforce_monotone")) {
      if (!t.at("enforce_monotone").is_boolean()) fail("trust_mode.enforce_monotone", "expected a boolean");
      c.enforce_monotone = t.at("enforce_monotone").get<bool>();
    }
    return c;
  }
  if (mode == "infrequent") {
    reject_unknown(t, where, {"mode", "check_probability", "seed"});
    InfrequentMode m;
    m.check_probability = get_double(require(t, "check_probability", where), "trust_mode.check_probability");
    if (!(m.check_probability > 0.0 && m.check_probability <= 1.0)) {
      fail("trust_mode.check_probability", "must lie in (0, 1]");
    }
    m.seed = optional_seed(t, where);
    return m;
  }
  if (mode == "oracle") {
    const json& sched_v = require(t, "schedule", where);
    if (!sched_v.is_string()) fail("trust_mode.schedule", "expected a string");
    const std::string sched = sched_v.get<std::string>();
    OracleMode o;
    if (sched == "correct_from_start") {
      reject_unknown(t, where, {"mode", "schedule"});
      o.schedule = CorrectFromStart{};
    } else if (sched == "random_until") {
      reject_unknown(t, where, {"mode", "schedule", "settle_round", "seed"});
      RandomUntilSpec r;
      r.settle_round = get_int(require(t, "settle_round", where), "trust_mode.settle_round");
      if (r.settle_round < 0) fail("trust_mode.settle_round", "must be non-negative");
      r.seed = optional_seed(t, where);
      o.schedule = r;
    } else if (sched == "custom") {
      reject_unknown(t, where, {"mode", "schedule", "table"});
      const json& table = require(t, "table", where);
      if (!table.is_array()) fail("trust_mode.table", "expected an array of rounds");
      CustomTable c;
      for (std::size_t k = 0; k < table.size(); ++k) {
        const std::string row_path = "trust_mode.table[" + std::to_string(k) + "]";
        if (!table[k].is_object()) fail(row_path, "expected an object keyed by node id");
        std::map<NodeId, NodeSet> row;
        for (auto& [key, set] : table[k].items()) {
          row[parse_key_id(key, row_path)] = parse_id_list(set, row_path + "." + key);
        }
        c.table.push_back(std::move(row));
      }
      o.schedule = std::move(c);
    } else {
      fail("trust_mode.schedule", "unknown schedule '" + sched + "'");
    }
    return o;
  }
  fail("trust_mode.mode", "unknown mode '" + mode + "'");
}

json trust_mode_to_json(const TrustMode& m) {
  return std::visit(
      overloaded{
          [](const ConcurrentMode& c) {
            json out{{"mode", "concurrent"}};
            if (c.enforce_monotone) out["enforce_monotone"] = true;
            return out;
          },
          [](const InfrequentMode& i) {
            json out{{"mode", "infrequent"}, {"check_probability", i.check_probability}};
            if (i.seed) out["seed"] = *i.seed;
            return out;
          },
          [](const OracleMode& o) {
            json out{{"mode", "oracle"}};
            std::visit(overloaded{
                           [&](const CorrectFromStart&) { out["schedule"] = "correct_from_start"; },
                           [&](const RandomUntilSpec& r) {
                             out["schedule"] = "random_until";
                             out["settle_round"] = r.settle_round;
                             if (r.seed) out["seed"] = *r.seed;
                           },
                           [&](const CustomTable& c) {
                             out["schedule"] = "custom";
                             json table = json::array();
                             for (auto& row : c.table) {
                               json r = json::object();
                               for (auto& [j, set] : row) r[std::to_string(j)] = json(std::vector<NodeId>(set.begin(), set.end()));
                               table.push_back(std::move(r));
                             }
                             out["table"] = std::move(table);
                           },
                       },
                       o.schedule);
            return out;
          },
      },
      m);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

} // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    throw ScenarioError("", "syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                e.what(),
                        line, col);
  }
  if (!doc.is_object()) fail("(document)", "expected a JSON object");
  reject_unknown(doc, "", {"n", "edges", "x0", "malicious", "trust_mode", "seed", "max_rounds", "tol"});

  const json& n_v = require(doc, "n", "");
  const std::size_t n = static_cast<std::size_t>(get_uint(n_v, "n"));
  if (n < 2) fail("n", "needs at least 2 nodes");

  const json& edges_v = require(doc, "edges", "");
  if (!edges_v.is_array()) fail("edges", "expected an array of [a, b] pairs");
  std::vector<Edge> edges;
  for (const json& e : edges_v) {
    if (!e.is_array() || e.size() != 2) fail("edges", "each edge must be a two-element array");
    NodeId a = get_id(e[0], "edges"), b = get_id(e[1], "edges");
    if (a >= n || b >= n) fail("edges", "edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    if (a == b) fail("edges", "self-loop on node " + std::to_string(a));
    edges.push_back({a, b});
  }

  Scenario s;
  s.graph = Graph(n, edges);

  const json& x0_v = require(doc, "x0", "");
  if (!x0_v.is_array()) fail("x0", "expected an array of numbers");
  for (const json& v : x0_v) s.initial_values.push_back(get_double(v, "x0"));
  if (s.initial_values.size() != n) {
    fail("x0", "expected " + std::to_string(n) + " values, got " + std::to_string(s.initial_values.size()));
  }

  if (doc.contains("malicious")) {
    const json& mal = doc.at("malicious");
    if (!mal.is_object()) fail("malicious", "expected an object keyed by node id");
    for (auto& [key, spec] : mal.items()) {
      const std::string path = "malicious." + key;
      NodeId id = parse_key_id(key, path);
      if (id >= n) fail(path, "node id " + std::to_string(id) + " out of range for " + std::to_string(n) + " nodes");
      Behavior b = parse_behavior(spec, path);
      try {
        check_behavior(b, s.graph.neighbors(id));
      } catch (const std::invalid_argument& e) {
        fail(path, e.what());
      }
      s.malicious.emplace(id, std::move(b));
    }
  }

  s.trust_mode = parse_trust_mode(require(doc, "trust_mode", ""));
  if (doc.contains("seed")) s.seed = get_uint(doc.at("seed"), "seed");
  if (doc.contains("max_rounds")) {
    s.max_rounds = get_int(doc.at("max_rounds"), "max_rounds");
    if (s.max_rounds < 0) fail("max_rounds", "must be non-negative");
  }
  if (doc.contains("tol")) {
    s.convergence_tol = get_double(doc.at("tol"), "tol");
    if (!(s.convergence_tol > 0.0)) fail("tol", "must be positive");
  }
  try {
    check_scenario(s);
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    fail(msg.substr(0, msg.find(':')), msg);
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

json scenario_to_json(const Scenario& s) {
  json out;
  out["n"] = s.graph.node_count();
  json edges = json::array();
  for (auto [a, b] : s.graph.edges()) edges.push_back({a, b});
  out["edges"] = std::move(edges);
  out["x0"] = s.initial_values;
  json mal = json::object();
  for (auto& [id, b] : s.malicious) mal[std::to_string(id)] = behavior_to_json(b);
  out["malicious"] = std::move(mal);
  out["trust_mode"] = trust_mode_to_json(s.trust_mode);
  out["seed"] = s.seed;
  out["max_rounds"] = s.max_rounds;
  out["tol"] = s.convergence_tol;
  return out;
}

std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

namespace {

std::string join_ids(const NodeSet& s) {
  std::string out;
  for (NodeId id : s) {
    if (!out.empty()) out += ' ';
    out += std::to_string(id);
  }
  return out;
}

} // namespace

void write_table(const Trace& t, std::ostream& out) {
  out << "round,node,x,sigma,trust_set,verdicts\n";
  for (const RoundRecord& r : t.records) {
    out << r.round << ',' << r.node << ',' << format_double(r.x) << ',' << format_double(r.sigma) << ','
        << join_ids(r.trust_set) << ',';
    bool first = true;
    for (const VerdictEvent& ev : r.verdicts) {
      if (!first) out << ' ';
      first = false;
      out << ev.subject << ':' << to_string(ev.status) << ':' << to_string(ev.reason);
    }
    out << '\n';
  }
}

json summary_json(const Trace& t) {
  const TraceSummary& s = t.summary;
  json out;
  out["node_count"] = t.node_count;
  out["rounds"] = t.rounds;
  out["targets"] = {{"label_based", s.label_target}, {"behavior_based", s.behavior_target}, {"primary", s.target}};
  out["rounds_to_tolerance"] = s.rounds_to_tolerance ? json(*s.rounds_to_tolerance) : json(nullptr);
  out["max_error_final"] = s.max_error_final;
  out["final_values"] = s.final_values;
  json det = json::object();
  for (auto& [subject, by_observer] : s.detection_rounds) {
    json row = json::object();
    for (auto& [observer, round] : by_observer) row[std::to_string(observer)] = round;
    det[std::to_string(subject)] = std::move(row);
  }
  out["detection_rounds"] = std::move(det);
  json viol = json::array();
  for (auto& v : s.violations) viol.push_back({{"kind", to_string(v.kind)}, {"detail", v.detail}});
  out["assumption_violations"] = std::move(viol);
  out["monotone_warnings"] = s.monotone_warnings;
  json events = json::array();
  for (auto& ev : t.events) {
    events.push_back({{"round", ev.round},
                      {"observer", ev.observer},
                      {"subject", ev.subject},
                      {"status", to_string(ev.status)},
                      {"reason", to_string(ev.reason)}});
  }
  out["verdict_events"] = std::move(events);
  return out;
}

OutputFormat parse_output_format(std::string_view s) {
  if (s == "table") return OutputFormat::table;
  if (s == "summary") return OutputFormat::summary;
  if (s == "both") return OutputFormat::both;
  throw std::invalid_argument("unknown output format '" + std::string(s) + "'");
}

void emit_outputs(const Trace& t, const std::filesystem::path& dir, OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  if (format != OutputFormat::summary) {
    auto f = open("trace.csv");
    write_table(t, f);
    if (!f) throw std::runtime_error("write failed for " + (dir / "trace.csv").string());
  }
  if (format != OutputFormat::table) {
    auto f = open("summary.json");
    f << summary_json(t).dump(2) << '\n';
    if (!f) throw std::runtime_error("write failed for " + (dir / "summary.json").string());
  }
}

json validation_json(const Scenario& s) {
  ValidationReport r = validate_assumptions(s.graph, s.malicious_ids(), checking_mode(s.trust_mode));
  json out;
  out["mode"] = to_string(checking_mode(s.trust_mode));
  out["ok"] = r.ok();
  json viol = json::array();
  for (auto& v : r.violations) viol.push_back({{"kind", to_string(v.kind)}, {"detail", v.detail}});
  out["violations"] = std::move(viol);
  return out;
}

} // namespace tdac
