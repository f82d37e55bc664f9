#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "tdac/engine.hpp"

namespace tdac {

/// Parse failure. `field` names the offending key path for semantic errors;
/// `line`/`column` are set (1-based) for syntax errors.
class ScenarioError : public std::runtime_error {
public:
  ScenarioError(std::string field, const std::string& message, std::size_t line = 0, std::size_t column = 0);

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::string field_;
  std::size_t line_;
  std::size_t column_;
};

/// JSON scenario document -> Scenario, defaults filled in. Unknown keys are
/// rejected.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& s);
std::string serialize_scenario(const Scenario& s);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Delimited per-round table: round,node,x,sigma,trust_set,verdicts.
void write_table(const Trace& t, std::ostream& out);

nlohmann::json summary_json(const Trace& t);

enum class OutputFormat { table, summary, both };

OutputFormat parse_output_format(std::string_view s);

/// Writes trace.csv and/or summary.json into `dir` (created if missing).
/// Throws std::runtime_error when the directory or files cannot be written.
void emit_outputs(const Trace& t, const std::filesystem::path& dir, OutputFormat format);

nlohmann::json validation_json(const Scenario& s);

} // namespace tdac
