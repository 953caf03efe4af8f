#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sdom::cli {

using Json = nlohmann::json;

// Raised for malformed or invalid scenarios; the tool maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A validated scenario: the JSON document plus the fields every kind uses.
struct Scenario {
  std::string name;
  std::string kind;
  Json doc;
  std::uint64_t seed = 1;
  std::size_t seed_count = 1;
};

// Parses and validates against the schema of the scenario's kind (unknown keys rejected).
Scenario parse_scenario(const std::string& text);
// Applies key=value with a dotted key path; the value is parsed as JSON when possible.
void apply_override(Json& doc, const std::string& assignment);
Scenario validate(Json doc);

struct Check {
  std::string name;
  bool pass = false;
  double constant = 0.0;
  double tolerance = 0.0;
};

struct RunResult {
  std::map<std::string, std::string> files;  // file name -> contents, summary.csv included
  std::vector<Check> checks;
  bool all_pass() const;
};

RunResult run_scenario(const Scenario& scenario);

std::vector<std::string> template_names();
std::string template_text(const std::string& name);

std::vector<std::string> kind_names();
// Schema of a kind: sections, fields and their meaning. Throws ConfigError on unknown kinds.
std::string describe_kind(const std::string& kind);

}  // namespace sdom::cli
