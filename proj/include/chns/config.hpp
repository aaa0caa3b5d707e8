// Plain-text run configuration: `key = value` lines with '#' comments.
// ';' separates list entries (circles, rectangles) and is ordinary text.
// Unknown keys are errors that cite the offending line, as are malformed
// values and parameter combinations the model rejects. The scenario key
// selects a preset whose values every other key overrides, no matter where
// in the file the scenario line sits.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chns/scenario.hpp"
#include "chns/simulation.hpp"

namespace chns {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  Scenario scenario; // model parameters live in scenario.params
  StrategyConfig strategy;
  RunOptions run; // output directory and observer are command-line concerns
};

Config parse_config(const std::string& text);

// Command-line overrides: behave like appended lines, except an override
// replaces an equal key in the text instead of colliding with it. Errors in
// override values cite "command line" rather than a line number.
Config parse_config(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Canonical form: fixed key order, shortest round-trip number formatting.
// serialize(parse(serialize(c))) == serialize(c).
std::string serialize_config(const Config& config);

} // namespace chns
