#pragma once

// Experiment configuration files.
//
// A config is a flat YAML mapping. Every key is optional; unset keys keep
// their defaults and unknown keys are rejected. Environment variables named
// IABPLACE_<KEY> (key upper-cased) override the file. The full key list is
// in configs/README.md.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "iabplace/scenarios.hpp"

namespace iabplace {

/// Environment overrides, key (lower case) -> YAML value text.
using Overrides = std::map<std::string, std::string>;

/// IABPLACE_* variables from the process environment.
Overrides environment_overrides();

ExperimentConfig parse_config_text(std::string_view yaml_text, const Overrides& overrides = {});

/// Reads and validates a config file. Throws ConfigError on a missing file,
/// a parse error, an unknown key or an invariant violation; the message
/// names the key.
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const Overrides& overrides = environment_overrides());

/// Canonical YAML rendering of every key (seed included).
std::string render_config(const ExperimentConfig& cfg);

/// 16 hex digits identifying everything in the config except the seed.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace iabplace
