#pragma once

// Line-oriented experiment configuration:
//
//   # comment
//   r0 = 1.05
//   policies = offline, safe, risky
//   file_size = auto
//
// Keys: r0 rc eps d_min d_max d_step policies trials seed file_size
// truncation_tol output threads. Anything else is rejected.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qoe/experiment.hpp"

namespace qoe {

/// Malformed line, unknown key or unparsable value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& config_keys();

/// Sets one key. Throws ConfigError naming the key on failure.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Applies every `key = value` line of `text` on top of `cfg`. `origin`
/// prefixes error messages.
void apply_config_text(ExperimentConfig& cfg, std::string_view text, const std::string& origin = "config");

/// Defaults overlaid with the file. Throws ConfigError if it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

} // namespace qoe
