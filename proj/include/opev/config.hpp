#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "opev/heuristics.hpp"
#include "opev/trainer.hpp"

namespace opev::config {

struct EvalConfig {
    std::size_t n_episodes = 200;
    std::uint64_t seed_base = 1000;
    bool deterministic_policy = false;
    std::size_t sweep_battery = 100;
};

/// Complete declarative run configuration. Every field has a default; a
/// config file may specify any subset and dotted-path overrides patch
/// individual leaves.
struct RunConfig {
    std::string profile = "desk";  // "desk" (minutes-scale) or "full" (paper-scale)
    std::uint64_t seed = 0;
    trainer::TrainerConfig trainer;
    heuristics::HeuristicConfig heuristics;  // variant field ignored; both experts share these
    EvalConfig eval;
};

/// Built-in profile defaults.
RunConfig defaults_for(const std::string& profile);

nlohmann::json to_json(const RunConfig& cfg);
RunConfig from_json(const nlohmann::json& j);

/// Deep-merge `patch` over `base` (objects merge recursively, scalars and
/// arrays replace).
void merge_json(nlohmann::json& base, const nlohmann::json& patch);

/// Applies one `dotted.path=value` override. Values parse as JSON when
/// possible, otherwise as strings. Unknown paths raise ConfigError.
void apply_override(nlohmann::json& j, const std::string& spec);

/// Loads with precedence: profile defaults < config file < overrides.
/// `profile_flag` (when non-empty) wins over the file's profile field.
RunConfig load_config(const std::string& path_or_empty,
                      const std::vector<std::string>& overrides,
                      const std::string& profile_flag = "");

/// FNV-1a over the canonical serialization (nlohmann objects serialize with
/// sorted keys, so key order in the source file cannot change the hash).
std::string config_hash(const nlohmann::json& j);

/// Hash over the environment-defining sections only (dynamics, sensor,
/// arena). Checkpoints store this; training and eval refuse mismatches.
std::string env_config_hash(const RunConfig& cfg);
std::string full_config_hash(const RunConfig& cfg);

/// Expands a benchmark method name into the divergence settings and the
/// adversary actor head it implies: SA (n=1, no divergence, linear), MA
/// (n=2, alpha=0, linear), DARL (n=2, alpha>0, sine), NSA (n=2, alpha>0,
/// linear).
void apply_method(RunConfig& cfg, const std::string& method);

/// Writes the resolved config snapshot into a run directory.
void write_snapshot(const RunConfig& cfg, const std::string& run_dir);

}  // namespace opev::config
