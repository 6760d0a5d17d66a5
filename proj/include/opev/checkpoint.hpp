#pragma once

#include <string>

#include "opev/sac.hpp"

namespace opev::checkpoint {

/// On-disk agent container: format tag, network specs and parameters,
/// optimizer moments, temperature, RNG state, and the environment-config
/// hash the agent was trained against. JSON; doubles round-trip exactly
/// (shortest-representation serialization).
inline constexpr const char* kFormatTag = "opev-agent-v1";

struct AgentFile {
    std::string kind;             // "evader" | "adversary"
    std::string env_config_hash;  // must match the arena at load time
    sac::Agent agent;
};

void save_agent(const std::string& path, const sac::Agent& agent, const std::string& kind,
                const std::string& env_config_hash);

AgentFile load_agent(const std::string& path);

/// Reads just the env hash (cheap compatibility check before a full load).
std::string peek_env_hash(const std::string& path);

}  // namespace opev::checkpoint
