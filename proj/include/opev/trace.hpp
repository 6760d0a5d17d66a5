#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opev/arena.hpp"

namespace opev::trace {

using arena::Vec3;

/// One row per control step. Stage-1 episodes leave the adversary slots zero.
struct TraceRow {
    std::size_t step = 0;
    arena::GamePhase phase = arena::GamePhase::Outbound;
    dynamics::SpacecraftState evader;
    std::array<dynamics::SpacecraftState, 2> adversaries;
    Vec3 evader_action{0, 0, 0};
    std::array<Vec3, 2> adversary_actions{{{0, 0, 0}, {0, 0, 0}}};
    double reward_evader = 0.0;
    double reward_adversary = 0.0;
};

struct TraceHeader {
    std::string mode;  // "stage1" | "stage2"
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string outcome;
    std::string cause;
    std::size_t steps = 0;
    Vec3 start{0, 0, 0};
    Vec3 far_goal{0, 0, 0};
    double goal_radius = 3.0;
    double collision_center_distance = 2.0;
    std::vector<Vec3> obstacles;
};

/// Writes `<path_base>.csv` and `<path_base>.json`.
void write_trace(const std::string& path_base, const TraceHeader& header,
                 const std::vector<TraceRow>& rows);

TraceHeader read_header(const std::string& json_path);
/// Throws IoError with the offending row number on malformed input.
std::vector<TraceRow> read_rows(const std::string& csv_path);

/// Recomputes the outcome from the logged rows alone (goal arrivals and
/// collisions re-derived from geometry); replay cross-checks this against
/// the header.
arena::Outcome classify(const TraceHeader& header, const std::vector<TraceRow>& rows);

struct ReplaySummary {
    arena::Outcome outcome = arena::Outcome::Failure;
    std::size_t steps = 0;
    double min_adversary_distance = 0.0;  // center-to-center; +inf when no adversaries
    std::ptrdiff_t outbound_goal_step = -1;
    std::ptrdiff_t return_goal_step = -1;
};

ReplaySummary summarize(const TraceHeader& header, const std::vector<TraceRow>& rows);

/// Plot-ready positions CSV, keeping every `stride`-th row plus the last.
void write_downsampled(const std::string& path, const std::vector<TraceRow>& rows,
                       std::size_t stride);

}  // namespace opev::trace
