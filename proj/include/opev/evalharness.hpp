#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opev/arena.hpp"
#include "opev/heuristics.hpp"
#include "opev/sac.hpp"

namespace opev::evalharness {

/// Standardized test protocol: every episode pits the evader checkpoint
/// against one Collider (slot 0) and one Blocker (slot 1).
struct BenchmarkSpec {
    std::string method;  // label: BE | SA | MA | DARL | NSA (free-form)
    std::string checkpoint_path;
    std::size_t n_episodes = 200;
    std::uint64_t seed_base = 1000;
    bool deterministic_policy = false;
};

struct EpisodeRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    arena::Outcome outcome = arena::Outcome::Failure;
    arena::Cause cause = arena::Cause::None;
    std::size_t steps = 0;
    double min_adversary_distance = 0.0;
    double return_evader = 0.0;
};

struct MethodResult {
    std::string method;
    std::size_t episodes = 0;
    std::size_t n_failure = 0, n_partial = 0, n_success = 0;

    double failure_pct() const;
    double partial_pct() const;
    double success_pct() const;
    /// 95% binomial half-width, in percentage points.
    double ci_half_width_pct(std::size_t count) const;
};

struct BenchmarkOutput {
    MethodResult result;
    std::vector<EpisodeRecord> episodes;
};

/// Runs the spec against a pre-loaded evader agent. Episode k derives all
/// its randomness from seed_base + k, so results are order-independent and
/// the episode loop parallelizes.
BenchmarkOutput run_benchmark(const BenchmarkSpec& spec, const sac::Agent& evader,
                              const arena::ArenaConfig& arena_cfg,
                              const heuristics::HeuristicConfig& heur_cfg);

/// Loads the checkpoint, refusing on env-hash mismatch.
BenchmarkOutput run_benchmark_from_file(const BenchmarkSpec& spec,
                                        const arena::ArenaConfig& arena_cfg,
                                        const heuristics::HeuristicConfig& heur_cfg,
                                        const std::string& env_hash);

struct ValidationCurvePoint {
    std::size_t training_step = 0;
    double success_pct = 0.0;
    double partial_pct = 0.0;
    double failure_pct = 0.0;
};

struct SweepEntry {
    std::size_t training_step = 0;
    std::string checkpoint_path;
};

/// Evaluates a series of checkpoints on a fixed battery (same seed base for
/// every point).
std::vector<ValidationCurvePoint> run_validation_sweep(const std::vector<SweepEntry>& series,
                                                       const arena::ArenaConfig& arena_cfg,
                                                       const heuristics::HeuristicConfig& heur_cfg,
                                                       const std::string& env_hash,
                                                       std::size_t battery_episodes,
                                                       std::uint64_t seed_base,
                                                       bool deterministic_policy);

/// Rendered text table plus machine-readable JSON, Table-1 style.
std::string render_table(const std::vector<MethodResult>& rows);
std::string results_json(const std::vector<MethodResult>& rows);

}  // namespace opev::evalharness
