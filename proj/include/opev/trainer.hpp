#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opev/arena.hpp"
#include "opev/divergence.hpp"
#include "opev/metrics.hpp"
#include "opev/sac.hpp"

namespace opev::trainer {

/// Step budgets for the three training legs and the logging cadences.
struct PhaseSchedule {
    std::size_t stage1_steps = 1000000;
    std::size_t phase1_steps = 500000;  // adversaries learn, evader frozen
    std::size_t phase2_steps = 500000;  // evader learns, adversaries frozen
    std::size_t eval_every = 25000;     // stage-1 periodic eval cadence (0 = off)
    std::size_t eval_episodes = 50;     // battery size for the periodic eval
    std::size_t final_eval_episodes = 200;
    std::size_t checkpoint_every = 0;   // phase-2 evader snapshots (0 = off)
    std::size_t trace_every = 0;        // save every k-th episode trace (0 = off)
    std::size_t log_every = 500;        // update-record cadence in the metrics log
    std::size_t probe_states = 512;     // sample size for the divergence diagnostics

    void validate() const;
};

struct TrainerConfig {
    arena::ArenaConfig arena;
    sac::SacConfig evader_sac;
    sac::SacConfig adversary_sac;
    divergence::DivergenceConfig divergence;
    PhaseSchedule schedule;
};

/// Network-boundary input scales: histogram entries are already in [0,1];
/// positional entries are divided by the mean goal distance.
std::vector<double> evader_obs_scale(const arena::ArenaConfig& cfg);
std::vector<double> adversary_obs_scale(const arena::ArenaConfig& cfg);

/// Success fraction of the agent on no-adversary single-goal episodes with
/// `n_obstacles` spheres, sampled stochastically. Episodes run in parallel;
/// episode k derives its seeds from seed_base + k, so the result is
/// independent of scheduling.
double eval_stage1_success(const sac::Agent& agent, const arena::ArenaConfig& cfg,
                           std::size_t n_obstacles, std::size_t episodes,
                           std::uint64_t seed_base);

struct Stage1Result {
    std::string checkpoint_path;
    double final_success_rate = 0.0;
    std::size_t episodes = 0;
};

/// Curriculum SAC training of the base evader on the static-obstacle
/// environment. Writes `evader_stage1.json` plus the metrics log.
Stage1Result run_stage1(const TrainerConfig& cfg, std::uint64_t seed, const std::string& run_dir,
                        const std::string& env_hash, metrics::JsonlLogger& log);

struct Stage2Result {
    std::vector<std::string> adversary_checkpoints;
    std::string evader_checkpoint;
    std::vector<std::vector<double>> divergence_matrix;  // on the saved probe states
    std::uint64_t evader_hash_phase1_start = 0;
    std::uint64_t evader_hash_phase1_end = 0;
    std::vector<std::uint64_t> adversary_hashes_phase2_start;
    std::vector<std::uint64_t> adversary_hashes_phase2_end;
    std::size_t episodes = 0;
};

/// The two-phase adversarial stage. Phase 1: each episode assigns one of n
/// adversary models to both adversary bodies; every model takes an RL step
/// and then a divergence step per update tick, sampling its own buffer; the
/// evader acts stochastically but stays frozen. Phase 2: adversaries freeze,
/// the evader retrains. Writes `adv_<i>_phase1.json`, `evader_final.json`,
/// `probe_states.csv`, and `audit.json`.
Stage2Result run_stage2(const std::string& stage1_checkpoint, const TrainerConfig& cfg,
                        std::uint64_t seed, const std::string& run_dir,
                        const std::string& env_hash, metrics::JsonlLogger& log);

/// Loads the probe-state matrix written by run_stage2.
sac::Tensor2 read_probe_states(const std::string& csv_path);

}  // namespace opev::trainer
