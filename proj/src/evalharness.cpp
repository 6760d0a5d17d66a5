#include "opev/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "opev/checkpoint.hpp"
#include "opev/errors.hpp"

namespace opev::evalharness {

using arena::Arena;
using arena::StepResult;
using arena::Vec3;
using heuristics::HeuristicConfig;
using heuristics::HeuristicState;
using heuristics::Variant;
using sac::Agent;

double MethodResult::failure_pct() const {
    return episodes ? 100.0 * static_cast<double>(n_failure) / static_cast<double>(episodes) : 0.0;
}
double MethodResult::partial_pct() const {
    return episodes ? 100.0 * static_cast<double>(n_partial) / static_cast<double>(episodes) : 0.0;
}
double MethodResult::success_pct() const {
    return episodes ? 100.0 * static_cast<double>(n_success) / static_cast<double>(episodes) : 0.0;
}

double MethodResult::ci_half_width_pct(std::size_t count) const {
    if (episodes == 0) return 0.0;
    const double n = static_cast<double>(episodes);
    const double p = static_cast<double>(count) / n;
    return 100.0 * 1.96 * std::sqrt(p * (1.0 - p) / n);
}

namespace {

Vec3 to_vec3(const std::vector<double>& a) { return {{a[0], a[1], a[2]}}; }

EpisodeRecord play_episode(std::size_t index, std::uint64_t episode_seed, Agent& evader,
                           Arena& arena, const HeuristicConfig& heur_cfg,
                           sac::SampleMode mode) {
    evader.reseed(derive_seed(episode_seed, 1));
    StepResult r = arena.reset_stage2(episode_seed);
    std::vector<double> obs = r.evader_obs.as_vector();

    HeuristicConfig collider_cfg = heur_cfg;
    collider_cfg.variant = Variant::Collider;
    HeuristicConfig blocker_cfg = heur_cfg;
    blocker_cfg.variant = Variant::Blocker;
    std::array<HeuristicState, 2> hstate;

    EpisodeRecord rec;
    rec.index = index;
    rec.seed = episode_seed;
    rec.min_adversary_distance = std::numeric_limits<double>::infinity();

    while (!arena.finished()) {
        const auto act = evader.sample_action(obs, mode);
        const Vec3 a0 = heuristics::heuristic_step(collider_cfg, hstate[0],
                                                   arena.adversary_observation(0),
                                                   arena.adversary(0), arena.config().body);
        const Vec3 a1 = heuristics::heuristic_step(blocker_cfg, hstate[1],
                                                   arena.adversary_observation(1),
                                                   arena.adversary(1), arena.config().body);
        r = arena.step(to_vec3(act.action), {a0, a1});
        obs = r.evader_obs.as_vector();
        rec.return_evader += r.reward_evader;
        for (int i = 0; i < 2; ++i)
            rec.min_adversary_distance =
                std::min(rec.min_adversary_distance,
                         dynamics::norm(arena.adversary(i).position - arena.evader().position));
    }
    rec.outcome = r.outcome->outcome;
    rec.cause = r.outcome->cause;
    rec.steps = r.outcome->steps;
    return rec;
}

}  // namespace

BenchmarkOutput run_benchmark(const BenchmarkSpec& spec, const Agent& evader,
                              const arena::ArenaConfig& arena_cfg,
                              const HeuristicConfig& heur_cfg) {
    BenchmarkOutput out;
    out.result.method = spec.method;
    out.result.episodes = spec.n_episodes;
    out.episodes.resize(spec.n_episodes);

    HeuristicConfig hc = heur_cfg;
    hc.dt = arena_cfg.orbit.dt;
    const auto mode =
        spec.deterministic_policy ? sac::SampleMode::Deterministic : sac::SampleMode::Stochastic;

#pragma omp parallel
    {
        Agent local = evader;
        Arena arena(arena_cfg);
#pragma omp for schedule(dynamic)
        for (std::size_t k = 0; k < spec.n_episodes; ++k)
            out.episodes[k] = play_episode(k, spec.seed_base + k, local, arena, hc, mode);
    }

    for (const EpisodeRecord& rec : out.episodes) {
        switch (rec.outcome) {
            case arena::Outcome::Success: ++out.result.n_success; break;
            case arena::Outcome::Partial: ++out.result.n_partial; break;
            case arena::Outcome::Failure: ++out.result.n_failure; break;
        }
    }
    return out;
}

BenchmarkOutput run_benchmark_from_file(const BenchmarkSpec& spec,
                                        const arena::ArenaConfig& arena_cfg,
                                        const HeuristicConfig& heur_cfg,
                                        const std::string& env_hash) {
    checkpoint::AgentFile f = checkpoint::load_agent(spec.checkpoint_path);
    if (f.env_config_hash != env_hash)
        throw CompatibilityError("run_benchmark: checkpoint env hash " + f.env_config_hash +
                          " does not match arena config hash " + env_hash);
    return run_benchmark(spec, f.agent, arena_cfg, heur_cfg);
}

std::vector<ValidationCurvePoint> run_validation_sweep(const std::vector<SweepEntry>& series,
                                                       const arena::ArenaConfig& arena_cfg,
                                                       const HeuristicConfig& heur_cfg,
                                                       const std::string& env_hash,
                                                       std::size_t battery_episodes,
                                                       std::uint64_t seed_base,
                                                       bool deterministic_policy) {
    std::vector<ValidationCurvePoint> points;
    for (const SweepEntry& entry : series) {
        BenchmarkSpec spec;
        spec.method = "step_" + std::to_string(entry.training_step);
        spec.checkpoint_path = entry.checkpoint_path;
        spec.n_episodes = battery_episodes;
        spec.seed_base = seed_base;  // fixed battery across the series
        spec.deterministic_policy = deterministic_policy;
        BenchmarkOutput out = run_benchmark_from_file(spec, arena_cfg, heur_cfg, env_hash);
        points.push_back({entry.training_step, out.result.success_pct(), out.result.partial_pct(),
                          out.result.failure_pct()});
    }
    return points;
}

std::string render_table(const std::vector<MethodResult>& rows) {
    std::ostringstream os;
    os << "Method | Failure (%) | Partial (%) | Success (%) | Episodes\n";
    os << "-------+-------------+-------------+-------------+---------\n";
    char buf[160];
    for (const MethodResult& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%-6s | %5.1f \xC2\xB1%4.1f | %5.1f \xC2\xB1%4.1f | %5.1f \xC2\xB1%4.1f | %zu\n",
                      r.method.c_str(), r.failure_pct(), r.ci_half_width_pct(r.n_failure),
                      r.partial_pct(), r.ci_half_width_pct(r.n_partial), r.success_pct(),
                      r.ci_half_width_pct(r.n_success), r.episodes);
        os << buf;
    }
    return os.str();
}

std::string results_json(const std::vector<MethodResult>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const MethodResult& r : rows) {
        j.push_back({{"method", r.method},
                     {"episodes", r.episodes},
                     {"failure_count", r.n_failure},
                     {"partial_count", r.n_partial},
                     {"success_count", r.n_success},
                     {"failure_pct", r.failure_pct()},
                     {"partial_pct", r.partial_pct()},
                     {"success_pct", r.success_pct()},
                     {"failure_ci95_pct", r.ci_half_width_pct(r.n_failure)},
                     {"partial_ci95_pct", r.ci_half_width_pct(r.n_partial)},
                     {"success_ci95_pct", r.ci_half_width_pct(r.n_success)}});
    }
    return j.dump(2);
}

}  // namespace opev::evalharness
