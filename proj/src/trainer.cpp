#include "opev/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "opev/checkpoint.hpp"
#include "opev/errors.hpp"
#include "opev/trace.hpp"

namespace opev::trainer {

using arena::Arena;
using arena::ArenaConfig;
using arena::StepResult;
using arena::Vec3;
using divergence::DivergenceConfig;
using nlohmann::json;
using sac::Agent;
using sac::Batch;
using sac::ReplayBuffer;
using sac::Tensor2;
using sac::Transition;

void PhaseSchedule::validate() const {
    if (stage1_steps == 0) throw ValidationError("PhaseSchedule: stage1_steps must be > 0");
}

std::vector<double> evader_obs_scale(const ArenaConfig& cfg) {
    const std::size_t hist = cfg.sensor.bins_az * cfg.sensor.bins_el;
    std::vector<double> scale(hist + 3, 1.0);
    const double s = 1.0 / cfg.goal_distance_mean;
    for (std::size_t i = hist; i < scale.size(); ++i) scale[i] = s;
    return scale;
}

std::vector<double> adversary_obs_scale(const ArenaConfig& cfg) {
    return std::vector<double>(9, 1.0 / cfg.goal_distance_mean);
}

namespace {

constexpr std::size_t kActionDim = 3;

Vec3 to_vec3(const std::vector<double>& a) { return {{a[0], a[1], a[2]}}; }

std::vector<double> random_action(Rng& rng) {
    return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Guard against silently training on a diverged run: a handful of skipped
// critic updates is tolerated, persistent non-finite targets are not.
void check_divergence(const Agent& agent, const char* where) {
    if (agent.skipped_updates() > 200)
        throw TrainingDiverged(std::string(where) + ": persistent non-finite critic targets");
}

struct EpisodeAccum {
    double return_evader = 0.0;
    double return_adversary = 0.0;
    std::size_t steps = 0;
    std::vector<trace::TraceRow> rows;
    bool tracing = false;
};

void maybe_write_trace(const std::string& run_dir, const std::string& stage, std::size_t episode,
                       const Arena& arena, const EpisodeAccum& acc, const StepResult& last,
                       const std::string& env_hash, std::uint64_t ep_seed) {
    if (!acc.tracing || !last.outcome) return;
    trace::TraceHeader h;
    h.mode = arena.mode() == arena::Mode::Stage1 ? "stage1" : "stage2";
    h.seed = ep_seed;
    h.config_hash = env_hash;
    h.outcome = to_string(last.outcome->outcome);
    h.cause = to_string(last.outcome->cause);
    h.steps = acc.rows.size();
    h.start = arena.start_point();
    h.far_goal = arena.far_goal();
    h.goal_radius = arena.config().goal_radius;
    h.collision_center_distance = arena.collision_center_distance();
    h.obstacles = arena.obstacles();
    std::filesystem::create_directories(run_dir + "/traces");
    std::ostringstream name;
    name << run_dir << "/traces/" << stage << "_ep" << episode;
    trace::write_trace(name.str(), h, acc.rows);
}

}  // namespace

double eval_stage1_success(const Agent& agent, const ArenaConfig& cfg, std::size_t n_obstacles,
                           std::size_t episodes, std::uint64_t seed_base) {
    std::vector<unsigned char> success(episodes, 0);
#pragma omp parallel
    {
        Agent local = agent;
        Arena arena(cfg);
#pragma omp for schedule(dynamic)
        for (std::size_t k = 0; k < episodes; ++k) {
            local.reseed(derive_seed(seed_base + k, 1));
            arena::EvaderObservation obs = arena.reset_stage1(derive_seed(seed_base + k, 2),
                                                              n_obstacles);
            std::vector<double> obs_vec = obs.as_vector();
            while (!arena.finished()) {
                const auto act = local.sample_action(obs_vec, sac::SampleMode::Stochastic);
                StepResult r = arena.step(to_vec3(act.action));
                obs_vec = r.evader_obs.as_vector();
                if (r.outcome && r.outcome->outcome == arena::Outcome::Success) success[k] = 1;
            }
        }
    }
    std::size_t wins = 0;
    for (unsigned char s : success) wins += s;
    return static_cast<double>(wins) / static_cast<double>(episodes);
}

Stage1Result run_stage1(const TrainerConfig& cfg, std::uint64_t seed, const std::string& run_dir,
                        const std::string& env_hash, metrics::JsonlLogger& log) {
    cfg.schedule.validate();
    cfg.divergence.validate();
    std::filesystem::create_directories(run_dir);

    const std::size_t obs_dim = cfg.arena.sensor.bins_az * cfg.arena.sensor.bins_el + 3;
    Agent evader(cfg.evader_sac, obs_dim, kActionDim, evader_obs_scale(cfg.arena),
                 derive_seed(seed, 0));
    ReplayBuffer buffer(cfg.evader_sac.buffer_capacity, obs_dim, kActionDim);
    Arena arena(cfg.arena);

    const PhaseSchedule& sched = cfg.schedule;
    std::size_t episode = 0;
    std::uint64_t ep_seed = 0;
    EpisodeAccum acc;
    std::vector<double> obs_vec;
    StepResult last;
    bool need_reset = true;

    log.log({{"type", "phase"}, {"name", "stage1"}, {"steps", sched.stage1_steps}});

    for (std::size_t step = 0; step < sched.stage1_steps; ++step) {
        if (need_reset) {
            const std::size_t n_obs = arena::curriculum_obstacle_count(
                step, sched.stage1_steps, cfg.arena.obstacles_start, cfg.arena.obstacles_end);
            ep_seed = derive_seed(seed, 1000000 + episode);
            obs_vec = arena.reset_stage1(ep_seed, n_obs).as_vector();
            acc = EpisodeAccum{};
            acc.tracing = sched.trace_every > 0 && episode % sched.trace_every == 0;
            need_reset = false;
        }

        std::vector<double> action = step < cfg.evader_sac.warmup_steps
                                         ? random_action(evader.rng())
                                         : evader.sample_action(obs_vec, sac::SampleMode::Stochastic).action;
        last = arena.step(to_vec3(action));

        Transition t;
        t.s = obs_vec;
        t.a = action;
        t.r = last.reward_evader;
        t.s2 = last.evader_obs.as_vector();
        t.d = last.terminated;
        buffer.push(t);
        obs_vec = t.s2;
        acc.return_evader += last.reward_evader;
        ++acc.steps;
        if (acc.tracing) {
            trace::TraceRow row;
            row.step = arena.step_count();
            row.phase = arena.phase();
            row.evader = arena.evader();
            row.evader_action = to_vec3(action);
            row.reward_evader = last.reward_evader;
            acc.rows.push_back(row);
        }

        if (step >= cfg.evader_sac.warmup_steps && buffer.size() >= cfg.evader_sac.batch_size &&
            step % cfg.evader_sac.update_every == 0) {
            Batch batch = buffer.sample(evader.rng(), cfg.evader_sac.batch_size);
            sac::UpdateStats stats = evader.update(batch);
            check_divergence(evader, "run_stage1");
            if (!std::isfinite(stats.actor_loss))
                throw TrainingDiverged("run_stage1: non-finite actor loss");
            if (sched.log_every > 0 && step % sched.log_every == 0)
                log.log({{"type", "update"},
                         {"stage", "stage1"},
                         {"step", step},
                         {"critic_loss", stats.critic_loss},
                         {"actor_loss", stats.actor_loss},
                         {"alpha_ent", stats.alpha},
                         {"entropy", stats.entropy_estimate}});
        }

        if (last.done()) {
            log.log({{"type", "episode"},
                     {"stage", "stage1"},
                     {"episode", episode},
                     {"step", step},
                     {"steps", acc.steps},
                     {"n_obstacles", arena.obstacles().size()},
                     {"outcome", to_string(last.outcome->outcome)},
                     {"cause", to_string(last.outcome->cause)},
                     {"return_evader", acc.return_evader}});
            maybe_write_trace(run_dir, "stage1", episode, arena, acc, last, env_hash, ep_seed);
            ++episode;
            need_reset = true;
        }

        if (sched.eval_every > 0 && step > 0 && step % sched.eval_every == 0) {
            const std::size_t n_obs = arena::curriculum_obstacle_count(
                step, sched.stage1_steps, cfg.arena.obstacles_start, cfg.arena.obstacles_end);
            const double rate = eval_stage1_success(evader, cfg.arena, n_obs,
                                                    sched.eval_episodes, derive_seed(seed, 5000 + step));
            log.log({{"type", "eval"},
                     {"stage", "stage1"},
                     {"step", step},
                     {"n_obstacles", n_obs},
                     {"success_rate", rate}});
        }
    }

    Stage1Result res;
    res.episodes = episode;
    res.checkpoint_path = run_dir + "/evader_stage1.json";
    checkpoint::save_agent(res.checkpoint_path, evader, "evader", env_hash);
    res.final_success_rate =
        eval_stage1_success(evader, cfg.arena, 0, sched.final_eval_episodes, derive_seed(seed, 9999));
    log.log({{"type", "eval"},
             {"stage", "stage1_final"},
             {"step", sched.stage1_steps},
             {"n_obstacles", 0},
             {"episodes", sched.final_eval_episodes},
             {"success_rate", res.final_success_rate}});
    log.flush();
    return res;
}

namespace {

void write_probe_states(const std::string& path, const Tensor2& states) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "o0,o1,o2,o3,o4,o5,o6,o7,o8\n";
    char buf[32];
    for (std::size_t r = 0; r < states.rows(); ++r) {
        for (std::size_t c = 0; c < states.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", states(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace

Tensor2 read_probe_states(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> data;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) data.push_back(std::stod(cell));
        ++rows;
    }
    if (rows == 0) throw IoError(csv_path + ": no probe states");
    const std::size_t cols = data.size() / rows;
    return Tensor2(rows, cols, std::move(data));
}

Stage2Result run_stage2(const std::string& stage1_checkpoint, const TrainerConfig& cfg,
                        std::uint64_t seed, const std::string& run_dir,
                        const std::string& env_hash, metrics::JsonlLogger& log) {
    cfg.schedule.validate();
    cfg.divergence.validate();
    std::filesystem::create_directories(run_dir);

    checkpoint::AgentFile evader_file = checkpoint::load_agent(stage1_checkpoint);
    if (evader_file.env_config_hash != env_hash)
        throw CompatibilityError("run_stage2: stage-1 checkpoint was trained on a different arena config (" +
                          evader_file.env_config_hash + " vs " + env_hash + ")");
    Agent& evader = evader_file.agent;

    const std::size_t n_models = cfg.divergence.n_adversaries;
    std::vector<Agent> adversaries;
    adversaries.reserve(n_models);
    for (std::size_t i = 0; i < n_models; ++i)
        adversaries.emplace_back(cfg.adversary_sac, arena::AdversaryObservation::dim(), kActionDim,
                                 adversary_obs_scale(cfg.arena), derive_seed(seed, 100 + i));
    std::vector<ReplayBuffer> buffers;
    for (std::size_t i = 0; i < n_models; ++i)
        buffers.emplace_back(cfg.adversary_sac.buffer_capacity, arena::AdversaryObservation::dim(),
                             kActionDim);

    Arena arena(cfg.arena);
    Rng pick_rng(derive_seed(seed, 50));
    const PhaseSchedule& sched = cfg.schedule;

    Stage2Result res;
    res.evader_hash_phase1_start = evader.param_hash();

    // ---- Phase 1: adversaries learn against the frozen evader ----
    log.log({{"type", "phase"}, {"name", "phase1"}, {"steps", sched.phase1_steps}, {"models", n_models}});

    std::size_t episode = 0;
    std::uint64_t ep_seed = 0;
    std::size_t active = 0;
    std::vector<std::size_t> ep_pushes(n_models, 0);
    EpisodeAccum acc;
    std::vector<double> ev_obs;
    std::array<std::vector<double>, 2> adv_obs;
    StepResult last;
    bool need_reset = true;
    bool exclusivity_ok = true;

    auto log_episode = [&](const char* stage, std::size_t step) {
        json pushes = json::array();
        for (std::size_t c : ep_pushes) pushes.push_back(c);
        log.log({{"type", "episode"},
                 {"stage", stage},
                 {"episode", episode},
                 {"step", step},
                 {"steps", acc.steps},
                 {"active_model", active},
                 {"buffer_pushes", pushes},
                 {"outcome", to_string(last.outcome->outcome)},
                 {"cause", to_string(last.outcome->cause)},
                 {"return_evader", acc.return_evader},
                 {"return_adversary", acc.return_adversary}});
    };

    for (std::size_t step = 0; step < sched.phase1_steps; ++step) {
        if (need_reset) {
            ep_seed = derive_seed(seed, 2000000 + episode);
            StepResult r0 = arena.reset_stage2(ep_seed);
            active = n_models == 1 ? 0 : pick_rng.below(n_models);
            ev_obs = r0.evader_obs.as_vector();
            adv_obs = {r0.adversary_obs[0].as_vector(), r0.adversary_obs[1].as_vector()};
            std::fill(ep_pushes.begin(), ep_pushes.end(), 0);
            acc = EpisodeAccum{};
            acc.tracing = sched.trace_every > 0 && episode % sched.trace_every == 0;
            need_reset = false;
        }

        // Frozen evader keeps acting stochastically: phase 2 will train
        // against the same action distribution.
        const auto ev_act = evader.sample_action(ev_obs, sac::SampleMode::Stochastic);
        std::array<std::vector<double>, 2> adv_act;
        for (std::size_t b = 0; b < 2; ++b)
            adv_act[b] = step < cfg.adversary_sac.warmup_steps
                             ? random_action(adversaries[active].rng())
                             : adversaries[active].sample_action(adv_obs[b], sac::SampleMode::Stochastic).action;

        last = arena.step(to_vec3(ev_act.action), {to_vec3(adv_act[0]), to_vec3(adv_act[1])});

        for (std::size_t b = 0; b < 2; ++b) {
            Transition t;
            t.s = adv_obs[b];
            t.a = adv_act[b];
            t.r = last.reward_adversary;
            t.s2 = last.adversary_obs[b].as_vector();
            t.d = last.terminated;
            buffers[active].push(t);
            ep_pushes[active] += 1;
            adv_obs[b] = t.s2;
        }
        ev_obs = last.evader_obs.as_vector();
        acc.return_evader += last.reward_evader;
        acc.return_adversary += last.reward_adversary;
        ++acc.steps;
        if (acc.tracing) {
            trace::TraceRow row;
            row.step = arena.step_count();
            row.phase = arena.phase();
            row.evader = arena.evader();
            row.adversaries = {arena.adversary(0), arena.adversary(1)};
            row.evader_action = to_vec3(ev_act.action);
            row.adversary_actions = {to_vec3(adv_act[0]), to_vec3(adv_act[1])};
            row.reward_evader = last.reward_evader;
            row.reward_adversary = last.reward_adversary;
            acc.rows.push_back(row);
        }

        const double alpha = divergence::alpha_at(step, sched.phase1_steps, cfg.divergence);
        if (step >= cfg.adversary_sac.warmup_steps && step % cfg.adversary_sac.update_every == 0) {
            for (std::size_t i = 0; i < n_models; ++i) {
                if (buffers[i].size() < cfg.adversary_sac.batch_size) continue;
                Batch batch = buffers[i].sample(adversaries[i].rng(), cfg.adversary_sac.batch_size);

                sac::ExtraLossFn hook = [&, i](const Tensor2& states,
                                               const sac::GaussianPolicyHead& own) {
                    std::vector<sac::GaussianPolicyHead> others;
                    others.reserve(n_models - 1);
                    for (std::size_t j = 0; j < n_models; ++j)
                        if (j != i) others.push_back(adversaries[j].policy_head(states));
                    divergence::DivergenceLoss dl =
                        divergence::divergence_loss(own, others, cfg.divergence.c_kl, alpha);
                    return sac::ExtraLoss{dl.value, std::move(dl.d_mean), std::move(dl.d_log_std)};
                };
                const bool use_hook = n_models >= 2 && alpha > 0.0;
                sac::UpdateStats stats = adversaries[i].update(batch, use_hook ? &hook : nullptr);
                check_divergence(adversaries[i], "run_stage2/phase1");
                if (sched.log_every > 0 && step % sched.log_every == 0)
                    log.log({{"type", "update"},
                             {"stage", "phase1"},
                             {"step", step},
                             {"model", i},
                             {"critic_loss", stats.critic_loss},
                             {"actor_loss", stats.actor_loss},
                             {"kl_loss", stats.extra_loss ? json(*stats.extra_loss) : json()},
                             {"divergence_alpha", alpha},
                             {"alpha_ent", stats.alpha},
                             {"entropy", stats.entropy_estimate}});
            }
        }

        if (last.done()) {
            log_episode("phase1", step);
            maybe_write_trace(run_dir, "phase1", episode, arena, acc, last, env_hash, ep_seed);
            ++episode;
            need_reset = true;
        }
    }
    if (!need_reset) {
        // Episode cut off by the phase boundary: still audit its pushes.
        for (std::size_t i = 0; i < n_models; ++i)
            if (i != active && ep_pushes[i] != 0) exclusivity_ok = false;
    }

    res.evader_hash_phase1_end = evader.param_hash();

    // Probe states for the divergence diagnostics: a uniform sample of all
    // adversary observations seen in phase 1.
    std::size_t stored_total = 0;
    for (const ReplayBuffer& buf : buffers) stored_total += buf.size();
    Tensor2 probes(std::min<std::size_t>(sched.probe_states, stored_total),
                   arena::AdversaryObservation::dim());
    {
        Rng probe_rng(derive_seed(seed, 60));
        for (std::size_t r = 0; r < probes.rows(); ++r) {
            std::size_t idx = probe_rng.below(stored_total);
            std::size_t which = 0;
            while (idx >= buffers[which].size()) {
                idx -= buffers[which].size();
                ++which;
            }
            const Transition t = buffers[which].get(idx);
            std::copy(t.s.begin(), t.s.end(), probes.row(r));
        }
    }
    if (probes.rows() > 0) write_probe_states(run_dir + "/probe_states.csv", probes);

    for (std::size_t i = 0; i < n_models; ++i) {
        const std::string path = run_dir + "/adv_" + std::to_string(i) + "_phase1.json";
        checkpoint::save_agent(path, adversaries[i], "adversary", env_hash);
        res.adversary_checkpoints.push_back(path);
    }

    if (probes.rows() > 0) {
        std::vector<const Agent*> ptrs;
        for (const Agent& a : adversaries) ptrs.push_back(&a);
        res.divergence_matrix = divergence::pairwise_policy_divergence(ptrs, probes);
        json m = json::array();
        for (const auto& row : res.divergence_matrix) m.push_back(row);
        log.log({{"type", "divergence"}, {"stage", "phase1_end"}, {"matrix", m}});
    } else {
        res.divergence_matrix.assign(n_models, std::vector<double>(n_models, 0.0));
    }

    // ---- Phase 2: evader retrains, adversaries frozen ----
    log.log({{"type", "phase"}, {"name", "phase2"}, {"steps", sched.phase2_steps}});
    for (const Agent& a : adversaries) res.adversary_hashes_phase2_start.push_back(a.param_hash());

    ReplayBuffer ev_buffer(cfg.evader_sac.buffer_capacity, evader.obs_dim(), kActionDim);
    need_reset = true;
    for (std::size_t step = 0; step < sched.phase2_steps; ++step) {
        if (need_reset) {
            ep_seed = derive_seed(seed, 3000000 + episode);
            StepResult r0 = arena.reset_stage2(ep_seed);
            active = n_models == 1 ? 0 : pick_rng.below(n_models);
            ev_obs = r0.evader_obs.as_vector();
            adv_obs = {r0.adversary_obs[0].as_vector(), r0.adversary_obs[1].as_vector()};
            std::fill(ep_pushes.begin(), ep_pushes.end(), 0);
            acc = EpisodeAccum{};
            acc.tracing = sched.trace_every > 0 && episode % sched.trace_every == 0;
            need_reset = false;
        }

        const auto ev_act = evader.sample_action(ev_obs, sac::SampleMode::Stochastic);
        std::array<std::vector<double>, 2> adv_act;
        for (std::size_t b = 0; b < 2; ++b)
            adv_act[b] = adversaries[active].sample_action(adv_obs[b], sac::SampleMode::Stochastic).action;

        last = arena.step(to_vec3(ev_act.action), {to_vec3(adv_act[0]), to_vec3(adv_act[1])});

        Transition t;
        t.s = ev_obs;
        t.a = ev_act.action;
        t.r = last.reward_evader;
        t.s2 = last.evader_obs.as_vector();
        t.d = last.terminated;
        ev_buffer.push(t);
        ev_obs = t.s2;
        for (std::size_t b = 0; b < 2; ++b) adv_obs[b] = last.adversary_obs[b].as_vector();
        acc.return_evader += last.reward_evader;
        acc.return_adversary += last.reward_adversary;
        ++acc.steps;
        if (acc.tracing) {
            trace::TraceRow row;
            row.step = arena.step_count();
            row.phase = arena.phase();
            row.evader = arena.evader();
            row.adversaries = {arena.adversary(0), arena.adversary(1)};
            row.evader_action = to_vec3(ev_act.action);
            row.adversary_actions = {to_vec3(adv_act[0]), to_vec3(adv_act[1])};
            row.reward_evader = last.reward_evader;
            row.reward_adversary = last.reward_adversary;
            acc.rows.push_back(row);
        }

        // The evader is pretrained, so it explores with its own policy; only
        // the update start is delayed while the buffer fills.
        if (step >= cfg.evader_sac.warmup_steps &&
            ev_buffer.size() >= cfg.evader_sac.batch_size &&
            step % cfg.evader_sac.update_every == 0) {
            Batch batch = ev_buffer.sample(evader.rng(), cfg.evader_sac.batch_size);
            sac::UpdateStats stats = evader.update(batch);
            check_divergence(evader, "run_stage2/phase2");
            if (sched.log_every > 0 && step % sched.log_every == 0)
                log.log({{"type", "update"},
                         {"stage", "phase2"},
                         {"step", step},
                         {"critic_loss", stats.critic_loss},
                         {"actor_loss", stats.actor_loss},
                         {"alpha_ent", stats.alpha},
                         {"entropy", stats.entropy_estimate}});
        }

        if (sched.checkpoint_every > 0 && step > 0 && step % sched.checkpoint_every == 0)
            checkpoint::save_agent(run_dir + "/evader_phase2_step_" + std::to_string(step) + ".json",
                                   evader, "evader", env_hash);

        if (last.done()) {
            log_episode("phase2", step);
            maybe_write_trace(run_dir, "phase2", episode, arena, acc, last, env_hash, ep_seed);
            ++episode;
            need_reset = true;
        }
    }

    for (const Agent& a : adversaries) res.adversary_hashes_phase2_end.push_back(a.param_hash());
    res.evader_checkpoint = run_dir + "/evader_final.json";
    checkpoint::save_agent(res.evader_checkpoint, evader, "evader", env_hash);
    res.episodes = episode;

    // Audit summary: freeze hashes plus the per-episode exclusivity verdict
    // (per-episode push counts live in the metrics log).
    json audit;
    audit["evader_hash_phase1_start"] = hash_hex(res.evader_hash_phase1_start);
    audit["evader_hash_phase1_end"] = hash_hex(res.evader_hash_phase1_end);
    audit["evader_frozen_phase1"] = res.evader_hash_phase1_start == res.evader_hash_phase1_end;
    json advs = json::array(), adve = json::array();
    bool adv_frozen = true;
    for (std::size_t i = 0; i < n_models; ++i) {
        advs.push_back(hash_hex(res.adversary_hashes_phase2_start[i]));
        adve.push_back(hash_hex(res.adversary_hashes_phase2_end[i]));
        adv_frozen &= res.adversary_hashes_phase2_start[i] == res.adversary_hashes_phase2_end[i];
    }
    audit["adversary_hashes_phase2_start"] = advs;
    audit["adversary_hashes_phase2_end"] = adve;
    audit["adversaries_frozen_phase2"] = adv_frozen;
    audit["episode_model_exclusivity_ok"] = exclusivity_ok;
    std::ofstream af(run_dir + "/audit.json");
    af << audit.dump(2) << '\n';

    log.log({{"type", "audit"},
             {"evader_frozen_phase1", res.evader_hash_phase1_start == res.evader_hash_phase1_end},
             {"adversaries_frozen_phase2", adv_frozen},
             {"episode_model_exclusivity_ok", exclusivity_ok}});
    log.flush();
    return res;
}

}  // namespace opev::trainer
