#include "opev/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "opev/errors.hpp"

namespace opev::config {

using nlohmann::json;

RunConfig defaults_for(const std::string& profile) {
    RunConfig cfg;
    cfg.profile = profile;
    if (profile == "full") {
        // Paper-scale budgets.
        cfg.trainer.schedule.stage1_steps = 1000000;
        cfg.trainer.schedule.phase1_steps = 500000;
        cfg.trainer.schedule.phase2_steps = 500000;
        cfg.trainer.schedule.eval_every = 25000;
        cfg.trainer.schedule.checkpoint_every = 50000;
        cfg.trainer.schedule.trace_every = 500;
        cfg.trainer.evader_sac.hidden_width = 256;
        cfg.trainer.adversary_sac.hidden_width = 256;
        cfg.trainer.evader_sac.batch_size = 256;
        cfg.trainer.adversary_sac.batch_size = 256;
        cfg.trainer.evader_sac.buffer_capacity = 500000;
        cfg.trainer.adversary_sac.buffer_capacity = 500000;
        cfg.trainer.evader_sac.warmup_steps = 5000;
        cfg.trainer.adversary_sac.warmup_steps = 5000;
    } else if (profile == "desk") {
        // Minutes-scale budgets for CI and the acceptance suite.
        cfg.trainer.schedule.stage1_steps = 30000;
        cfg.trainer.schedule.phase1_steps = 8000;
        cfg.trainer.schedule.phase2_steps = 8000;
        cfg.trainer.schedule.eval_every = 10000;
        cfg.trainer.schedule.eval_episodes = 50;
        cfg.trainer.schedule.checkpoint_every = 2000;
        cfg.trainer.schedule.trace_every = 50;
        cfg.trainer.schedule.probe_states = 256;
        cfg.trainer.evader_sac.hidden_width = 128;
        cfg.trainer.adversary_sac.hidden_width = 128;
        cfg.trainer.evader_sac.batch_size = 128;
        cfg.trainer.adversary_sac.batch_size = 128;
        cfg.trainer.evader_sac.buffer_capacity = 60000;
        cfg.trainer.adversary_sac.buffer_capacity = 60000;
        cfg.trainer.evader_sac.warmup_steps = 1500;
        cfg.trainer.adversary_sac.warmup_steps = 1000;
        cfg.trainer.arena.obstacles_start = 0;
        cfg.trainer.arena.obstacles_end = 1;
        cfg.eval.n_episodes = 200;
        cfg.eval.sweep_battery = 60;
    } else {
        throw ConfigError("unknown profile: " + profile + " (expected desk or full)");
    }
    cfg.trainer.evader_sac.target_entropy = -6.0;  // -2 * action_dim
    cfg.trainer.adversary_sac.target_entropy = -6.0;
    return cfg;
}

namespace {

json sac_to_json(const sac::SacConfig& c) {
    return json{{"gamma", c.gamma},
                {"tau", c.tau},
                {"lr", c.lr},
                {"batch_size", c.batch_size},
                {"buffer_capacity", c.buffer_capacity},
                {"warmup_steps", c.warmup_steps},
                {"update_every", c.update_every},
                {"target_entropy", c.target_entropy},
                {"hidden_width", c.hidden_width},
                {"hidden_depth", c.hidden_depth},
                {"hidden_act", nn::act_name(c.hidden_act)},
                {"mean_act", nn::act_name(c.mean_act)},
                {"log_std_min", c.log_std_min},
                {"log_std_max", c.log_std_max},
                {"clip_norm", c.clip_norm},
                {"init_log_alpha", c.init_log_alpha}};
}

sac::SacConfig sac_from_json(const json& j) {
    sac::SacConfig c;
    c.gamma = j.at("gamma").get<double>();
    c.tau = j.at("tau").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
    c.warmup_steps = j.at("warmup_steps").get<std::size_t>();
    c.update_every = j.at("update_every").get<std::size_t>();
    c.target_entropy = j.at("target_entropy").get<double>();
    c.hidden_width = j.at("hidden_width").get<std::size_t>();
    c.hidden_depth = j.at("hidden_depth").get<std::size_t>();
    c.hidden_act = nn::act_from_name(j.at("hidden_act").get<std::string>());
    c.mean_act = nn::act_from_name(j.at("mean_act").get<std::string>());
    c.log_std_min = j.at("log_std_min").get<double>();
    c.log_std_max = j.at("log_std_max").get<double>();
    c.clip_norm = j.at("clip_norm").get<double>();
    c.init_log_alpha = j.at("init_log_alpha").get<double>();
    return c;
}

}  // namespace

json to_json(const RunConfig& cfg) {
    const auto& a = cfg.trainer.arena;
    json j;
    j["profile"] = cfg.profile;
    j["seed"] = cfg.seed;
    j["dynamics"] = {{"mean_motion", a.orbit.mean_motion},
                     {"dt", a.orbit.dt},
                     {"mass", a.body.mass},
                     {"max_thrust_per_axis", a.body.max_thrust_per_axis}};
    j["sensor"] = {{"range", a.sensor.range},
                   {"bins_az", a.sensor.bins_az},
                   {"bins_el", a.sensor.bins_el}};
    j["arena"] = {{"goal_distance_mean", a.goal_distance_mean},
                  {"goal_jitter_frac", a.goal_jitter_frac},
                  {"goal_radius", a.goal_radius},
                  {"collision_radius", a.collision_radius},
                  {"adversary_radius", a.adversary_radius},
                  {"max_steps", a.max_steps},
                  {"out_of_bounds_radius", a.out_of_bounds_radius},
                  {"obstacles_start", a.obstacles_start},
                  {"obstacles_end", a.obstacles_end},
                  {"corridor_radius", a.corridor_radius},
                  {"obstacle_clearance", a.obstacle_clearance},
                  {"spawn_axial_min", a.spawn_axial_min},
                  {"spawn_axial_max", a.spawn_axial_max},
                  {"spawn_lateral_radius", a.spawn_lateral_radius},
                  {"spawn_min_evader_dist", a.spawn_min_evader_dist},
                  {"r_goal", a.r_goal},
                  {"r_fail", a.r_fail},
                  {"r_catch", a.r_catch}};
    j["evader_sac"] = sac_to_json(cfg.trainer.evader_sac);
    j["adversary_sac"] = sac_to_json(cfg.trainer.adversary_sac);
    j["divergence"] = {{"n_adversaries", cfg.trainer.divergence.n_adversaries},
                       {"c_kl", cfg.trainer.divergence.c_kl},
                       {"alpha_start", cfg.trainer.divergence.alpha_start},
                       {"alpha_end", cfg.trainer.divergence.alpha_end}};
    const auto& s = cfg.trainer.schedule;
    j["schedule"] = {{"stage1_steps", s.stage1_steps},
                     {"phase1_steps", s.phase1_steps},
                     {"phase2_steps", s.phase2_steps},
                     {"eval_every", s.eval_every},
                     {"eval_episodes", s.eval_episodes},
                     {"final_eval_episodes", s.final_eval_episodes},
                     {"checkpoint_every", s.checkpoint_every},
                     {"trace_every", s.trace_every},
                     {"log_every", s.log_every},
                     {"probe_states", s.probe_states}};
    const auto& h = cfg.heuristics;
    j["heuristics"] = {{"replan_interval", h.replan_interval},
                       {"k_p", h.k_p},
                       {"k_d", h.k_d},
                       {"lead_time", h.lead_time},
                       {"standoff", h.standoff}};
    j["eval"] = {{"n_episodes", cfg.eval.n_episodes},
                 {"seed_base", cfg.eval.seed_base},
                 {"deterministic_policy", cfg.eval.deterministic_policy},
                 {"sweep_battery", cfg.eval.sweep_battery}};
    return j;
}

RunConfig from_json(const json& j) {
    RunConfig cfg;
    cfg.profile = j.at("profile").get<std::string>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    auto& a = cfg.trainer.arena;
    const json& d = j.at("dynamics");
    a.orbit.mean_motion = d.at("mean_motion").get<double>();
    a.orbit.dt = d.at("dt").get<double>();
    a.body.mass = d.at("mass").get<double>();
    a.body.max_thrust_per_axis = d.at("max_thrust_per_axis").get<double>();
    const json& sn = j.at("sensor");
    a.sensor.range = sn.at("range").get<double>();
    a.sensor.bins_az = sn.at("bins_az").get<std::size_t>();
    a.sensor.bins_el = sn.at("bins_el").get<std::size_t>();
    const json& ar = j.at("arena");
    a.goal_distance_mean = ar.at("goal_distance_mean").get<double>();
    a.goal_jitter_frac = ar.at("goal_jitter_frac").get<double>();
    a.goal_radius = ar.at("goal_radius").get<double>();
    a.collision_radius = ar.at("collision_radius").get<double>();
    a.adversary_radius = ar.at("adversary_radius").get<double>();
    a.max_steps = ar.at("max_steps").get<std::size_t>();
    a.out_of_bounds_radius = ar.at("out_of_bounds_radius").get<double>();
    a.obstacles_start = ar.at("obstacles_start").get<std::size_t>();
    a.obstacles_end = ar.at("obstacles_end").get<std::size_t>();
    a.corridor_radius = ar.at("corridor_radius").get<double>();
    a.obstacle_clearance = ar.at("obstacle_clearance").get<double>();
    a.spawn_axial_min = ar.at("spawn_axial_min").get<double>();
    a.spawn_axial_max = ar.at("spawn_axial_max").get<double>();
    a.spawn_lateral_radius = ar.at("spawn_lateral_radius").get<double>();
    a.spawn_min_evader_dist = ar.at("spawn_min_evader_dist").get<double>();
    a.r_goal = ar.at("r_goal").get<double>();
    a.r_fail = ar.at("r_fail").get<double>();
    a.r_catch = ar.at("r_catch").get<double>();
    cfg.trainer.evader_sac = sac_from_json(j.at("evader_sac"));
    cfg.trainer.adversary_sac = sac_from_json(j.at("adversary_sac"));
    const json& dv = j.at("divergence");
    cfg.trainer.divergence.n_adversaries = dv.at("n_adversaries").get<std::size_t>();
    cfg.trainer.divergence.c_kl = dv.at("c_kl").get<double>();
    cfg.trainer.divergence.alpha_start = dv.at("alpha_start").get<double>();
    cfg.trainer.divergence.alpha_end = dv.at("alpha_end").get<double>();
    auto& s = cfg.trainer.schedule;
    const json& sc = j.at("schedule");
    s.stage1_steps = sc.at("stage1_steps").get<std::size_t>();
    s.phase1_steps = sc.at("phase1_steps").get<std::size_t>();
    s.phase2_steps = sc.at("phase2_steps").get<std::size_t>();
    s.eval_every = sc.at("eval_every").get<std::size_t>();
    s.eval_episodes = sc.at("eval_episodes").get<std::size_t>();
    s.final_eval_episodes = sc.at("final_eval_episodes").get<std::size_t>();
    s.checkpoint_every = sc.at("checkpoint_every").get<std::size_t>();
    s.trace_every = sc.at("trace_every").get<std::size_t>();
    s.log_every = sc.at("log_every").get<std::size_t>();
    s.probe_states = sc.at("probe_states").get<std::size_t>();
    const json& h = j.at("heuristics");
    cfg.heuristics.replan_interval = h.at("replan_interval").get<std::size_t>();
    cfg.heuristics.k_p = h.at("k_p").get<double>();
    cfg.heuristics.k_d = h.at("k_d").get<double>();
    cfg.heuristics.lead_time = h.at("lead_time").get<double>();
    cfg.heuristics.standoff = h.at("standoff").get<double>();
    cfg.heuristics.dt = a.orbit.dt;
    const json& ev = j.at("eval");
    cfg.eval.n_episodes = ev.at("n_episodes").get<std::size_t>();
    cfg.eval.seed_base = ev.at("seed_base").get<std::uint64_t>();
    cfg.eval.deterministic_policy = ev.at("deterministic_policy").get<bool>();
    cfg.eval.sweep_battery = ev.at("sweep_battery").get<std::size_t>();
    return cfg;
}

void merge_json(json& base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) {
        base = patch;
        return;
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it->is_object())
            merge_json(base[it.key()], *it);
        else
            base[it.key()] = *it;
    }
}

void apply_override(json& j, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be path=value: " + spec);
    const std::string path = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);

    json* cur = &j;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (!cur->contains(key))
            throw ConfigError("override path not found in config: " + path + " (at '" + key + "')");
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }

    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // plain string
    *cur = parsed;
}

RunConfig load_config(const std::string& path_or_empty, const std::vector<std::string>& overrides,
                      const std::string& profile_flag) {
    json file = json::object();
    if (!path_or_empty.empty()) {
        std::ifstream in(path_or_empty);
        if (!in) throw ConfigError("cannot open config file: " + path_or_empty);
        file = json::parse(in, nullptr, true, true);  // allow comments
        if (!file.is_object()) throw ConfigError("config root must be an object");
    }

    std::string profile = "desk";
    if (file.contains("profile")) profile = file.at("profile").get<std::string>();
    if (!profile_flag.empty()) profile = profile_flag;

    json j = to_json(defaults_for(profile));
    j["profile"] = profile;
    merge_json(j, file);
    j["profile"] = profile;
    for (const std::string& o : overrides) apply_override(j, o);
    return from_json(j);
}

std::string config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string env_config_hash(const RunConfig& cfg) {
    const json full = to_json(cfg);
    json env;
    env["dynamics"] = full.at("dynamics");
    env["sensor"] = full.at("sensor");
    env["arena"] = full.at("arena");
    return config_hash(env);
}

std::string full_config_hash(const RunConfig& cfg) { return config_hash(to_json(cfg)); }

void apply_method(RunConfig& cfg, const std::string& method) {
    auto& div = cfg.trainer.divergence;
    auto& adv = cfg.trainer.adversary_sac;
    if (method == "SA") {
        div.n_adversaries = 1;
        div.alpha_start = div.alpha_end = 0.0;
        adv.mean_act = nn::Act::Linear;
    } else if (method == "MA") {
        div.n_adversaries = 2;
        div.alpha_start = div.alpha_end = 0.0;
        adv.mean_act = nn::Act::Linear;
    } else if (method == "DARL" || method == "NSA") {
        div.n_adversaries = 2;
        if (div.alpha_start <= 0.0) div.alpha_start = 1.0;
        adv.mean_act = method == "DARL" ? nn::Act::Sine : nn::Act::Linear;
    } else {
        throw ConfigError("unknown method: " + method + " (expected SA, MA, DARL, or NSA)");
    }
}

void write_snapshot(const RunConfig& cfg, const std::string& run_dir) {
    std::filesystem::create_directories(run_dir);
    json j = to_json(cfg);
    j["env_config_hash"] = env_config_hash(cfg);
    j["config_hash"] = full_config_hash(cfg);
    std::ofstream out(run_dir + "/config.json");
    if (!out) throw IoError("cannot write config snapshot in " + run_dir);
    out << j.dump(2) << '\n';
}

}  // namespace opev::config
