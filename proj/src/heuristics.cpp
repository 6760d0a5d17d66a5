#include "opev/heuristics.hpp"

#include <cmath>

#include "opev/errors.hpp"

namespace opev::heuristics {

void HeuristicConfig::validate() const {
    if (replan_interval < 1) throw ValidationError("HeuristicConfig: replan_interval >= 1");
    if (!(k_p > 0.0) || !(k_d > 0.0)) throw ValidationError("HeuristicConfig: gains must be > 0");
}

Vec3 h_select_target(const HeuristicConfig& cfg, const AdversaryObservation& obs,
                     const SpacecraftState& own_state,
                     const std::optional<Vec3>& prev_evader_pos) {
    const Vec3 evader_abs = own_state.position + obs.evader_relative;
    const Vec3 goal_abs = own_state.position + obs.goal_relative;

    if (cfg.variant == Variant::Collider) {
        Vec3 v_est{0, 0, 0};
        if (prev_evader_pos)
            v_est = (1.0 / cfg.dt) * (evader_abs - *prev_evader_pos);
        return evader_abs + cfg.lead_time * v_est;
    }

    // Blocker: stand on the evader-to-goal segment, `standoff` from the evader.
    const Vec3 seg = goal_abs - evader_abs;
    const double len = dynamics::norm(seg);
    if (len <= cfg.standoff) return goal_abs;
    return evader_abs + (cfg.standoff / len) * seg;
}

ThrustCommand c_control(const Vec3& target, const SpacecraftState& own_state,
                        const BodyParams& body, const HeuristicConfig& cfg) {
    const Vec3 err = target - own_state.position;
    const Vec3 accel = cfg.k_p * err - cfg.k_d * own_state.velocity;
    const Vec3 thrust = body.mass * accel;
    Vec3 cmd;
    for (int i = 0; i < 3; ++i) cmd[i] = thrust[i] / body.max_thrust_per_axis;
    return dynamics::clamp_thrust(cmd, body);
}

Vec3 heuristic_step(const HeuristicConfig& cfg, HeuristicState& state,
                    const AdversaryObservation& obs, const SpacecraftState& own_state,
                    const BodyParams& body) {
    cfg.validate();
    if (!state.has_target || state.steps_since_replan >= cfg.replan_interval) {
        state.target = h_select_target(cfg, obs, own_state, state.prev_evader_pos);
        state.steps_since_replan = 0;
        state.has_target = true;
    }
    ++state.steps_since_replan;
    state.prev_evader_pos = own_state.position + obs.evader_relative;

    const ThrustCommand cmd = c_control(state.target, own_state, body, cfg);
    Vec3 action;
    for (int i = 0; i < 3; ++i) action[i] = cmd.thrust[i] / body.max_thrust_per_axis;
    return action;
}

}  // namespace opev::heuristics
