#pragma once

#include <optional>

#include "opev/arena.hpp"

namespace opev::heuristics {

using arena::AdversaryObservation;
using dynamics::BodyParams;
using dynamics::SpacecraftState;
using dynamics::ThrustCommand;
using dynamics::Vec3;

enum class Variant { Collider, Blocker };

struct HeuristicConfig {
    Variant variant = Variant::Collider;
    std::size_t replan_interval = 5;  // steps between h() calls
    double k_p = 0.08;
    double k_d = 0.6;
    double lead_time = 5.0;  // s, Collider's velocity-lead horizon
    double standoff = 5.0;   // m, Blocker's distance from the evader along the goal line
    double dt = 1.0;         // control step, for the velocity estimate

    void validate() const;
};

struct HeuristicState {
    Vec3 target{0, 0, 0};
    std::size_t steps_since_replan = 0;
    bool has_target = false;
    std::optional<Vec3> prev_evader_pos;  // absolute, for the backward-difference velocity
};

/// Picks the point the adversary should travel to. Collider: the evader's
/// position led by its estimated velocity. Blocker: the point on the
/// evader-to-goal segment `standoff` meters from the evader (clamped to the
/// goal).
Vec3 h_select_target(const HeuristicConfig& cfg, const AdversaryObservation& obs,
                     const SpacecraftState& own_state, const std::optional<Vec3>& prev_evader_pos);

/// PD law toward the target, converted to thrust and clamped per axis.
ThrustCommand c_control(const Vec3& target, const SpacecraftState& own_state,
                        const BodyParams& body, const HeuristicConfig& cfg);

/// One step of the heuristic: replan when due, always emit the PD action.
/// Returns the action as a policy-style command in [-1, 1]^3.
Vec3 heuristic_step(const HeuristicConfig& cfg, HeuristicState& state,
                    const AdversaryObservation& obs, const SpacecraftState& own_state,
                    const BodyParams& body);

}  // namespace opev::heuristics
