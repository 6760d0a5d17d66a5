#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opev/dynamics.hpp"
#include "opev/rng.hpp"
#include "opev/sensing.hpp"

namespace opev::arena {

using dynamics::BodyParams;
using dynamics::OrbitParams;
using dynamics::SpacecraftState;
using dynamics::Vec3;

enum class Mode { Stage1, Stage2 };
enum class GamePhase { Outbound, Return };
enum class Outcome { Success, Partial, Failure };
enum class Cause { None, Collision, Success, MaxSteps, OutOfBounds };

std::string to_string(Outcome o);
std::string to_string(Cause c);
std::string to_string(GamePhase p);

struct ArenaConfig {
    BodyParams body;                    // shared by evader and adversaries
    OrbitParams orbit;
    sensing::SensorConfig sensor;

    double goal_distance_mean = 40.0;   // m
    double goal_jitter_frac = 0.1;      // +-10% around the mean
    double goal_radius = 3.0;           // m, "reached" threshold
    double collision_radius = 1.0;      // m, evader point to obstacle surface
    double adversary_radius = 1.0;      // m, obstacle/adversary sphere radius
    std::size_t max_steps = 300;
    double out_of_bounds_radius = 150.0;

    // Stage-I curriculum endpoints and placement geometry.
    std::size_t obstacles_start = 1;
    std::size_t obstacles_end = 7;
    double corridor_radius = 8.0;       // obstacle lateral scatter around the start-goal axis
    double obstacle_clearance = 2.0;    // surface clearance kept around start and goal

    // Stage-II adversary spawn geometry: axial fraction of the leg, lateral scatter.
    double spawn_axial_min = 0.25;
    double spawn_axial_max = 0.75;
    double spawn_lateral_radius = 6.0;
    double spawn_min_evader_dist = 5.0;

    // Sparse reward constants; continuous part is the +-normalized goal distance.
    double r_goal = 10.0;
    double r_fail = 10.0;
    double r_catch = 10.0;

    void validate() const;
};

/// Evader observation: flattened histogram plus the current goal relative to
/// the evader, in meters.
struct EvaderObservation {
    std::vector<double> histogram;  // m*m entries in [0,1]
    Vec3 goal_relative{0, 0, 0};

    std::vector<double> as_vector() const;
    std::size_t dim() const { return histogram.size() + 3; }
};

/// Adversary observation: evader, the evader's current goal, and the
/// teammate, all relative to this adversary.
struct AdversaryObservation {
    Vec3 evader_relative{0, 0, 0};
    Vec3 goal_relative{0, 0, 0};
    Vec3 teammate_relative{0, 0, 0};

    std::vector<double> as_vector() const;
    static constexpr std::size_t dim() { return 9; }
};

struct EpisodeOutcome {
    Outcome outcome = Outcome::Failure;
    Cause cause = Cause::None;
    std::size_t steps = 0;
};

struct StepResult {
    EvaderObservation evader_obs;
    std::array<AdversaryObservation, 2> adversary_obs;  // stage 2 only
    double reward_evader = 0.0;
    double reward_adversary = 0.0;  // both adversaries receive this (team reward)
    bool terminated = false;        // terminal state: collision or final goal
    bool truncated = false;         // max steps or out of bounds
    std::optional<EpisodeOutcome> outcome;

    bool done() const { return terminated || truncated; }
};

/// Linear obstacle curriculum, rounded to the nearest integer count.
std::size_t curriculum_obstacle_count(std::size_t step, std::size_t total_steps,
                                      std::size_t start_count, std::size_t end_count);

class Arena {
public:
    explicit Arena(ArenaConfig cfg);

    /// Stage-I reset: evader at the origin, one goal ~goal_distance_mean out,
    /// `n_obstacles` static spheres scattered in the corridor.
    EvaderObservation reset_stage1(std::uint64_t seed, std::size_t n_obstacles);

    /// Stage-II reset: goal plus two adversaries spawned between evader and goal.
    StepResult reset_stage2(std::uint64_t seed);

    /// Advance one control step. Stage 1 ignores adversary actions.
    StepResult step(const Vec3& evader_action,
                    const std::array<Vec3, 2>& adversary_actions = {{{0, 0, 0}, {0, 0, 0}}});

    Mode mode() const { return mode_; }
    GamePhase phase() const { return phase_; }
    bool finished() const { return finished_; }
    std::size_t step_count() const { return step_count_; }
    bool reached_outbound() const { return reached_outbound_; }

    const SpacecraftState& evader() const { return evader_; }
    const SpacecraftState& adversary(std::size_t i) const { return adversaries_[i]; }
    const std::vector<Vec3>& obstacles() const { return obstacle_centers_; }
    const Vec3& current_goal() const { return current_goal_; }
    const Vec3& far_goal() const { return far_goal_; }
    const Vec3& start_point() const { return start_; }
    double leg_start_distance() const { return leg_start_dist_; }
    const ArenaConfig& config() const { return cfg_; }

    EvaderObservation evader_observation() const;
    AdversaryObservation adversary_observation(std::size_t i) const;

    /// Test hooks: overwrite a body's state (used to park a slot far away
    /// when a gate isolates the other heuristic, and to stage collision and
    /// reward edge cases).
    void set_adversary_state(std::size_t i, const SpacecraftState& s) { adversaries_[i] = s; }
    void set_evader_state(const SpacecraftState& s) { evader_ = s; }

    /// Center-to-center distance at which an adversary/obstacle sphere
    /// counts as a collision.
    double collision_center_distance() const {
        return cfg_.collision_radius + cfg_.adversary_radius;
    }

private:
    Vec3 sample_unit_dir();
    Vec3 sample_goal();
    void place_obstacles(std::size_t count);
    void spawn_adversaries();
    std::vector<sensing::PointCloud> sensed_clouds() const;

    ArenaConfig cfg_;
    Rng rng_;
    Mode mode_ = Mode::Stage1;
    GamePhase phase_ = GamePhase::Outbound;
    bool finished_ = true;
    bool reached_outbound_ = false;
    std::size_t step_count_ = 0;

    SpacecraftState evader_;
    std::array<SpacecraftState, 2> adversaries_;
    std::vector<Vec3> obstacle_centers_;

    Vec3 start_{0, 0, 0};
    Vec3 far_goal_{0, 0, 0};
    Vec3 current_goal_{0, 0, 0};
    double leg_start_dist_ = 1.0;

    sensing::PointCloud unit_sphere_;
};

}  // namespace opev::arena
