#include "opev/arena.hpp"

#include <cmath>

#include "opev/errors.hpp"

namespace opev::arena {

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::Partial: return "partial";
        case Outcome::Failure: return "failure";
    }
    return "?";
}

std::string to_string(Cause c) {
    switch (c) {
        case Cause::None: return "none";
        case Cause::Collision: return "collision";
        case Cause::Success: return "success";
        case Cause::MaxSteps: return "max_steps";
        case Cause::OutOfBounds: return "out_of_bounds";
    }
    return "?";
}

std::string to_string(GamePhase p) { return p == GamePhase::Outbound ? "outbound" : "return"; }

void ArenaConfig::validate() const {
    body.validate();
    orbit.validate();
    sensor.validate();
    if (!(goal_radius > collision_radius && collision_radius > 0.0))
        throw ValidationError("ArenaConfig: need goal_radius > collision_radius > 0");
    if (max_steps == 0) throw ValidationError("ArenaConfig: max_steps must be > 0");
    if (!(goal_distance_mean > goal_radius)) throw ValidationError("ArenaConfig: goal too close");
}

std::vector<double> EvaderObservation::as_vector() const {
    std::vector<double> v = histogram;
    v.push_back(goal_relative[0]);
    v.push_back(goal_relative[1]);
    v.push_back(goal_relative[2]);
    return v;
}

std::vector<double> AdversaryObservation::as_vector() const {
    return {evader_relative[0],   evader_relative[1],   evader_relative[2],
            goal_relative[0],     goal_relative[1],     goal_relative[2],
            teammate_relative[0], teammate_relative[1], teammate_relative[2]};
}

std::size_t curriculum_obstacle_count(std::size_t step, std::size_t total_steps,
                                      std::size_t start_count, std::size_t end_count) {
    if (total_steps == 0 || step >= total_steps)
        return end_count;
    const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
    const double k = static_cast<double>(start_count) +
                     (static_cast<double>(end_count) - static_cast<double>(start_count)) * progress;
    return static_cast<std::size_t>(std::llround(k));
}

Arena::Arena(ArenaConfig cfg) : cfg_(std::move(cfg)), unit_sphere_(sensing::icosphere_cloud()) {
    cfg_.validate();
}

Vec3 Arena::sample_unit_dir() {
    // Uniform on the sphere.
    const double z = rng_.uniform(-1.0, 1.0);
    const double phi = rng_.uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

Vec3 Arena::sample_goal() {
    const double d = cfg_.goal_distance_mean *
                     (1.0 + cfg_.goal_jitter_frac * rng_.uniform(-1.0, 1.0));
    return d * sample_unit_dir();
}

namespace {

// Any unit vector orthogonal to `axis`.
Vec3 make_perp(const Vec3& axis) {
    Vec3 other = std::fabs(axis[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const double d = dynamics::dot(other, axis);
    return dynamics::unit(other - d * axis);
}

}  // namespace

void Arena::place_obstacles(std::size_t count) {
    obstacle_centers_.clear();
    const Vec3 axis = dynamics::unit(far_goal_ - start_);
    const double leg = dynamics::norm(far_goal_ - start_);
    const Vec3 e1 = make_perp(axis);
    const Vec3 e2{axis[1] * e1[2] - axis[2] * e1[1], axis[2] * e1[0] - axis[0] * e1[2],
                  axis[0] * e1[1] - axis[1] * e1[0]};
    // Obstacle surface keeps `obstacle_clearance` of room around start and goal.
    const double min_center_dist = cfg_.obstacle_clearance + cfg_.adversary_radius;

    for (std::size_t k = 0; k < count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const double along = rng_.uniform(0.1, 0.9) * leg;
            const double rad = cfg_.corridor_radius * std::sqrt(rng_.uniform());
            const double theta = rng_.uniform(0.0, 2.0 * M_PI);
            const Vec3 center = start_ + along * axis + (rad * std::cos(theta)) * e1 +
                                (rad * std::sin(theta)) * e2;
            if (dynamics::norm(center - start_) < min_center_dist) continue;
            if (dynamics::norm(center - far_goal_) < min_center_dist) continue;
            obstacle_centers_.push_back(center);
            placed = true;
        }
        if (!placed) throw PlacementError("reset_stage1: obstacle placement failed");
    }
}

void Arena::spawn_adversaries() {
    const Vec3 axis = dynamics::unit(far_goal_ - start_);
    const double leg = dynamics::norm(far_goal_ - start_);
    const Vec3 e1 = make_perp(axis);
    const Vec3 e2{axis[1] * e1[2] - axis[2] * e1[1], axis[2] * e1[0] - axis[0] * e1[2],
                  axis[0] * e1[1] - axis[1] * e1[0]};
    for (std::size_t i = 0; i < 2; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            const double frac = rng_.uniform(cfg_.spawn_axial_min, cfg_.spawn_axial_max);
            const double rad = cfg_.spawn_lateral_radius * std::sqrt(rng_.uniform());
            const double theta = rng_.uniform(0.0, 2.0 * M_PI);
            const Vec3 pos = start_ + (frac * leg) * axis + (rad * std::cos(theta)) * e1 +
                             (rad * std::sin(theta)) * e2;
            if (dynamics::norm(pos - evader_.position) < cfg_.spawn_min_evader_dist) continue;
            adversaries_[i] = SpacecraftState{pos, {0, 0, 0}};
            placed = true;
        }
        if (!placed) throw PlacementError("reset_stage2: adversary spawn failed");
    }
}

EvaderObservation Arena::reset_stage1(std::uint64_t seed, std::size_t n_obstacles) {
    rng_ = Rng(seed);
    mode_ = Mode::Stage1;
    evader_ = SpacecraftState{};
    adversaries_ = {};
    start_ = {0, 0, 0};
    far_goal_ = sample_goal();
    current_goal_ = far_goal_;
    leg_start_dist_ = std::max(1e-6, dynamics::norm(far_goal_ - start_));
    phase_ = GamePhase::Outbound;
    reached_outbound_ = false;
    finished_ = false;
    step_count_ = 0;
    place_obstacles(n_obstacles);
    return evader_observation();
}

StepResult Arena::reset_stage2(std::uint64_t seed) {
    rng_ = Rng(seed);
    mode_ = Mode::Stage2;
    evader_ = SpacecraftState{};
    obstacle_centers_.clear();
    start_ = {0, 0, 0};
    far_goal_ = sample_goal();
    current_goal_ = far_goal_;
    leg_start_dist_ = std::max(1e-6, dynamics::norm(far_goal_ - start_));
    phase_ = GamePhase::Outbound;
    reached_outbound_ = false;
    finished_ = false;
    step_count_ = 0;
    spawn_adversaries();

    StepResult r;
    r.evader_obs = evader_observation();
    r.adversary_obs = {adversary_observation(0), adversary_observation(1)};
    return r;
}

std::vector<sensing::PointCloud> Arena::sensed_clouds() const {
    std::vector<sensing::PointCloud> clouds;
    if (mode_ == Mode::Stage1) {
        clouds.reserve(obstacle_centers_.size());
        for (const Vec3& c : obstacle_centers_)
            clouds.push_back(sensing::place_sphere(unit_sphere_, c, cfg_.adversary_radius));
    } else {
        clouds.reserve(2);
        for (const auto& adv : adversaries_)
            clouds.push_back(
                sensing::place_sphere(unit_sphere_, adv.position, cfg_.adversary_radius));
    }
    return clouds;
}

EvaderObservation Arena::evader_observation() const {
    EvaderObservation obs;
    obs.histogram =
        sensing::flatten(sensing::build_histogram(evader_.position, sensed_clouds(), cfg_.sensor));
    obs.goal_relative = current_goal_ - evader_.position;
    return obs;
}

AdversaryObservation Arena::adversary_observation(std::size_t i) const {
    AdversaryObservation obs;
    const Vec3& own = adversaries_[i].position;
    obs.evader_relative = evader_.position - own;
    obs.goal_relative = current_goal_ - own;
    obs.teammate_relative = adversaries_[1 - i].position - own;
    return obs;
}

StepResult Arena::step(const Vec3& evader_action, const std::array<Vec3, 2>& adversary_actions) {
    if (finished_) throw StateError("Arena::step: episode already finished");
    for (double a : evader_action)
        if (std::isnan(a)) throw ValidationError("Arena::step: NaN evader action");

    evader_ = dynamics::cw_step(evader_, dynamics::clamp_thrust(evader_action, cfg_.body),
                                cfg_.body, cfg_.orbit);
    if (mode_ == Mode::Stage2) {
        for (std::size_t i = 0; i < 2; ++i) {
            for (double a : adversary_actions[i])
                if (std::isnan(a)) throw ValidationError("Arena::step: NaN adversary action");
            adversaries_[i] =
                dynamics::cw_step(adversaries_[i], dynamics::clamp_thrust(adversary_actions[i], cfg_.body),
                                  cfg_.body, cfg_.orbit);
        }
    }
    ++step_count_;

    // Continuous rewards use the leg active during this step.
    const double dist_goal = dynamics::norm(current_goal_ - evader_.position);
    const double cont = dist_goal / leg_start_dist_;
    StepResult r;
    r.reward_evader = -cont;
    r.reward_adversary = cont;

    Cause cause = Cause::None;

    // Collision first: an impact inside the goal sphere is still a loss.
    const double hit_dist = collision_center_distance();
    if (mode_ == Mode::Stage2) {
        for (const auto& adv : adversaries_)
            if (dynamics::norm(adv.position - evader_.position) < hit_dist) cause = Cause::Collision;
    } else {
        for (const Vec3& c : obstacle_centers_)
            if (dynamics::norm(c - evader_.position) < hit_dist) cause = Cause::Collision;
    }

    bool phase_flip = false;
    if (cause == Cause::None && dist_goal <= cfg_.goal_radius) {
        r.reward_evader += cfg_.r_goal;
        r.reward_adversary -= cfg_.r_goal;
        if (mode_ == Mode::Stage2 && phase_ == GamePhase::Outbound) {
            reached_outbound_ = true;
            phase_flip = true;
        } else {
            // Stage-1 single goal, or the return goal: terminal success.
            reached_outbound_ = reached_outbound_ || phase_ == GamePhase::Outbound;
            cause = Cause::Success;
        }
    }

    if (cause == Cause::Collision) {
        r.reward_evader -= cfg_.r_fail;
        r.reward_adversary += cfg_.r_catch;
        r.terminated = true;
    } else if (cause == Cause::Success) {
        r.terminated = true;
    } else if (dynamics::norm(evader_.position) > cfg_.out_of_bounds_radius) {
        cause = Cause::OutOfBounds;
        r.reward_evader -= cfg_.r_fail;
        r.truncated = true;
    } else if (step_count_ >= cfg_.max_steps) {
        cause = Cause::MaxSteps;
        r.reward_evader -= cfg_.r_fail;
        r.truncated = true;
    }

    if (phase_flip) {
        phase_ = GamePhase::Return;
        current_goal_ = start_;
        leg_start_dist_ = std::max(1e-6, dynamics::norm(start_ - evader_.position));
    }

    if (r.done()) {
        finished_ = true;
        EpisodeOutcome out;
        out.cause = cause;
        out.steps = step_count_;
        if (cause == Cause::Success)
            out.outcome = (mode_ == Mode::Stage1 || reached_outbound_) ? Outcome::Success
                                                                       : Outcome::Failure;
        else
            out.outcome = reached_outbound_ ? Outcome::Partial : Outcome::Failure;
        r.outcome = out;
    }

    r.evader_obs = evader_observation();
    if (mode_ == Mode::Stage2)
        r.adversary_obs = {adversary_observation(0), adversary_observation(1)};
    return r;
}

}  // namespace opev::arena
