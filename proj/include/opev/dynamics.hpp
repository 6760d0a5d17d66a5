#pragma once

#include <array>

#include "opev/errors.hpp"

namespace opev::dynamics {

/// 3-vector in the local orbital frame.
struct Vec3 {
    double v[3]{0, 0, 0};

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
    double* begin() { return v; }
    double* end() { return v + 3; }
    const double* begin() const { return v; }
    const double* end() const { return v + 3; }
    bool operator==(const Vec3&) const = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {{a[0] + b[0], a[1] + b[1], a[2] + b[2]}}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {{a[0] - b[0], a[1] - b[1], a[2] - b[2]}}; }
inline Vec3 operator*(double s, const Vec3& a) { return {{s * a[0], s * a[1], s * a[2]}}; }
double norm(const Vec3& a);
double dot(const Vec3& a, const Vec3& b);
/// a/|a|, or {0,0,0} when |a| is (near) zero.
Vec3 unit(const Vec3& a);

/// Position and velocity of one body in the local orbital frame.
struct SpacecraftState {
    Vec3 position{0, 0, 0};  // meters
    Vec3 velocity{0, 0, 0};  // m/s

    bool finite() const;
};

struct BodyParams {
    double mass = 10.0;                 // kg
    double max_thrust_per_axis = 1.0;   // N

    void validate() const;
};

struct OrbitParams {
    double mean_motion = 1.13e-3;  // rad/s, reference orbit
    double dt = 1.0;               // s, one control step

    void validate() const;
};

struct ThrustCommand {
    Vec3 thrust{0, 0, 0};  // N, already clamped per axis
};

/// State-transition matrices for one step of the relative-motion dynamics
/// under constant acceleration: s' = Phi*s + Gamma*a, with s = [pos; vel]
/// and a the (thrust/mass) acceleration held over dt.
struct TransitionMatrices {
    std::array<std::array<double, 6>, 6> phi{};
    std::array<std::array<double, 3>, 6> gamma{};
};

TransitionMatrices cw_transition_matrices(const OrbitParams& orbit);

/// Closed-form propagation over one dt. Exact for the linearized dynamics
/// (no integration drift); at mean_motion = 0 it reduces to the
/// double-integrator update.
SpacecraftState cw_step(const SpacecraftState& state, const ThrustCommand& thrust,
                        const BodyParams& body, const OrbitParams& orbit);

/// Maps a policy output in [-1,1]^3 to physical thrust, clamping per axis.
ThrustCommand clamp_thrust(const Vec3& raw, const BodyParams& body);

}  // namespace opev::dynamics
