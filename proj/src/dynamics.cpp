#include "opev/dynamics.hpp"

#include <cmath>

namespace opev::dynamics {

double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 unit(const Vec3& a) {
    const double n = norm(a);
    if (n < 1e-12) return {0, 0, 0};
    return (1.0 / n) * a;
}

bool SpacecraftState::finite() const {
    for (int i = 0; i < 3; ++i)
        if (!std::isfinite(position[i]) || !std::isfinite(velocity[i])) return false;
    return true;
}

void BodyParams::validate() const {
    if (!(mass > 0.0)) throw ValidationError("BodyParams: mass must be > 0");
    if (!(max_thrust_per_axis > 0.0)) throw ValidationError("BodyParams: max thrust must be > 0");
}

void OrbitParams::validate() const {
    if (!(mean_motion >= 0.0)) throw ValidationError("OrbitParams: mean_motion must be >= 0");
    if (!(dt > 0.0)) throw ValidationError("OrbitParams: dt must be > 0");
}

namespace {

// 1 - cos(x) without cancellation.
inline double one_minus_cos(double x) {
    const double s = std::sin(0.5 * x);
    return 2.0 * s * s;
}

// x - sin(x); series below the cancellation regime.
inline double x_minus_sin(double x) {
    if (std::fabs(x) < 1e-2) {
        const double x2 = x * x;
        return x * x2 * (1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0);
    }
    return x - std::sin(x);
}

}  // namespace

TransitionMatrices cw_transition_matrices(const OrbitParams& orbit) {
    orbit.validate();
    const double t = orbit.dt;
    const double n = orbit.mean_motion;
    TransitionMatrices tm;

    if (n == 0.0) {
        // Double-integrator limit.
        for (int i = 0; i < 6; ++i) tm.phi[i][i] = 1.0;
        for (int i = 0; i < 3; ++i) {
            tm.phi[i][i + 3] = t;
            tm.gamma[i][i] = 0.5 * t * t;
            tm.gamma[i + 3][i] = t;
        }
        return tm;
    }

    const double nt = n * t;
    const double s = std::sin(nt);
    const double c = std::cos(nt);
    const double omc = one_minus_cos(nt);   // 1 - cos(nt)
    const double xms = x_minus_sin(nt);     // nt - sin(nt)
    const double n2 = n * n;

    // In-plane (x, y) block.
    tm.phi[0][0] = 4.0 - 3.0 * c;
    tm.phi[0][3] = s / n;
    tm.phi[0][4] = 2.0 * omc / n;
    tm.phi[1][0] = -6.0 * xms;
    tm.phi[1][1] = 1.0;
    tm.phi[1][3] = -2.0 * omc / n;
    tm.phi[1][4] = (4.0 * s - 3.0 * nt) / n;
    tm.phi[3][0] = 3.0 * n * s;
    tm.phi[3][3] = c;
    tm.phi[3][4] = 2.0 * s;
    tm.phi[4][0] = -6.0 * n * omc;
    tm.phi[4][3] = -2.0 * s;
    tm.phi[4][4] = 4.0 * c - 3.0;
    // Out-of-plane (z) block.
    tm.phi[2][2] = c;
    tm.phi[2][5] = s / n;
    tm.phi[5][2] = -n * s;
    tm.phi[5][5] = c;

    // Convolution of the flow with a constant acceleration over [0, dt].
    tm.gamma[0][0] = omc / n2;
    tm.gamma[0][1] = 2.0 * xms / n2;
    tm.gamma[1][0] = -2.0 * xms / n2;
    tm.gamma[1][1] = 4.0 * omc / n2 - 1.5 * t * t;
    tm.gamma[2][2] = omc / n2;
    tm.gamma[3][0] = s / n;
    tm.gamma[3][1] = 2.0 * omc / n;
    tm.gamma[4][0] = -2.0 * omc / n;
    tm.gamma[4][1] = 4.0 * s / n - 3.0 * t;
    tm.gamma[5][2] = s / n;

    return tm;
}

SpacecraftState cw_step(const SpacecraftState& state, const ThrustCommand& thrust,
                        const BodyParams& body, const OrbitParams& orbit) {
    body.validate();
    if (!state.finite()) throw ValidationError("cw_step: non-finite state");
    for (double t : thrust.thrust)
        if (!std::isfinite(t)) throw ValidationError("cw_step: non-finite thrust");

    const TransitionMatrices tm = cw_transition_matrices(orbit);
    const std::array<double, 6> s{state.position[0], state.position[1], state.position[2],
                                  state.velocity[0], state.velocity[1], state.velocity[2]};
    const std::array<double, 3> a{thrust.thrust[0] / body.mass, thrust.thrust[1] / body.mass,
                                  thrust.thrust[2] / body.mass};
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 6; ++j) acc += tm.phi[i][j] * s[j];
        for (int j = 0; j < 3; ++j) acc += tm.gamma[i][j] * a[j];
        out[i] = acc;
    }
    return SpacecraftState{{out[0], out[1], out[2]}, {out[3], out[4], out[5]}};
}

ThrustCommand clamp_thrust(const Vec3& raw, const BodyParams& body) {
    body.validate();
    ThrustCommand cmd;
    for (int i = 0; i < 3; ++i) {
        if (std::isnan(raw[i])) throw ValidationError("clamp_thrust: NaN input");
        const double u = raw[i] < -1.0 ? -1.0 : (raw[i] > 1.0 ? 1.0 : raw[i]);
        cmd.thrust[i] = body.max_thrust_per_axis * u;
    }
    return cmd;
}

}  // namespace opev::dynamics
