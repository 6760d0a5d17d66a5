#include "opev/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "opev/errors.hpp"

namespace opev::sensing {

void SensorConfig::validate() const {
    if (!(range > 0.0)) throw ValidationError("SensorConfig: range must be > 0");
    if (bins_az < 1 || bins_el < 1) throw ValidationError("SensorConfig: bins must be >= 1");
}

PolarHistogram build_histogram(const Vec3& sensor_origin, const std::vector<PointCloud>& clouds,
                               const SensorConfig& cfg) {
    cfg.validate();
    PolarHistogram h;
    h.bins_az = cfg.bins_az;
    h.bins_el = cfg.bins_el;
    h.values.assign(cfg.bins_az * cfg.bins_el, 1.0);

    const double az_width = 2.0 * M_PI / static_cast<double>(cfg.bins_az);
    const double el_width = M_PI / static_cast<double>(cfg.bins_el);

    for (const PointCloud& cloud : clouds) {
        for (const Vec3& p : cloud.points) {
            const Vec3 rel = p - sensor_origin;
            const double dist = dynamics::norm(rel);
            if (dist > cfg.range) continue;

            double az = 0.0, el = 0.0;
            if (dist > 0.0) {
                az = std::atan2(rel[1], rel[0]);          // (-pi, pi]
                if (az >= M_PI) az = -M_PI;               // fold the pi boundary
                el = std::asin(std::clamp(rel[2] / dist, -1.0, 1.0));
            }
            // else: coincident point, az = el = 0 by convention.

            std::size_t ai = static_cast<std::size_t>(std::floor((az + M_PI) / az_width));
            std::size_t ei = static_cast<std::size_t>(std::floor((el + 0.5 * M_PI) / el_width));
            if (ai >= cfg.bins_az) ai = cfg.bins_az - 1;  // el = +pi/2 folds into the top bin
            if (ei >= cfg.bins_el) ei = cfg.bins_el - 1;

            const double v = dist / cfg.range;
            double& bin = h.at(ei, ai);
            if (v < bin) bin = v;
        }
    }
    return h;
}

std::vector<double> flatten(const PolarHistogram& h) { return h.values; }

PolarHistogram unflatten(const std::vector<double>& flat, std::size_t bins_az, std::size_t bins_el) {
    if (flat.size() != bins_az * bins_el) throw DimensionError("unflatten: length mismatch");
    PolarHistogram h;
    h.bins_az = bins_az;
    h.bins_el = bins_el;
    h.values = flat;
    return h;
}

namespace {

using Key = std::array<std::int64_t, 3>;

Key quantize(const Vec3& v) {
    constexpr double q = 1e8;
    return {static_cast<std::int64_t>(std::llround(v[0] * q)),
            static_cast<std::int64_t>(std::llround(v[1] * q)),
            static_cast<std::int64_t>(std::llround(v[2] * q))};
}

}  // namespace

PointCloud icosphere_cloud() {
    // Icosahedron vertices.
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& v : verts) v = dynamics::unit(v);
    const int faces[20][3] = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    // Frequency-3 barycentric grid on each face, projected to the sphere and
    // deduplicated across shared edges: 12 + 30*2 + 20*1 = 92 vertices.
    constexpr int f = 3;
    std::map<Key, Vec3> unique;
    for (const auto& face : faces) {
        const Vec3& a = verts[face[0]];
        const Vec3& b = verts[face[1]];
        const Vec3& c = verts[face[2]];
        for (int i = 0; i <= f; ++i) {
            for (int j = 0; j <= f - i; ++j) {
                const int k = f - i - j;
                const Vec3 p = dynamics::unit(
                    (static_cast<double>(i) / f) * a + (static_cast<double>(j) / f) * b +
                    (static_cast<double>(k) / f) * c);
                unique.emplace(quantize(p), p);
            }
        }
    }

    PointCloud cloud;
    cloud.points.reserve(unique.size());
    for (const auto& [key, p] : unique) cloud.points.push_back(p);
    return cloud;
}

PointCloud place_sphere(const PointCloud& base, const Vec3& center, double radius) {
    PointCloud out;
    out.points.reserve(base.points.size());
    for (const Vec3& p : base.points) out.points.push_back(center + radius * p);
    return out;
}

}  // namespace opev::sensing
