#pragma once

#include <vector>

#include "opev/dynamics.hpp"

namespace opev::sensing {

using dynamics::Vec3;

/// Obstacle surface samples in the local orbital frame, meters.
struct PointCloud {
    std::vector<Vec3> points;
};

struct SensorConfig {
    double range = 10.0;   // m, omnidirectional sensing radius
    std::size_t bins_az = 8;
    std::size_t bins_el = 8;

    void validate() const;
};

/// Range image over azimuth x elevation bins. Each bin holds the nearest
/// normalized range of any sensed point in it; 1.0 means nothing sensed.
/// Stored elevation-major: values[el * bins_az + az].
struct PolarHistogram {
    std::size_t bins_az = 0;
    std::size_t bins_el = 0;
    std::vector<double> values;

    double& at(std::size_t el, std::size_t az) { return values[el * bins_az + az]; }
    double at(std::size_t el, std::size_t az) const { return values[el * bins_az + az]; }
};

/// Bins every cloud point within range of `origin`. Azimuth in [-pi, pi)
/// splits into bins_az equal bins; elevation in [-pi/2, pi/2] into bins_el,
/// with the +pi/2 boundary folded into the top bin. Bin value is the minimum
/// of |p - origin| / range over its points; empty bins read 1.0. A point
/// coincident with the origin has no direction and lands in the
/// azimuth-0/elevation-0 bin with value 0.
PolarHistogram build_histogram(const Vec3& sensor_origin, const std::vector<PointCloud>& clouds,
                               const SensorConfig& cfg);

/// Elevation-major flattening, the layout the evader observation consumes.
std::vector<double> flatten(const PolarHistogram& h);
PolarHistogram unflatten(const std::vector<double>& flat, std::size_t bins_az, std::size_t bins_el);

/// Unit-sphere surface samples: frequency-3 geodesic subdivision of the
/// icosahedron, 92 vertices.
PointCloud icosphere_cloud();

/// `base` scaled to `radius` and translated to `center`.
PointCloud place_sphere(const PointCloud& base, const Vec3& center, double radius);

}  // namespace opev::sensing
