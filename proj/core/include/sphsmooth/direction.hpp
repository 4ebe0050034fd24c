#pragma once

#include <Eigen/Core>

namespace sphsmooth {

// A point on the unit sphere. theta is colatitude in [0, pi), phi is
// longitude in [0, 2*pi). Construct through from_angles / from_vector so
// the ranges hold; the South Pole is stored as theta = nextafter(pi, 0).
struct Direction {
    double theta = 0.0;
    double phi = 0.0;

    static Direction from_angles(double theta, double phi);
    static Direction from_vector(const Eigen::Vector3d& v);

    Eigen::Vector3d unit() const;
};

// Cosine of the great-circle angle, clamped to [-1, 1].
double cos_angle(const Direction& a, const Direction& b);

// Great-circle angle in [0, pi], accurate for nearly coincident points.
double angular_distance(const Direction& a, const Direction& b);

// Apply a rotation matrix to a direction.
Direction rotate(const Eigen::Matrix3d& R, const Direction& x);

}  // namespace sphsmooth
