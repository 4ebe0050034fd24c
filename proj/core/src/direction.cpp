#include "sphsmooth/direction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_longitude(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;  // fmod of tiny negatives can round up to 2*pi
    return r;
}

}  // namespace

Direction Direction::from_angles(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi))
        throw DomainError("direction angles must be finite");
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    double p = phi;
    if (t > std::numbers::pi) {
        // walking past a pole lands on the opposite meridian
        t = kTwoPi - t;
        p += std::numbers::pi;
    }
    if (t >= std::numbers::pi) t = std::nextafter(std::numbers::pi, 0.0);
    Direction d;
    d.theta = t;
    d.phi = wrap_longitude(p);
    return d;
}

Direction Direction::from_vector(const Eigen::Vector3d& v) {
    const double r = v.norm();
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("zero or non-finite vector has no direction");
    const double rho = std::hypot(v.x(), v.y());
    return from_angles(std::atan2(rho, v.z()), std::atan2(v.y(), v.x()));
}

Eigen::Vector3d Direction::unit() const {
    const double st = std::sin(theta);
    return {std::cos(phi) * st, std::sin(phi) * st, std::cos(theta)};
}

double cos_angle(const Direction& a, const Direction& b) {
    // spherical law of cosines; avoids building both vectors
    const double c = std::cos(a.theta) * std::cos(b.theta) +
                     std::sin(a.theta) * std::sin(b.theta) * std::cos(a.phi - b.phi);
    return std::clamp(c, -1.0, 1.0);
}

double angular_distance(const Direction& a, const Direction& b) {
    const Eigen::Vector3d u = a.unit(), v = b.unit();
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

Direction rotate(const Eigen::Matrix3d& R, const Direction& x) {
    return Direction::from_vector(R * x.unit());
}

}  // namespace sphsmooth
