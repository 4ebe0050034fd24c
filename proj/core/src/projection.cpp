#include "sphsmooth/projection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {
constexpr double kPi = std::numbers::pi;

void append_number(std::string& out, double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}
}  // namespace

Pole parse_pole(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (n == "NORTH" || n == "N") return Pole::North;
    if (n == "SOUTH" || n == "S") return Pole::South;
    throw InputError("unknown pole '" + name + "' (expected NORTH or SOUTH)");
}

PlanePoint lambert_project(const Direction& x, Pole pole) {
    const double t = pole == Pole::North ? x.theta : kPi - x.theta;
    const double r = 2.0 * std::sin(0.5 * t);
    return {r * std::cos(x.phi), r * std::sin(x.phi)};
}

Direction lambert_inverse(const PlanePoint& p, Pole pole) {
    const double r = std::hypot(p.x, p.y);
    if (!std::isfinite(r) || r >= 2.0) throw DomainError("lambert_inverse: point outside the radius-2 disk");
    const double t = 2.0 * std::asin(0.5 * r);
    const double phi = r > 0.0 ? std::atan2(p.y, p.x) : 0.0;
    return Direction::from_angles(pole == Pole::North ? t : kPi - t, phi);
}

ProjectedGrid project_grid(const SphereFunction& f, int resolution, Pole pole, bool hemisphere_only) {
    if (resolution < 16) throw DomainError("grid resolution must be >= 16");
    ProjectedGrid g;
    g.resolution = resolution;
    g.pole = pole;
    g.hemisphere_only = hemisphere_only;
    const double tmax = hemisphere_only ? 0.5 * kPi : kPi;
    g.rows.reserve(static_cast<std::size_t>(resolution + 1) * (resolution + 1));
    for (int i = 0; i <= resolution; ++i) {
        const double t = tmax * i / resolution;  // angle from the chosen pole
        const double r = 2.0 * std::sin(0.5 * t);
        for (int j = 0; j <= resolution; ++j) {
            const double phi = 2.0 * kPi * j / resolution;
            const Direction x = Direction::from_angles(pole == Pole::North ? t : kPi - t, phi);
            const double v = f(x);
            if (!std::isfinite(v)) throw NumericalError("grid evaluation produced a non-finite value");
            g.rows.push_back({r * std::cos(phi), r * std::sin(phi), v});
        }
    }
    return g;
}

std::string grid_csv(const ProjectedGrid& grid) {
    std::string out = "x,y,value\n";
    out.reserve(out.size() + grid.rows.size() * 72);
    for (const auto& row : grid.rows) {
        append_number(out, row.x);
        out += ',';
        append_number(out, row.y);
        out += ',';
        append_number(out, row.value);
        out += '\n';
    }
    return out;
}

void write_grid(const ProjectedGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write grid to " + path.string());
    out << grid_csv(grid);
    if (!out) throw InputError("write failed for " + path.string());
}

void emit_grid(const SphereFunction& f, int resolution, Pole pole, bool hemisphere_only,
               const std::filesystem::path& path) {
    write_grid(project_grid(f, resolution, pole, hemisphere_only), path);
}

}  // namespace sphsmooth
