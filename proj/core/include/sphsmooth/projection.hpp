#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sphsmooth/direction.hpp"

namespace sphsmooth {

enum class Pole { North, South };

Pole parse_pole(const std::string& name);

struct PlanePoint {
    double x = 0.0, y = 0.0;
};

// Lambert azimuthal equal-area map centred on the chosen pole:
// North: 2 sin(theta/2) (cos phi, sin phi); South: 2 sin((pi - theta)/2) (cos phi, sin phi).
PlanePoint lambert_project(const Direction& x, Pole pole);

// Inverse on the open disk of radius 2; throws DomainError outside it.
Direction lambert_inverse(const PlanePoint& p, Pole pole);

struct GridRow {
    double x, y, value;
};

struct ProjectedGrid {
    int resolution = 0;
    Pole pole = Pole::North;
    bool hemisphere_only = false;
    std::vector<GridRow> rows;
};

using SphereFunction = std::function<double(const Direction&)>;

// (r+1)^2 rows over a uniform lattice in pole-relative colatitude
// [0, pi] (or [0, pi/2] for the hemisphere view) and longitude [0, 2 pi].
ProjectedGrid project_grid(const SphereFunction& f, int resolution, Pole pole, bool hemisphere_only);

// "x,y,value" CSV, 17 significant digits.
std::string grid_csv(const ProjectedGrid& grid);
void write_grid(const ProjectedGrid& grid, const std::filesystem::path& path);

void emit_grid(const SphereFunction& f, int resolution, Pole pole, bool hemisphere_only,
               const std::filesystem::path& path);

}  // namespace sphsmooth
