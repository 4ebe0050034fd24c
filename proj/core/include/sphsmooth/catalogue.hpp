#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sphsmooth/direction.hpp"
#include "sphsmooth/spline.hpp"

namespace sphsmooth {

// ANGLES rows are "theta,phi" in radians; VECTORS rows are "x,y,z".
enum class CatalogueFormat { Angles, Vectors };

struct ParseReport {
    std::size_t line_count = 0;  // data lines seen (blank lines, '#' comments and a header are not counted)
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<std::size_t> rejected_lines;  // 1-based file line numbers
};

struct Catalogue {
    std::vector<Direction> records;
    std::string source;
    ParseReport report;
};

// Vectors with norm in [0.9, 1.1] are renormalised; anything else, and any
// malformed row, is counted as a reject. More than 10% rejects throws InputError.
Catalogue parse_catalogue(const std::string& text, CatalogueFormat format, std::string source = "<memory>");
Catalogue ingest(const std::filesystem::path& path, CatalogueFormat format);

// Regression rows: "theta,phi,value" (ANGLES) or "x,y,z,value" (VECTORS), same
// acceptance rules as the catalogue reader.
RegressionData parse_regression_data(const std::string& text, CatalogueFormat format, ParseReport* report = nullptr,
                                     const std::string& source = "<memory>");
RegressionData ingest_regression(const std::filesystem::path& path, CatalogueFormat format,
                                 ParseReport* report = nullptr);

CatalogueFormat parse_catalogue_format(const std::string& name);

}  // namespace sphsmooth
