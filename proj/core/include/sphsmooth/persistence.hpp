#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/histospline.hpp"
#include "sphsmooth/spline.hpp"

namespace sphsmooth {

inline constexpr int kArchiveVersion = 1;

using AnyFit = std::variant<SplineFit, BayesFit, HistosplineFit>;

// Archive text for a fit, ending in its "digest sha256 <hex>" line.
std::string serialize(const AnyFit& fit);
AnyFit deserialize(const std::string& text);

// Lower-case hex SHA-256 of arbitrary bytes.
std::string sha256_hex(const std::string& bytes);

// Writes the archive and returns its digest.
std::string save(const AnyFit& fit, const std::filesystem::path& path);
AnyFit load(const std::filesystem::path& path);

// Digest recorded in an archive file (verified).
std::string archive_digest(const std::filesystem::path& path);

double evaluate(const AnyFit& fit, const Direction& x);
const char* fit_kind_name(const AnyFit& fit);

}  // namespace sphsmooth
