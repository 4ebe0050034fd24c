#include "sphsmooth/catalogue.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

bool parse_fields(const std::string& line, std::vector<double>& out) {
    out.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (std::isspace(static_cast<unsigned char>(*p)) || *p == ',')) ++p;
        if (p == end) break;
        if (*p == '+') ++p;  // from_chars rejects a leading '+'
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc() || next == p) return false;
        out.push_back(v);
        p = next;
        if (p < end && !(std::isspace(static_cast<unsigned char>(*p)) || *p == ',')) return false;
    }
    return true;
}

bool looks_like_header(const std::string& line) {
    return std::any_of(line.begin(), line.end(), [](char ch) {
        return std::isalpha(static_cast<unsigned char>(ch)) && ch != 'e' && ch != 'E';
    });
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

CatalogueFormat parse_catalogue_format(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (n == "ANGLES") return CatalogueFormat::Angles;
    if (n == "VECTORS") return CatalogueFormat::Vectors;
    throw InputError("unknown catalogue format '" + name + "' (expected ANGLES or VECTORS)");
}

namespace {

// Shared row loop; on_row gets the parsed fields and returns false to reject.
template <class OnRow>
ParseReport parse_rows(const std::string& text, std::size_t arity, const std::string& source, OnRow on_row) {
    ParseReport report;
    std::istringstream in(text);
    std::string raw;
    std::vector<double> f;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (first && looks_like_header(line)) {
            first = false;
            continue;
        }
        first = false;
        ++report.line_count;
        const bool ok = parse_fields(line, f) && f.size() == arity &&
                        std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); }) && on_row(f);
        if (ok) {
            ++report.accepted;
        } else {
            ++report.rejected;
            report.rejected_lines.push_back(lineno);
        }
    }
    if (report.line_count == 0) throw EmptyInput(source + " has no data rows");
    if (10 * report.rejected > report.line_count) {
        std::ostringstream msg;
        msg << source << ": " << report.rejected << " of " << report.line_count
            << " rows rejected (limit 10%); first bad line " << report.rejected_lines.front();
        throw InputError(msg.str());
    }
    return report;
}

// Direction from the leading fields; false when a vector norm is out of range.
bool to_direction(const std::vector<double>& f, CatalogueFormat format, Direction& out) {
    if (format == CatalogueFormat::Angles) {
        out = Direction::from_angles(f[0], f[1]);
        return true;
    }
    const Eigen::Vector3d v(f[0], f[1], f[2]);
    const double norm = v.norm();
    if (!(norm >= 0.9 && norm <= 1.1)) return false;
    out = Direction::from_vector(v / norm);
    return true;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t direction_arity(CatalogueFormat format) { return format == CatalogueFormat::Angles ? 2 : 3; }

}  // namespace

Catalogue parse_catalogue(const std::string& text, CatalogueFormat format, std::string source) {
    Catalogue cat;
    cat.source = std::move(source);
    cat.report = parse_rows(text, direction_arity(format), "catalogue " + cat.source, [&](const std::vector<double>& f) {
        Direction d;
        if (!to_direction(f, format, d)) return false;
        cat.records.push_back(d);
        return true;
    });
    return cat;
}

RegressionData parse_regression_data(const std::string& text, CatalogueFormat format, ParseReport* report,
                                     const std::string& source) {
    RegressionData data;
    std::vector<double> values;
    const std::size_t arity = direction_arity(format);
    const ParseReport r = parse_rows(text, arity + 1, "data " + source, [&](const std::vector<double>& f) {
        Direction d;
        if (!to_direction(f, format, d)) return false;
        data.points.push_back(d);
        values.push_back(f[arity]);
        return true;
    });
    data.y = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    if (report) *report = r;
    return data;
}

RegressionData ingest_regression(const std::filesystem::path& path, CatalogueFormat format, ParseReport* report) {
    return parse_regression_data(read_text(path), format, report, path.string());
}

Catalogue ingest(const std::filesystem::path& path, CatalogueFormat format) {
    return parse_catalogue(read_text(path), format, path.string());
}

}  // namespace sphsmooth
