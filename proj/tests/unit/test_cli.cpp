#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <sys/wait.h>

#include "sphsmooth/catalogue.hpp"
#include "sphsmooth/error.hpp"
#include "sphsmooth/persistence.hpp"
#include "sphsmooth/projection.hpp"
#include "sphsmooth/sampling.hpp"

using namespace sphsmooth;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / "sphsmooth_cli_test";
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream(p) << s;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

#ifdef SPHSMOOTH_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + SPHSMOOTH_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("catalogue rows") {
    const Catalogue a = parse_catalogue("0,0\n", CatalogueFormat::Angles);
    REQUIRE(a.records.size() == 1);
    CHECK(a.records[0].theta == 0.0);
    const Catalogue v = parse_catalogue("x,y,z\n0,0,1\n0,1,0\n", CatalogueFormat::Vectors);
    REQUIRE(v.records.size() == 2);
    CHECK(v.records[0].theta == 0.0);
    CHECK(v.records[1].theta == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(v.records[1].phi == doctest::Approx(kPi / 2).epsilon(1e-15));

    std::string text = "# comment\n";
    for (int i = 0; i < 30; ++i) text += "0.5,0.5,0.70710678\n";
    text += "0,0,0\n\nbad,row,here\n";
    const Catalogue r = parse_catalogue(text, CatalogueFormat::Vectors);
    CHECK(r.report.accepted == 30);
    CHECK(r.report.rejected == 2);
    CHECK(r.report.accepted + r.report.rejected == r.report.line_count);
    CHECK(r.report.rejected_lines == std::vector<std::size_t>{32, 34});

    CHECK_THROWS_AS(parse_catalogue("0,0,0\n0,0,1\n", CatalogueFormat::Vectors), InputError);
    CHECK_THROWS_AS(parse_catalogue("# nothing\n", CatalogueFormat::Angles), EmptyInput);
    CHECK_THROWS_AS(parse_catalogue_format("polar"), InputError);
}

TEST_CASE("regression rows and file ingestion") {
    const fs::path p = scratch_dir() / "reg.csv";
    write_text(p, "theta,phi,value\n0.1,0.2,3.5\n1.0,2.0,-1\n");
    ParseReport rep;
    const RegressionData d = ingest_regression(p, CatalogueFormat::Angles, &rep);
    CHECK(d.size() == 2);
    CHECK(d.y(0) == 3.5);
    CHECK(rep.line_count == 2);
    CHECK_THROWS_AS(ingest(scratch_dir() / "missing.csv", CatalogueFormat::Angles), InputError);
}

TEST_CASE("Lambert anchors") {
    const PlanePoint o = lambert_project(Direction::from_angles(0.0, 0.0), Pole::North);
    CHECK(std::abs(o.x) < 1e-12);
    CHECK(std::abs(o.y) < 1e-12);
    const PlanePoint e = lambert_project(Direction::from_angles(kPi / 2, 0.0), Pole::North);
    CHECK(std::abs(e.x - std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(e.y) < 1e-12);
    const PlanePoint s = lambert_project(Direction::from_angles(kPi, 0.3), Pole::North);
    CHECK(std::abs(std::hypot(s.x, s.y) - 2.0) < 1e-12);
    const PlanePoint so = lambert_project(Direction::from_angles(kPi, 0.0), Pole::South);
    CHECK(std::hypot(so.x, so.y) < 1e-12);
    CHECK_THROWS_AS(lambert_inverse({2.0, 0.0}, Pole::North), DomainError);
}

TEST_CASE("Lambert round trip and area preservation") {
    Rng rng(1);
    for (const auto& x : uniform_sphere(1000, rng)) {
        if (x.theta > kPi - 1e-3) continue;
        const Direction back = lambert_inverse(lambert_project(x, Pole::North), Pole::North);
        CHECK(std::abs(back.theta - x.theta) < 1e-10);
        CHECK(std::abs(std::remainder(back.phi - x.phi, 2 * kPi)) < 1e-10);
    }
    // fraction of uniform sphere points landing in a plane region equals its area / 4 pi
    const auto pts = uniform_sphere(400000, rng);
    std::size_t inside = 0;
    for (const auto& x : pts) {
        const PlanePoint p = lambert_project(x, Pole::North);
        inside += (p.x > 0.2 && p.x < 1.2 && p.y > -0.5 && p.y < 0.7);
    }
    const double ratio = (double(inside) / pts.size() * 4 * kPi) / (1.0 * 1.2);
    CHECK(std::abs(ratio - 1.0) < 0.02);
}

TEST_CASE("projected grids") {
    const ProjectedGrid g = project_grid([](const Direction&) { return 2.5; }, 20, Pole::North, false);
    CHECK(g.rows.size() == 21u * 21u);
    for (const auto& r : g.rows) CHECK(r.value == 2.5);
    const ProjectedGrid h = project_grid([](const Direction& x) { return std::cos(x.theta); }, 16, Pole::South, true);
    CHECK(h.rows.size() == 17u * 17u);
    for (const auto& r : h.rows) CHECK(std::hypot(r.x, r.y) <= std::sqrt(2.0) + 1e-12);
    const std::string a = grid_csv(h), b = grid_csv(h);
    CHECK(a == b);
    CHECK(a.rfind("x,y,value\n", 0) == 0);
    CHECK_THROWS_AS(project_grid([](const Direction&) { return 0.0; }, 8, Pole::North, false), DomainError);
    CHECK_THROWS_AS(project_grid([](const Direction&) { return NAN; }, 16, Pole::North, false), NumericalError);
    const fs::path p = scratch_dir() / "grid.csv";
    emit_grid([](const Direction& x) { return x.phi; }, 16, Pole::North, false, p);
    CHECK(read_text(p) == grid_csv(project_grid([](const Direction& x) { return x.phi; }, 16, Pole::North, false)));
}

#ifdef SPHSMOOTH_CLI_PATH
TEST_CASE("command-line tool") {
    const fs::path dir = scratch_dir();
    Rng rng(2);
    std::string reg = "theta,phi,value\n", cat = "theta,phi\n";
    for (const auto& x : uniform_sphere(120, rng)) {
        reg += std::to_string(x.theta) + "," + std::to_string(x.phi) + "," + std::to_string(std::exp(std::cos(x.theta))) + "\n";
        cat += std::to_string(x.theta) + "," + std::to_string(x.phi) + "\n";
    }
    write_text(dir / "reg.csv", reg);
    write_text(dir / "cat.csv", cat);
    const std::string d = dir.string();

    CHECK(run_cli("--k 2 --xi 1e-3 --out " + d + "/s.arch fit-spline --data " + d + "/reg.csv") == 0);
    CHECK(std::string(fit_kind_name(load(dir / "s.arch"))) == "SPLINE");
    CHECK(fs::exists(dir / "s.arch.summary.jsonl"));
    CHECK(run_cli("--k 2 --gcv --out " + d + "/g.arch fit-spline --data " + d + "/reg.csv") == 0);
    CHECK(run_cli("--k 2 --out " + d + "/b.arch fit-bayes --data " + d + "/reg.csv") == 0);
    CHECK(run_cli("--m 6 --k 2 --out " + d + "/h.arch histospline --data " + d + "/cat.csv") == 0);
    CHECK(run_cli("--resolution 16 --out " + d + "/p.csv project --archive " + d + "/h.arch") == 0);
    const std::string grid = read_text(dir / "p.csv");
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 1 + 17 * 17);
    CHECK(run_cli("--out " + d + "/t.csv select-k --data " + d + "/reg.csv --k-range 1 2 3") == 0);
    CHECK(run_cli("describe") == 0);

    // rerunning the same command reproduces the archive byte for byte
    CHECK(run_cli("--k 2 --xi 1e-3 --out " + d + "/s2.arch fit-spline --data " + d + "/reg.csv") == 0);
    CHECK(read_text(dir / "s.arch") == read_text(dir / "s2.arch"));

    // bad input -> 1
    write_text(dir / "bad.csv", "theta,phi,value\nx,y,z\nq,r,s\n");
    CHECK(run_cli("--k 1 --xi 1e-3 --out " + d + "/x.arch fit-spline --data " + d + "/bad.csv") == 1);
    CHECK(run_cli("--k 1 --xi -1 --out " + d + "/x.arch fit-spline --data " + d + "/reg.csv") == 1);
    CHECK(run_cli("--no-such-flag describe") == 1);
    CHECK(run_cli("--out " + d + "/x.csv project --archive " + d + "/missing.arch") == 1);
    // numerical failure -> 2: points on one meridian cannot support K = 2
    std::string line = "theta,phi,value\n";
    for (int i = 0; i < 30; ++i) line += std::to_string(0.1 + 0.09 * i) + ",1.0," + std::to_string(i) + "\n";
    write_text(dir / "line.csv", line);
    CHECK(run_cli("--k 2 --xi 1e-3 --out " + d + "/l.arch fit-spline --data " + d + "/line.csv") == 2);
}
#endif

}  // TEST_SUITE
