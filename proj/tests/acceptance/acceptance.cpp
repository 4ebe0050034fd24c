// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances are fixed here and nowhere else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "sphsmooth/bayes.hpp"
#include "sphsmooth/diagnostics.hpp"
#include "sphsmooth/histospline.hpp"
#include "sphsmooth/kernels.hpp"
#include "sphsmooth/model_select.hpp"
#include "sphsmooth/persistence.hpp"
#include "sphsmooth/projection.hpp"
#include "sphsmooth/quadrature.hpp"
#include "sphsmooth/sampling.hpp"
#include "sphsmooth/spline.hpp"

using namespace sphsmooth;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%2d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RegressionData smooth_data(std::size_t n, double sigma, std::uint64_t seed) {
    Rng rng(seed);
    RegressionData d;
    d.points = uniform_sphere(n, rng);
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d u = d.points[i].unit();
        d.y(static_cast<Eigen::Index>(i)) = std::exp(u.z()) + std::sin(2 * u.x()) * u.y();
    }
    d.y += sigma * normal_vector(static_cast<Eigen::Index>(n), rng);
    return d;
}

// 1. addition formula
Outcome addition_formula() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    const int K = 30;
    Eigen::VectorXd v(basis_size(K));
    double worst = 0.0;
    for (const auto& x : uniform_sphere(100, rng)) {
        basis_vector(K, x, v.data());
        for (int k = 0; k <= K; ++k)
            worst = std::max(worst, std::abs(v.segment(k * k, 2 * k + 1).squaredNorm() - (2 * k + 1) / (4 * kPi)));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-10 && secs < 10.0, fmt("max error %.2e, %.2f s", worst, secs)};
}

// 2. orthonormality
Outcome orthonormality() {
    const int K = 9, nq = 200;
    const QuadratureRule gl = gauss_legendre(nq);
    Eigen::MatrixXd B(nq * nq, basis_size(K));
    Eigen::VectorXd w(nq * nq);
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j) {
            const int r = i * nq + j;
            Eigen::VectorXd v(basis_size(K));
            basis_vector(K, Direction::from_angles(std::acos(gl.nodes[i]), 2 * kPi * j / nq), v.data());
            B.row(r) = v.transpose();
            w(r) = gl.weights[i] * 2 * kPi / nq;
        }
    const Eigen::MatrixXd G = B.transpose() * w.asDiagonal() * B;
    const double err = (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
    return {err < 1e-8, fmt("max |G - I| %.2e", err)};
}

// 3. closed-form kernel
Outcome closed_form_kernel() {
    Rng rng(103);
    std::uniform_int_distribution<int> kd(0, 10);
    double worst = 0.0;
    for (int c = 0; c < 500; ++c) {
        const int K = kd(rng);
        const auto pts = uniform_sphere(2, rng);
        const double t = oracle::cosine_between(pts[0], pts[1]);
        worst = std::max(worst, std::abs(tail_kernel(full_kernel(K), pts[0], pts[1]) - oracle::full_kernel_series(K, t)));
    }
    const Direction x = Direction::from_angles(0.9, 2.2);
    const double e1 = std::abs(tail_kernel(full_kernel(0), x, x) - 1.0 / (24 * kPi));
    const double e2 = std::abs(q2_closed_form(1.0) - 0.5);
    const double e3 = std::abs(q2_closed_form(-1.0) - (4 * std::log(2.0) - 2.5));
    const double exact = std::max({e1, e2, e3});
    return {worst < 1e-8 && exact < 1e-12, fmt("series max error %.2e, exact anchors %.2e", worst, exact)};
}

// 4. zeta value at s = 2
Outcome zeta_value() {
    Rng rng(104);
    const double target = 1.0 / (4 * kPi);
    double worst = 0.0, lo = 1e300, hi = -1e300;
    for (const auto& x : uniform_sphere(100, rng)) {
        const double z = zeta_at(x, 2.0, 10, 200000);
        worst = std::max(worst, std::abs(z - target));
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    const double kernel = tail_kernel(generic_kernel(0, 2.0), Direction::from_angles(0.3, 0.4), Direction::from_angles(0.3, 0.4));
    worst = std::max(worst, std::abs(kernel - target));
    return {worst < 1e-10 && hi - lo < 1e-10, fmt("max |Z - 1/(4 pi)| %.2e, spread %.2e", worst, hi - lo)};
}

// 5. null-space exactness
Outcome null_space() {
    double dworst = 0.0, cworst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(derive_seed(105, rep));
        const int K = 1 + rep % 4;
        RegressionData d;
        d.points = uniform_sphere(static_cast<std::size_t>(basis_size(K) + 20 + rep), rng);
        const Eigen::VectorXd d0 = normal_vector(basis_size(K), rng);
        d.y = design_matrix(BasisSpec(K, 2.0, WeightScheme::Iota), d.points) * d0;
        for (double xi : {1e-3, 1.0, 1e3}) {
            const SplineFit f = fit_spline(d, full_kernel(K), xi);
            dworst = std::max(dworst, (f.d() - d0).cwiseAbs().maxCoeff());
            cworst = std::max(cworst, f.c().cwiseAbs().maxCoeff());
        }
    }
    return {dworst < 1e-8 && cworst < 1e-8, fmt("max |d - d0| %.2e, max |c| %.2e", dworst, cworst)};
}

// 6. diffuse Bayes limit
Outcome diffuse_limit() {
    const RegressionData d = smooth_data(60, 0.1, 106);
    const KernelSpec k = full_kernel(2);
    const double xi = 1e-3;
    const SplineFit f = fit_spline(d, k, xi);
    const DiffuseBayesEstimate b = diffuse_bayes_estimate(d, k, 1e8, xi);
    Rng rng(1060);
    double gap = 0.0;
    for (const auto& x : uniform_sphere(50, rng)) gap = std::max(gap, std::abs(b(x) - f(x)));
    return {gap < 1e-5, fmt("sup distance %.2e", gap)};
}

// 7. shrinkage identity
Outcome shrinkage_identity() {
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(derive_seed(107, rep));
        RegressionData d;
        d.points = uniform_sphere(10, rng);
        d.y = normal_vector(10, rng);
        const int K = rep % 2;
        worst = std::max(worst, shrinkage_estimate(d, BasisSpec(K, 2.0, WeightScheme::Iota), PriorSpec::defaults(K)).max_discrepancy);
    }
    return {worst < 1e-9, fmt("max discrepancy %.2e", worst)};
}

// 8. fixed-v hierarchical Bayes tends to the spline
Outcome hb_limit() {
    const RegressionData d = smooth_data(60, 0.1, 108);
    const KernelSpec k = full_kernel(2);
    const double xi = 1e-3;
    const SplineFit f = fit_spline(d, k, xi);
    Rng rng(1080);
    const auto query = uniform_sphere(50, rng);
    std::vector<double> gaps;
    for (int j = 0; j <= 6; ++j) {
        const KernelExpansion hb = hb_fixed_v(d, k, Eigen::VectorXd::Constant(9, std::pow(10.0, j)), d.size() * xi);
        double g = 0.0;
        for (const auto& x : query) g = std::max(g, std::abs(hb(x) - f(x)));
        gaps.push_back(g);
    }
    bool mono = true;
    for (std::size_t j = 1; j < gaps.size(); ++j) mono = mono && gaps[j] < gaps[j - 1];
    return {mono && gaps.back() < 1e-4, fmt("scale 1: %.2e, scale 1e6: %.2e", gaps.front(), gaps.back()) +
                                             (mono ? ", monotone" : ", NOT monotone")};
}

// 9. v-posterior normalisation
Outcome v_normalisation() {
    double worst = 0.0, mass = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        Rng rng(derive_seed(109, rep));
        const int K = 1 + rep % 3;
        const std::size_t n = 20 + 5 * (rep % 7);
        const RegressionData d = synth::draw_from_model(K, n, rep % 4 == 0 ? 1e-3 : 0.1, 1.0 + rep % 5, 0.5, rng);
        const BasisSpec spec(K, 2.0, WeightScheme::Iota);
        const PriorSpec prior = PriorSpec::defaults(K);
        const auto cov = build_branch_covariances(spec, prior, d.points);
        const Eigen::MatrixXd Phi = design_matrix(spec, d.points);
        const BranchReduction red = spectral_reduce(Phi, rep % 2 ? cov.gamma1 : cov.gamma0, cov.tail, d.y);
        const VPosterior post = v_posterior_density(red, prior);
        worst = std::max(worst, post.normalizer_check().max_relative_difference);
        mass = std::max(mass, std::abs(post.expect_gauss_kronrod([](double) { return 1.0; }) - 1.0));
        double wsum = 0.0;
        for (double w : post.weights()) wsum += w;
        mass = std::max(mass, std::abs(wsum - 1.0));
    }
    return {worst < 1e-6 && mass < 1e-6, fmt("max relative normaliser gap %.2e, |mass - 1| %.2e", worst, mass)};
}

// 10. adaptivity
Outcome adaptivity() {
    const auto t0 = std::chrono::steady_clock::now();
    const int K = 4, n = 400, reps = 50;
    const double sigma = 0.05, amp = 3.0;
    int zonal_ok = 0, nonzonal_ok = 0;
    for (int kind = 0; kind < 2; ++kind)
        for (int r = 0; r < reps; ++r) {
            Rng rng(derive_seed(110 + kind, r));
            RegressionData d;
            d.points = uniform_sphere(n, rng);
            d.y.resize(n);
            for (int i = 0; i < n; ++i) {
                const Eigen::Vector3d u = d.points[i].unit();
                d.y(i) = amp * (kind == 0 ? std::exp(u.z()) + 0.5 * u.z() * u.z() : std::exp(u.x()) + std::sin(2 * u.y()));
            }
            d.y += sigma * normal_vector(n, rng);
            const BayesFit f = fit_hierarchical(d, BasisSpec(K, 2.0, WeightScheme::Iota), PriorSpec::defaults(K, 0.5));
            if (kind == 0)
                zonal_ok += f.pstar > 0.9;
            else
                nonzonal_ok += f.pstar < 0.1;
        }
    const double secs = seconds_since(t0);
    const bool ok = zonal_ok >= 45 && nonzonal_ok >= 45 && secs < 300.0;
    return {ok, "zonal p*>0.9 in " + std::to_string(zonal_ok) + "/50, non-zonal p*<0.1 in " + std::to_string(nonzonal_ok) +
                    "/50" + fmt(", %.0f s", secs)};
}

// 11. model recovery
Outcome model_recovery() {
    const int K_true = 3, reps = 30;
    const double tau = 5.0;
    int hits = 0;
    bool unit_reference = true;
    for (int r = 0; r < reps; ++r) {
        Rng rng(derive_seed(42, r));
        const RegressionData d = synth::draw_from_model(K_true, 300, 0.05, tau, 0.5, rng);
        const SelectionTable t = bayes_factor_table(d, {1, 2, 3, 4, 5, 6}, default_p_grid());
        hits += t.best_K == K_true;
        unit_reference = unit_reference && t.scores.back().K == 6 && t.scores.back().log_bayes_factor == 0.0;
    }
    return {hits >= 21 && unit_reference,
            "K = 3 recovered in " + std::to_string(hits) + "/30" + (unit_reference ? ", B_Kmax = 1 exactly" : ", B_Kmax != 1")};
}

// 12. rate
Outcome rate() {
    const auto t0 = std::chrono::steady_clock::now();
    const RateReport r = rate_experiment(5.0, {100, 200, 400, 800, 1600}, 20, 112);
    const double secs = seconds_since(t0);
    std::string mise;
    for (std::size_t i = 0; i < r.n.size(); ++i) mise += (i ? " " : "") + fmt("%.4g", r.mise[i]);
    const bool ok = std::abs(r.slope - r.theoretical_slope) <= 0.15 && secs < 900.0;
    return {ok, fmt("slope %.3f vs %.4f", r.slope, r.theoretical_slope) + ", MISE " + mise + fmt(", %.0f s", secs)};
}

// 13. histospline uniform fixed point
Outcome histospline_uniform() {
    const HistosplineFit f = fit_histospline(CellGrid::uniform(10), 4, 1e-6);
    Rng rng(113);
    double worst = 0.0;
    for (const auto& x : uniform_sphere(2000, rng)) worst = std::max(worst, std::abs(f(x) - 1.0 / (4 * kPi)));
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j < 20; ++j)
            worst = std::max(worst, std::abs(f(Direction::from_angles(std::min(kPi * i / 20, kPi), 2 * kPi * j / 20)) - 1.0 / (4 * kPi)));
    return {worst < 1e-3, fmt("sup |f - 1/(4 pi)| %.2e", worst)};
}

// 14. Lambert projection
Outcome lambert() {
    const PlanePoint a = lambert_project(Direction::from_angles(0.0, 0.0), Pole::North);
    const PlanePoint b = lambert_project(Direction::from_angles(kPi / 2, 0.0), Pole::North);
    const PlanePoint c = lambert_project(Direction::from_angles(kPi, 0.0), Pole::North);
    const double anchor = std::max({std::hypot(a.x, a.y), std::hypot(b.x - std::sqrt(2.0), b.y), std::abs(std::hypot(c.x, c.y) - 2.0)});

    Rng rng(114);
    double trip = 0.0;
    for (const auto& x : uniform_sphere(10000, rng)) {
        if (x.theta > kPi - 1e-3) continue;
        const Direction y = lambert_inverse(lambert_project(x, Pole::North), Pole::North);
        trip = std::max({trip, std::abs(y.theta - x.theta), std::abs(std::remainder(y.phi - x.phi, 2 * kPi))});
    }
    // uniform points on the sphere land in a plane rectangle in proportion to its area
    const auto pts = uniform_sphere(1000000, rng);
    std::size_t inside = 0;
    for (const auto& x : pts) {
        const PlanePoint p = lambert_project(x, Pole::North);
        inside += p.x > -0.4 && p.x < 1.1 && p.y > 0.1 && p.y < 1.3;
    }
    const double jac = (double(inside) / double(pts.size()) * 4 * kPi) / (1.5 * 1.2);
    const bool ok = anchor < 1e-12 && trip < 1e-10 && std::abs(jac - 1.0) < 0.02;
    return {ok, fmt("anchors %.1e, round trip %.1e", anchor, trip) + fmt(", area ratio %.4f", jac)};
}

// 15. persistence
Outcome persistence() {
    const RegressionData d = smooth_data(60, 0.05, 115);
    Rng rng(1150);
    const std::vector<AnyFit> fits{fit_spline(d, full_kernel(2), 1e-3),
                                   fit_hierarchical(d, BasisSpec(2, 2.0, WeightScheme::Iota), PriorSpec::defaults(2)),
                                   fit_histospline(bin_directions(uniform_sphere(5000, rng), 8), 3, 1e-5)};
    const auto dir = std::filesystem::temp_directory_path() / "sphsmooth_acceptance";
    std::filesystem::create_directories(dir);
    const auto query = uniform_sphere(200, rng);
    double worst = 0.0;
    std::string kinds;
    for (const AnyFit& f : fits) {
        const auto path = dir / (std::string(fit_kind_name(f)) + ".arch");
        save(f, path);
        const AnyFit g = load(path);
        for (const auto& x : query) worst = std::max(worst, std::abs(evaluate(f, x) - evaluate(g, x)));
        kinds += std::string(kinds.empty() ? "" : ",") + fit_kind_name(g);
    }
    return {worst <= 1e-12, fmt("max reload difference %.2e", worst) + " over " + kinds};
}

}  // namespace

int main() {
    run(1, "addition formula", addition_formula);
    run(2, "orthonormality", orthonormality);
    run(3, "closed-form kernel", closed_form_kernel);
    run(4, "zeta value", zeta_value);
    run(5, "null-space exactness", null_space);
    run(6, "diffuse Bayes limit", diffuse_limit);
    run(7, "shrinkage identity", shrinkage_identity);
    run(8, "fixed-v Bayes limit", hb_limit);
    run(9, "v-posterior normalisation", v_normalisation);
    run(10, "adaptivity", adaptivity);
    run(11, "model recovery", model_recovery);
    run(12, "rate", rate);
    run(13, "histospline uniform fixed point", histospline_uniform);
    run(14, "Lambert projection", lambert);
    run(15, "persistence round trip", persistence);
    std::printf("%d of 15 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
