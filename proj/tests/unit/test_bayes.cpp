#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/error.hpp"
#include "sphsmooth/kernels.hpp"
#include "sphsmooth/sampling.hpp"
#include "sphsmooth/spline.hpp"

using namespace sphsmooth;

namespace {

RegressionData from_function(std::size_t n, double sigma, std::uint64_t seed,
                             const std::function<double(const Eigen::Vector3d&)>& f) {
    Rng rng(seed);
    RegressionData d;
    d.points = uniform_sphere(n, rng);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.y(i) = f(d.points[i].unit());
    d.y += sigma * normal_vector(n, rng);
    return d;
}

}  // namespace

TEST_SUITE("bayes") {

TEST_CASE("prior ladders and branch covariances") {
    const PriorSpec pr = PriorSpec::defaults(1);
    CHECK(pr.a() == 24.0);
    Rng rng(1);
    const auto pts = uniform_sphere(12, rng);
    const BasisSpec spec(1, 2.0, WeightScheme::Iota);
    const auto cov = build_branch_covariances(spec, pr, pts);
    CHECK(cov.gamma0(2) == 0.0);
    CHECK(cov.gamma0(3) == 0.0);
    CHECK(cov.gamma0(0) > 0.0);
    CHECK(cov.gamma0(1) > 0.0);
    CHECK(cov.gamma1.minCoeff() > 0.0);
    CHECK(cov.gamma1(2) <= cov.gamma0(1));
    const auto cov1 = build_branch_covariances(spec, PriorSpec::defaults(1, 1.0), pts);
    CHECK((cov1.tail - kernel_matrix(zonal_kernel(1), pts)).cwiseAbs().maxCoeff() < 1e-15);
    PriorSpec bad = pr;
    bad.beta0(2) = 1e-3;
    CHECK_THROWS_AS(bad.validate(1), DomainError);
    bad = pr;
    bad.c_exp = 2.0;
    CHECK_THROWS_AS(bad.validate(1), DomainError);
}

TEST_CASE("spectral reduction") {
    Rng rng(2);
    const int n = 20;
    const auto pts = uniform_sphere(n, rng);
    const BasisSpec spec(2, 2.0, WeightScheme::Iota);
    const Eigen::MatrixXd Phi = design_matrix(spec, pts);
    const Eigen::VectorXd y = normal_vector(n, rng);

    const BranchReduction r0 = spectral_reduce(Phi, Eigen::VectorXd::Zero(9), Eigen::MatrixXd::Identity(n, n), y);
    CHECK(r0.d.isConstant(1.0, 1e-12));
    CHECK(r0.w.norm() == doctest::Approx(y.norm()).epsilon(1e-12));

    const Eigen::VectorXd g = PriorSpec::defaults(2).beta1;
    const BranchReduction r1 = spectral_reduce(Phi, g, Eigen::MatrixXd::Zero(n, n), y);
    CHECK((r1.d.array() <= 1e-10).count() == n - 9);

    const Eigen::MatrixXd tail = mixture_tail_matrix(pts, zonal_kernel(2), full_kernel(2), 0.5);
    const BranchReduction r2 = spectral_reduce(Phi, g, tail, y);
    const Eigen::MatrixXd input = Phi * g.asDiagonal() * Phi.transpose() + tail;
    CHECK((r2.H * r2.d.asDiagonal() * r2.H.transpose() - input).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r2.H.transpose() * r2.H - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r2.w.squaredNorm() == doctest::Approx(y.squaredNorm()).epsilon(1e-8));
    CHECK(r2.d.minCoeff() >= -1e-10);
}

TEST_CASE("branch means: zero prior, zero data and linearity") {
    const RegressionData d = from_function(30, 0.1, 3, [](const Eigen::Vector3d& u) { return u.z() + u.x() * u.y(); });
    const BasisSpec spec(2, 2.0, WeightScheme::Iota);
    const PriorSpec pr = PriorSpec::defaults(2);
    const auto cov = build_branch_covariances(spec, pr, d.points);
    const Eigen::MatrixXd Phi = design_matrix(spec, d.points);

    const BranchReduction rz = spectral_reduce(Phi, Eigen::VectorXd::Zero(9), cov.tail, d.y);
    CHECK(branch_posterior_mean(rz, v_posterior_density(rz, pr), Eigen::VectorXd::Zero(9), Phi).isZero(0.0));

    const BranchReduction r = spectral_reduce(Phi, cov.gamma1, cov.tail, d.y);
    const VPosterior post = v_posterior_density(r, pr);
    const Eigen::VectorXd e = post.expected_inverse();
    Rng rng(4);
    const Eigen::VectorXd y1 = normal_vector(30, rng), y2 = normal_vector(30, rng);
    const Eigen::VectorXd g12 = branch_posterior_mean(r, e, cov.gamma1, Phi, y1 + y2);
    const Eigen::VectorXd g1 = branch_posterior_mean(r, e, cov.gamma1, Phi, y1);
    const Eigen::VectorXd g2 = branch_posterior_mean(r, e, cov.gamma1, Phi, y2);
    CHECK((g12 - g1 - g2).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(branch_posterior_mean(r, e, cov.gamma1, Phi, Eigen::VectorXd::Zero(30)).isZero(0.0));
    CHECK((branch_posterior_mean(r, e, cov.gamma1, Phi, d.y) - branch_posterior_mean(r, post, cov.gamma1, Phi))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
}

TEST_CASE("zonal coefficient recovery") {
    const double y20 = std::sqrt(5.0 / (4 * std::numbers::pi));
    const RegressionData d =
        from_function(400, 0.01, 5, [&](const Eigen::Vector3d& u) { return 3 * y20 * 0.5 * (3 * u.z() * u.z() - 1); });
    const BayesFit f = fit_hierarchical(d, BasisSpec(3, 2.0, WeightScheme::Iota), PriorSpec::defaults(3));
    CHECK(std::abs(f.gamma0(basis_position(2, 0)) - 3.0) < 0.05);
    CHECK(f.pstar > 0.99);
}

TEST_CASE("mixture weight") {
    CHECK(posterior_mixture_weight(0.0, -3.0, 5.0) == 0.0);
    CHECK(posterior_mixture_weight(1.0, -3.0, 5.0) == 1.0);
    CHECK(posterior_mixture_weight(0.3, 2.0, 2.0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(posterior_mixture_weight(0.5, 800.0, 0.0) == 1.0);
    CHECK(posterior_mixture_weight(0.5, 0.0, 800.0) < 1e-300);

    const RegressionData d = from_function(60, 0.1, 6, [](const Eigen::Vector3d& u) { return std::exp(u.z()) + 0.3 * u.x(); });
    const BasisSpec spec(2, 2.0, WeightScheme::Iota);
    double prev = -1.0;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const BayesFit f = fit_hierarchical(d, spec, PriorSpec::defaults(2, p));
        CHECK(f.pstar >= 0.0);
        CHECK(f.pstar <= 1.0);
        CHECK(f.pstar >= prev);
        prev = f.pstar;
    }
}

TEST_CASE("posterior variance") {
    Rng rng(7);
    const Eigen::MatrixXd A = Eigen::MatrixXd::Random(4, 4), B = Eigen::MatrixXd::Random(4, 4);
    const Eigen::MatrixXd V0 = A * A.transpose(), V1 = B * B.transpose();
    const Eigen::VectorXd g0 = normal_vector(4, rng), g1 = normal_vector(4, rng);
    CHECK((posterior_variance(V0, V1, g0, g1, 1.0) - V0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((posterior_variance(V0, V1, g0, g0, 0.4) - (0.4 * V0 + 0.6 * V1)).cwiseAbs().maxCoeff() < 1e-14);
    // law of total variance: E[gg'] - E[g]E[g]'
    const double p = 0.35;
    const Eigen::MatrixXd second = p * (V0 + g0 * g0.transpose()) + (1 - p) * (V1 + g1 * g1.transpose());
    const Eigen::VectorXd mean = p * g0 + (1 - p) * g1;
    CHECK((posterior_variance(V0, V1, g0, g1, p) - (second - mean * mean.transpose())).cwiseAbs().maxCoeff() < 1e-12);

    for (int rep = 0; rep < 5; ++rep) {
        const RegressionData d = from_function(40, 0.2, derive_seed(8, rep),
                                               [](const Eigen::Vector3d& u) { return u.x() + std::sin(2 * u.z()); });
        const BayesFit f = fit_hierarchical(d, BasisSpec(2, 2.0, WeightScheme::Iota), PriorSpec::defaults(2));
        CHECK(f.variance.diagonal().minCoeff() >= -1e-10);
        CHECK((f.variance - f.variance.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.variance1);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());
    }
}

TEST_CASE("end-to-end fit") {
    const RegressionData d = from_function(300, 0.05, 9, [](const Eigen::Vector3d& u) { return 3 * (std::exp(u.z()) + 0.5 * u.z() * u.z()); });
    const BayesFit f = fit_hierarchical(d, BasisSpec(4, 2.0, WeightScheme::Iota), PriorSpec::defaults(4));
    REQUIRE(f.pstar > 0.99);
    double fmax = 0.0, dev = 0.0;
    for (int i = 1; i < 20; ++i) {
        const double th = std::numbers::pi * i / 20;
        double avg = 0.0;
        std::vector<double> vals;
        for (int j = 0; j < 36; ++j) vals.push_back(f(Direction::from_angles(th, 2 * std::numbers::pi * j / 36)));
        for (double v : vals) avg += v / 36;
        for (double v : vals) {
            dev = std::max(dev, std::abs(v - avg));
            fmax = std::max(fmax, std::abs(v));
        }
    }
    CHECK(dev < 0.05 * fmax);
    Rng rng(10);
    for (const auto& x : uniform_sphere(10, rng)) {
        const double direct = f.pstar * f.evaluate_branch(0, x) + (1 - f.pstar) * f.evaluate_branch(1, x);
        CHECK(std::abs(f(x) - direct) < 1e-12);
    }
    CHECK((f.gamma() - (f.pstar * f.gamma0 + (1 - f.pstar) * f.gamma1)).cwiseAbs().maxCoeff() == 0.0);

    RegressionData empty;
    CHECK_THROWS_AS(fit_hierarchical(empty, BasisSpec(1, 2.0, WeightScheme::Iota), PriorSpec::defaults(1)), EmptyInput);
}

TEST_CASE("rotation invariance of the reduced data norm") {
    const RegressionData d = from_function(40, 0.1, 11, [](const Eigen::Vector3d& u) { return u.x() * u.z(); });
    const BayesFit f = fit_hierarchical(d, BasisSpec(2, 2.0, WeightScheme::Iota), PriorSpec::defaults(2));
    REQUIRE(f.reduction.has_value());
    for (const auto& r : *f.reduction) CHECK(r.w.squaredNorm() == doctest::Approx(d.y.squaredNorm()).epsilon(1e-8));
}

TEST_CASE("shrinkage identity") {
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        Rng rng(derive_seed(12, rep));
        RegressionData d;
        d.points = uniform_sphere(10, rng);
        d.y = normal_vector(10, rng);
        const ShrinkageResult s = shrinkage_estimate(d, BasisSpec(1, 2.0, WeightScheme::Iota), PriorSpec::defaults(1));
        worst = std::max(worst, s.max_discrepancy);
        CHECK(s.direct.size() == 14);
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("fixed-v hierarchical Bayes tends to the spline") {
    Rng rng(13);
    const RegressionData d = from_function(40, 0.1, 14, [](const Eigen::Vector3d& u) { return std::cos(u.x() + 2 * u.y()); });
    const double xi = 1e-3;
    const KernelSpec k = full_kernel(2);
    const SplineFit s = fit_spline(d, k, xi);
    const auto query = uniform_sphere(50, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 6; ++j) {
        const KernelExpansion hb = hb_fixed_v(d, k, Eigen::VectorXd::Constant(9, std::pow(10.0, j)), 40 * xi);
        double gap = 0.0;
        for (const auto& x : query) gap = std::max(gap, std::abs(hb(x) - s(x)));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-4);
}

}  // TEST_SUITE
