#include "sphsmooth/vposterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "sphsmooth/error.hpp"
#include "sphsmooth/quadrature.hpp"

namespace sphsmooth {

namespace {

constexpr double kScanStep = 0.5;
constexpr double kScanHalfWidth = 80.0;
constexpr double kHardLimit = 700.0;
constexpr double kLogDrop = 60.0;  // window keeps everything within e^-60 of the peak
constexpr int kPanelNodes = 16;
constexpr int kMinPanels = 16, kMaxPanels = 400;
constexpr int kSimpsonIntervals = 4000;
constexpr double kEigenFloor = 1e-12;

double log_add_exp(double p, double q) {
    const double m = std::max(p, q);
    return m + std::log1p(std::exp(-std::abs(p - q)));
}

double logistic(double u) { return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

const QuadratureRule& panel_rule() {
    static const QuadratureRule rule = gauss_legendre(kPanelNodes);
    return rule;
}

}  // namespace

VPosterior::VPosterior(Eigen::VectorXd d, Eigen::VectorXd w, double b, double c_exp)
    : d_(std::move(d)), w_(std::move(w)), b_(b), c_(c_exp) {
    const Eigen::Index n = d_.size();
    if (n < 1 || w_.size() != n) throw DomainError("v-posterior needs matching non-empty d and w");
    if (!(b_ > 2.0 && b_ <= 4.0)) throw DomainError("hyperprior degrees b must lie in (2, 4]");
    if (!(c_ < b_ / 2.0)) throw DomainError("tau^2 exponent c must satisfy c < b/2");
    if (!(n + 2.0 * c_ - 2.0 > 0.0)) throw DomainError("v-posterior needs n + 2c - 2 > 0");
    if (!d_.allFinite() || !w_.allFinite()) throw DomainError("v-posterior inputs must be finite");
    a_ = 8.0 * (b_ + 2.0) / (b_ - 2.0);
    expo_ = (static_cast<double>(n) + 2.0 * c_ - 2.0) / 2.0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (d_(i) < kEigenFloor) d_(i) = 0.0;
    w2_ = w_.array().square().matrix();
    degenerate_ = !(w2_.sum() > 0.0);

    // Asymptotic log-slopes in u at -inf and +inf decide integrability.
    int n_zero = 0;
    double w2_zero = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (d_(i) == 0.0) {
            ++n_zero;
            w2_zero += w2_(i);
        }
    const double slope_lo = a_ / 2.0 - n_zero / 2.0 + (!degenerate_ && w2_zero > 0.0 ? expo_ : 0.0);
    const double slope_hi = degenerate_ ? -(b_ + static_cast<double>(n)) / 2.0 : c_ - b_ / 2.0 - 1.0;
    if (!(slope_lo > 0.0) || !(slope_hi < 0.0))
        throw NonIntegrable("v-posterior is improper for these hyperparameters and eigenvalues");

    // Coarse scan for the global peak, widening if it sits on the scan edge.
    double lo = -kScanHalfWidth, hi = kScanHalfWidth;
    std::vector<double> us, ls;
    auto scan = [&] {
        us.clear();
        ls.clear();
        for (double u = lo; u <= hi + 1e-9; u += kScanStep) {
            us.push_back(u);
            ls.push_back(ell(u));
        }
    };
    scan();
    for (;;) {
        const auto it = std::max_element(ls.begin(), ls.end());
        const auto i = static_cast<std::size_t>(it - ls.begin());
        if (i == 0 && lo > -kHardLimit) {
            lo = std::max(-kHardLimit, lo - 2.0 * kScanHalfWidth);
        } else if (i + 1 == ls.size() && hi < kHardLimit) {
            hi = std::min(kHardLimit, hi + 2.0 * kScanHalfWidth);
        } else {
            break;
        }
        scan();
    }
    std::size_t imax = static_cast<std::size_t>(std::max_element(ls.begin(), ls.end()) - ls.begin());
    if (!std::isfinite(ls[imax])) throw NonIntegrable("v-posterior log-density is not finite anywhere on the scan");

    const double ua = us[imax == 0 ? 0 : imax - 1], ub = us[std::min(imax + 1, us.size() - 1)];
    const auto best = boost::math::tools::brent_find_minima([this](double u) { return -ell(u); }, ua, ub,
                                                            std::numeric_limits<double>::digits / 2);
    u_mode_ = best.first;
    ell_mode_ = -best.second;
    if (ls[imax] > ell_mode_) {
        u_mode_ = us[imax];
        ell_mode_ = ls[imax];
    }

    // Window: everything within kLogDrop of the peak, extended past the scan if needed.
    const double thr = ell_mode_ - kLogDrop;
    while (ell(lo) >= thr) {
        if (lo <= -kHardLimit) throw NonIntegrable("v-posterior mass does not decay as v -> 0");
        lo = std::max(-kHardLimit, lo - 10.0);
    }
    while (ell(hi) >= thr) {
        if (hi >= kHardLimit) throw NonIntegrable("v-posterior mass does not decay as v -> inf");
        hi = std::min(kHardLimit, hi + 10.0);
    }
    u_lo_ = lo;
    u_hi_ = hi;
    for (std::size_t i = 0; i < us.size(); ++i)
        if (ls[i] >= thr) {
            u_lo_ = i == 0 ? lo : std::max(lo, us[i] - 2.0 * kScanStep);
            break;
        }
    for (std::size_t i = us.size(); i-- > 0;)
        if (ls[i] >= thr) {
            u_hi_ = i + 1 == us.size() ? hi : std::min(hi, us[i] + 2.0 * kScanStep);
            break;
        }
    u_lo_ = std::min(u_lo_, u_mode_ - 1.0);
    u_hi_ = std::max(u_hi_, u_mode_ + 1.0);

    // Curvature at the mode sets the panel width.
    const double h = 1e-3;
    const double curv = (ell(u_mode_ + h) - 2.0 * ell_mode_ + ell(u_mode_ - h)) / (h * h);
    sigma_u_ = curv < 0.0 ? 1.0 / std::sqrt(-curv) : 1.0;
    sigma_u_ = std::clamp(sigma_u_, 1e-3, 10.0);
    const int panels =
        std::clamp(static_cast<int>(std::ceil((u_hi_ - u_lo_) / (0.5 * sigma_u_))), kMinPanels, kMaxPanels);
    const double width = (u_hi_ - u_lo_) / panels;

    const QuadratureRule& rule = panel_rule();
    std::vector<double> raw;
    raw.reserve(static_cast<std::size_t>(panels) * kPanelNodes);
    u_.reserve(raw.capacity());
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = u_lo_ + (p + 0.5) * width;
        for (int j = 0; j < kPanelNodes; ++j) {
            const double u = mid + 0.5 * width * rule.nodes[j];
            const double val = 0.5 * width * rule.weights[j] * std::exp(ell(u) - ell_mode_);
            u_.push_back(u);
            raw.push_back(val);
            total += val;
        }
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw NonIntegrable("v-posterior normaliser failed to converge");
    log_norm_ = ell_mode_ + std::log(total);
    v_.resize(u_.size());
    omega_.resize(u_.size());
    for (std::size_t j = 0; j < u_.size(); ++j) {
        v_[j] = std::exp(u_[j]);
        omega_[j] = raw[j] / total;
    }
}

double VPosterior::S(double v) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d_.size(); ++i) s += w2_(i) / (v + d_(i));
    return s;
}

double VPosterior::ell(double u) const {
    const double v = std::exp(u);
    double out = 0.5 * a_ * u - 0.5 * (a_ + b_) * log_add_exp(std::log(b_), std::log(a_) + u);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d_.size(); ++i) logdet += d_(i) == 0.0 ? u : std::log(v + d_(i));
    out -= 0.5 * logdet;
    if (degenerate_) return out;
    double logS;
    if (u > -550.0) {
        logS = std::log(S(v));
    } else {
        // v so small that w^2 / v might overflow: factor v out first
        double sv = 0.0;
        for (Eigen::Index i = 0; i < d_.size(); ++i) sv += w2_(i) * (d_(i) == 0.0 ? 1.0 : v / (v + d_(i)));
        logS = std::log(sv) - u;
    }
    return out - expo_ * logS;
}

double VPosterior::log_kernel(double v) const {
    if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
    const double u = std::log(v);
    return ell(u) - u;
}

double VPosterior::density(double v) const { return std::exp(log_kernel(v) - log_norm_); }

double VPosterior::mode() const { return std::exp(u_mode_); }

double VPosterior::expect(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < v_.size(); ++j) acc += omega_[j] * f(v_[j]);
    return acc;
}

Eigen::VectorXd VPosterior::expected_inverse() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d_.size());
    for (std::size_t j = 0; j < v_.size(); ++j)
        e.array() += omega_[j] / (v_[j] + d_.array());
    return e;
}

double VPosterior::relative_integral_gk(const std::function<double(double)>& f) const {
    using boost::math::quadrature::gauss_kronrod;
    // Breakpoints in u: the window, split evenly, plus the mode and u = 0.
    std::vector<double> bu{0.0, u_mode_};
    for (int k = 0; k <= 16; ++k) bu.push_back(u_lo_ + (u_hi_ - u_lo_) * k / 16.0);
    std::sort(bu.begin(), bu.end());
    auto half = [&](bool upper) {
        // lower half: x = t = v/(1+v) on (0, 1/2]; upper half: x = 1 - t = 1/(1+v)
        std::vector<double> xs{0.0, 0.5};
        for (double u : bu)
            if (upper ? u > 0.0 : u < 0.0) xs.push_back(logistic(upper ? -u : u));
        std::sort(xs.begin(), xs.end());
        auto g = [&](double x) {
            if (x <= 0.0) return 0.0;
            const double l = std::log(x) - std::log1p(-x);
            const double u = upper ? -l : l;
            const double e = std::exp(ell(u) - ell_mode_);
            if (e == 0.0) return 0.0;
            return f(std::exp(u)) * e / (x * (1.0 - x));
        };
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < xs.size(); ++k)
            if (xs[k + 1] > xs[k]) acc += gauss_kronrod<double, 31>::integrate(g, xs[k], xs[k + 1], 12, 1e-11);
        return acc;
    };
    return half(false) + half(true);
}

double VPosterior::relative_integral_simpson(const std::function<double(double)>& f) const {
    const int m = kSimpsonIntervals;
    const double h = (u_hi_ - u_lo_) / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double u = u_lo_ + i * h;
        const double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += wgt * f(std::exp(u)) * std::exp(ell(u) - ell_mode_);
    }
    return acc * h / 3.0;
}

double VPosterior::expect_gauss_kronrod(const std::function<double(double)>& f) const {
    return relative_integral_gk(f) / relative_integral_gk([](double) { return 1.0; });
}

double VPosterior::expect_simpson(const std::function<double(double)>& f) const {
    return relative_integral_simpson(f) / relative_integral_simpson([](double) { return 1.0; });
}

VPosterior::NormalizerCheck VPosterior::normalizer_check() const {
    NormalizerCheck c;
    c.log_gauss_legendre = log_norm_;
    c.log_gauss_kronrod = ell_mode_ + std::log(relative_integral_gk([](double) { return 1.0; }));
    c.log_simpson = ell_mode_ + std::log(relative_integral_simpson([](double) { return 1.0; }));
    c.max_relative_difference = std::max(std::abs(std::expm1(c.log_gauss_kronrod - log_norm_)),
                                         std::abs(std::expm1(c.log_simpson - log_norm_)));
    return c;
}

}  // namespace sphsmooth
