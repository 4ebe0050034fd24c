#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sphsmooth/error.hpp"

namespace sphsmooth::detail {

// SPD solve with an LDLT fallback for matrices that are PD only to rounding.
class SpdSolver {
public:
    explicit SpdSolver(const Eigen::MatrixXd& A) : llt_(A) {
        if (llt_.info() == Eigen::Success) return;
        use_ldlt_ = true;
        ldlt_.compute(A);
        if (ldlt_.info() != Eigen::Success || !ldlt_.isPositive())
            throw SingularSystem("kernel system is not positive definite");
    }

    template <typename Rhs>
    Eigen::MatrixXd solve(const Rhs& b) const {
        return use_ldlt_ ? Eigen::MatrixXd(ldlt_.solve(b)) : Eigen::MatrixXd(llt_.solve(b));
    }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    bool use_ldlt_ = false;
};

}  // namespace sphsmooth::detail
