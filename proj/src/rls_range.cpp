#include "mheslam/rls_range.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mheslam/errors.hpp"
#include "mheslam/models.hpp"

namespace mheslam {

const LandmarkState& RlsState::estimate() const
{
    if (!has_estimate_) {
        throw SingularInformation("information matrix is rank deficient");
    }
    return estimate_;
}

RlsState rls_update(RlsState state, const EgoState& ego, const Eigen::Vector2d& y, bool visible,
                    const Eigen::Matrix2d& weight)
{
    if (!visible) {
        return state;
    }

    // y = Phi (x^e - p), Phi = R(-theta): regress on  y + Phi p = Phi x^e.
    const Eigen::Matrix2d phi = rotation(-ego.theta);
    const Eigen::Vector2d target = y + phi * ego.position();

    state.info_ += phi.transpose() * weight * phi;
    state.info_vec_ += phi.transpose() * weight * target;
    state.update_count_ += 1;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(state.info_, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues().minCoeff();
    const double lambda_max = eig.eigenvalues().maxCoeff();
    if (lambda_min > 1e-12 * std::max(1.0, lambda_max)) {
        state.estimate_ = LandmarkState::from_vec(state.info_.ldlt().solve(state.info_vec_));
        state.has_estimate_ = true;
    }
    return state;
}

std::pair<double, double> gramian_bounds(const RlsState& state)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(state.information(),
                                                       Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

}  // namespace mheslam
