#pragma once

#include <utility>

#include <Eigen/Core>

#include "mheslam/types.hpp"

namespace mheslam {

/// Information-form recursive least squares over the range measurement model,
/// which is linear in the landmark position. Exactly equivalent to batch
/// weighted least squares over all incorporated measurements; no forgetting.
class RlsState {
public:
    const Eigen::Matrix2d& information() const { return info_; }
    const Eigen::Vector2d& information_vector() const { return info_vec_; }
    int update_count() const { return update_count_; }

    bool has_estimate() const { return has_estimate_; }

    /// Throws SingularInformation while the information matrix is rank
    /// deficient.
    const LandmarkState& estimate() const;

    friend RlsState rls_update(RlsState state, const EgoState& ego, const Eigen::Vector2d& y,
                               bool visible, const Eigen::Matrix2d& weight);

private:
    Eigen::Matrix2d info_ = Eigen::Matrix2d::Zero();
    Eigen::Vector2d info_vec_ = Eigen::Vector2d::Zero();
    LandmarkState estimate_;
    bool has_estimate_ = false;
    int update_count_ = 0;
};

/// Incorporates one range measurement taken from the ego estimate. Invisible
/// steps return the state unchanged.
RlsState rls_update(RlsState state, const EgoState& ego, const Eigen::Vector2d& y, bool visible,
                    const Eigen::Matrix2d& weight);

/// (lambda_min, lambda_max) of the information matrix; the detectability
/// certificate for the range model.
std::pair<double, double> gramian_bounds(const RlsState& state);

}  // namespace mheslam
