#pragma once

#include <vector>

#include <Eigen/Core>

#include "mheslam/types.hpp"

namespace mheslam {

/// Forward-simulated window trajectory under single shooting, memoized on a
/// compact decision vector [x0 (3), v_0 .. v_{N-1} (3 each)]. States carry
/// wrapped headings; Jacobians are chain products of the per-step dynamics
/// Jacobians.
class ShootingRollout {
public:
    explicit ShootingRollout(std::vector<ControlInput> controls);

    /// Recomputes states and Jacobians when `compact` differs from the cache.
    void ensure(const Eigen::VectorXd& compact);

    int steps() const { return static_cast<int>(controls_.size()); }
    int compact_dim() const { return 3 + 3 * steps(); }

    /// State at window index i in [0, steps()].
    const EgoState& state(int i) const { return states_[i]; }

    /// 3 x compact_dim Jacobian of state(i) w.r.t. the compact decision.
    const Eigen::MatrixXd& state_jacobian(int i) const { return jacobians_[i]; }

private:
    std::vector<ControlInput> controls_;
    Eigen::VectorXd cached_;
    std::vector<EgoState> states_;
    std::vector<Eigen::MatrixXd> jacobians_;
};

}  // namespace mheslam
