#include "mheslam/shooting.hpp"

#include "mheslam/errors.hpp"
#include "mheslam/models.hpp"

namespace mheslam {

ShootingRollout::ShootingRollout(std::vector<ControlInput> controls)
    : controls_(std::move(controls))
{
    states_.resize(controls_.size() + 1);
    jacobians_.resize(controls_.size() + 1);
}

void ShootingRollout::ensure(const Eigen::VectorXd& compact)
{
    if (compact.size() != compact_dim()) {
        throw InvalidParam("compact decision vector has wrong dimension");
    }
    if (cached_.size() == compact.size() && cached_ == compact) {
        return;
    }

    const int n = compact_dim();
    states_[0] = EgoState::from_vec(compact.head<3>());
    jacobians_[0] = Eigen::MatrixXd::Zero(3, n);
    jacobians_[0].leftCols<3>().setIdentity();

    for (int i = 0; i < steps(); ++i) {
        const auto v = ProcessNoise::from_vec(compact.segment<3>(3 + 3 * i));
        const Eigen::Matrix3d a = dynamics_jacobian_state(states_[i], controls_[i]);
        states_[i + 1] = dynamics_step(states_[i], controls_[i], v);
        jacobians_[i + 1].noalias() = a * jacobians_[i];
        jacobians_[i + 1].middleCols<3>(3 + 3 * i) += Eigen::Matrix3d::Identity();
    }
    cached_ = compact;
}

}  // namespace mheslam
