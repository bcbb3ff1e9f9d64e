#include "mheslam/models.hpp"

#include <cmath>

#include "mheslam/angles.hpp"
#include "mheslam/errors.hpp"

namespace mheslam {

namespace {

Eigen::Vector2d separation(const EgoState& x, const LandmarkState& lm)
{
    return lm.vec() - x.position();
}

void require_nonzero(const Eigen::Vector2d& d)
{
    if (d.norm() == 0.0) {
        throw DegenerateGeometry("landmark coincides with sensor origin");
    }
}

}  // namespace

Eigen::Matrix2d rotation(double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

EgoState dynamics_step(const EgoState& x, const ControlInput& u, const ProcessNoise& v)
{
    EgoState next;
    next.px = x.px + u.v_lin * std::cos(x.theta) + v.v1;
    next.py = x.py + u.v_lin * std::sin(x.theta) + v.v2;
    next.theta = wrap_angle(x.theta + u.v_ang + v.v_theta);
    return next;
}

Eigen::Vector3d ego_measurement(const EgoState& x, const Eigen::Vector3d& xi)
{
    return x.vec() + xi;
}

Eigen::Vector2d landmark_measurement(const EgoState& x, const LandmarkState& lm,
                                     const Eigen::Vector2d& xi, const SensorModel& model)
{
    const Eigen::Vector2d d = separation(x, lm);
    require_nonzero(d);
    const double alpha = model.kind == SensorKind::BearingOnly ? d.norm() : 1.0;
    return rotation(-x.theta) * (d / alpha) + xi;
}

Eigen::Vector2d landmark_measurement(const EgoState& x, const LandmarkState& lm,
                                     const SensorModel& model)
{
    return landmark_measurement(x, lm, Eigen::Vector2d::Zero(), model);
}

bool visibility(const EgoState& x, const LandmarkState& lm, const SensorModel& model)
{
    const double dist = separation(x, lm).norm();
    return dist >= model.r_min && dist <= model.r_max;
}

Eigen::Matrix3d dynamics_jacobian_state(const EgoState& x, const ControlInput& u)
{
    Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
    j(0, 2) = -u.v_lin * std::sin(x.theta);
    j(1, 2) = u.v_lin * std::cos(x.theta);
    return j;
}

Eigen::Matrix3d dynamics_jacobian_noise()
{
    return Eigen::Matrix3d::Identity();
}

Eigen::Matrix3d ego_measurement_jacobian()
{
    return Eigen::Matrix3d::Identity();
}

namespace {

// d/dtheta of R(-theta).
Eigen::Matrix2d rotation_neg_derivative(double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix2d m;
    m << -s, c, -c, -s;
    return m;
}

}  // namespace

Eigen::Matrix<double, 2, 3> landmark_measurement_jacobian_ego(const EgoState& x,
                                                              const LandmarkState& lm,
                                                              const SensorModel& model)
{
    const Eigen::Vector2d d = separation(x, lm);
    Eigen::Matrix<double, 2, 3> j;
    if (model.kind == SensorKind::Range) {
        j.leftCols<2>() = -rotation(-x.theta);
        j.col(2) = rotation_neg_derivative(x.theta) * d;
    } else {
        require_nonzero(d);
        const double n = d.norm();
        const Eigen::Matrix2d proj =
            (Eigen::Matrix2d::Identity() - d * d.transpose() / (n * n)) / n;
        j.leftCols<2>() = -rotation(-x.theta) * proj;
        j.col(2) = rotation_neg_derivative(x.theta) * (d / n);
    }
    return j;
}

Eigen::Matrix2d landmark_measurement_jacobian_landmark(const EgoState& x,
                                                       const LandmarkState& lm,
                                                       const SensorModel& model)
{
    if (model.kind == SensorKind::Range) {
        return rotation(-x.theta);
    }
    const Eigen::Vector2d d = separation(x, lm);
    require_nonzero(d);
    const double n = d.norm();
    const Eigen::Matrix2d proj = (Eigen::Matrix2d::Identity() - d * d.transpose() / (n * n)) / n;
    return rotation(-x.theta) * proj;
}

}  // namespace mheslam
