#pragma once

#include <Eigen/Core>

#include "mheslam/types.hpp"

namespace mheslam {

/// 2-D rotation matrix R(angle).
Eigen::Matrix2d rotation(double angle);

/// One step of the planar unicycle dynamics with additive noise.
EgoState dynamics_step(const EgoState& x, const ControlInput& u, const ProcessNoise& v);

/// Full-state ego measurement y = x + xi. The heading component is the raw
/// sum; wrapping happens in the residuals, not here.
Eigen::Vector3d ego_measurement(const EgoState& x, const Eigen::Vector3d& xi);

/// Body-frame landmark measurement R(-theta) * (lm - p) / alpha + xi, where
/// alpha is the separation for BearingOnly and 1 for Range.
/// Throws DegenerateGeometry at zero separation.
Eigen::Vector2d landmark_measurement(const EgoState& x, const LandmarkState& lm,
                                     const Eigen::Vector2d& xi, const SensorModel& model);

/// Noiseless landmark measurement.
Eigen::Vector2d landmark_measurement(const EgoState& x, const LandmarkState& lm,
                                     const SensorModel& model);

/// True iff r_min <= ||lm - p|| <= r_max.
bool visibility(const EgoState& x, const LandmarkState& lm, const SensorModel& model);

/// d(dynamics_step)/d(x), evaluated at (x, u).
Eigen::Matrix3d dynamics_jacobian_state(const EgoState& x, const ControlInput& u);

/// d(dynamics_step)/d(v); constant identity.
Eigen::Matrix3d dynamics_jacobian_noise();

/// d(ego_measurement)/d(x); constant identity.
Eigen::Matrix3d ego_measurement_jacobian();

/// d(landmark_measurement)/d(x) as a 2x3 block over (px, py, theta).
/// Throws DegenerateGeometry for the bearing model at zero separation.
Eigen::Matrix<double, 2, 3> landmark_measurement_jacobian_ego(const EgoState& x,
                                                              const LandmarkState& lm,
                                                              const SensorModel& model);

/// d(landmark_measurement)/d(lm), 2x2.
Eigen::Matrix2d landmark_measurement_jacobian_landmark(const EgoState& x,
                                                       const LandmarkState& lm,
                                                       const SensorModel& model);

}  // namespace mheslam
