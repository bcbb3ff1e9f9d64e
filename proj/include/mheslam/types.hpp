#pragma once

#include <Eigen/Core>

namespace mheslam {

/// Planar robot pose (x, y, heading). Heading is kept in (-pi, pi] by every
/// operation that writes it.
struct EgoState {
    double px = 0.0;
    double py = 0.0;
    double theta = 0.0;

    Eigen::Vector3d vec() const { return {px, py, theta}; }
    static EgoState from_vec(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
    Eigen::Vector2d position() const { return {px, py}; }
};

/// Linear and angular velocity command per step.
struct ControlInput {
    double v_lin = 0.0;
    double v_ang = 0.0;
};

/// Additive process noise on the planar dynamics.
struct ProcessNoise {
    double v1 = 0.0;
    double v2 = 0.0;
    double v_theta = 0.0;

    Eigen::Vector3d vec() const { return {v1, v2, v_theta}; }
    static ProcessNoise from_vec(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

/// Static 2-D landmark position.
struct LandmarkState {
    double px = 0.0;
    double py = 0.0;

    Eigen::Vector2d vec() const { return {px, py}; }
    static LandmarkState from_vec(const Eigen::Vector2d& v) { return {v(0), v(1)}; }
};

enum class SensorKind {
    BearingOnly,  // unit ray toward the landmark in the body frame
    Range,        // full displacement to the landmark in the body frame
};

/// Landmark sensor: measurement kind plus the visibility annulus [r_min, r_max].
struct SensorModel {
    SensorKind kind = SensorKind::BearingOnly;
    double r_min = 1e-3;
    double r_max = 2.0;
};

}  // namespace mheslam
