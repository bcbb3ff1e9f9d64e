#pragma once

#include <cmath>
#include <numbers>

namespace mheslam {

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a)
{
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) {
        r += 2.0 * std::numbers::pi;
    }
    return r;
}

/// Wrapped difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b)
{
    return wrap_angle(a - b);
}

}  // namespace mheslam
