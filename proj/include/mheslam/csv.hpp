#pragma once

#include <cstdio>
#include <string>

namespace mheslam {

/// Round-trip-exact decimal rendering of a double.
inline std::string csv_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace mheslam
