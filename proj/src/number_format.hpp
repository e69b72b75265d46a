#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace gfmlab::detail {

/// Locale-independent shortest-ish representation used by every CSV writer.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace gfmlab::detail
