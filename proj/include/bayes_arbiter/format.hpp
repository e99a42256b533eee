#pragma once

#include <cstdio>
#include <string>

namespace bayes_arbiter {

/// printf "%.10g", the numeric format of every text artifact.
inline std::string fmt_g10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace bayes_arbiter
