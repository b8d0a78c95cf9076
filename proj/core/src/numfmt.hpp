#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace funcdec::detail {

// Round-trippable rendering; used in canonical keys.
inline std::string exact(double v) {
    if (v == 0.0) v = 0.0; // fold -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Shortest readable rendering for display.
inline std::string pretty(double v) {
    if (v == 0.0) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// "c*x" with unit coefficients elided; the sign is kept in the result.
inline std::string term(double c, const std::string& x) {
    if (c == 1.0) return x;
    if (c == -1.0) return "-" + x;
    return pretty(c) + "*" + x;
}

inline std::string join_terms(const std::vector<std::string>& parts, double offset) {
    std::string s;
    for (const auto& p : parts) {
        if (s.empty()) {
            s = p;
        } else if (!p.empty() && p[0] == '-') {
            s += " - " + p.substr(1);
        } else {
            s += " + " + p;
        }
    }
    if (offset != 0.0 || s.empty()) {
        if (s.empty()) return pretty(offset);
        s += offset < 0 ? " - " + pretty(-offset) : " + " + pretty(offset);
    }
    return s;
}

} // namespace funcdec::detail
