#include "lded/common.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace lded {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double parse_real(const std::string& s) {
    if (s == "nan" || s.empty()) return kNaN;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    return v;
}

}  // namespace lded
