// Shared geometry, error types and formatting helpers.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace lded {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

struct BoundingBox {
    Vec3 min;
    Vec3 max;

    [[nodiscard]] bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }
};

/// Failure to read or write a file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad record, non-monotonic stream, ...).
class DataError : public std::runtime_error {
public:
    DataError(std::string stream, std::size_t index, const std::string& what)
        : std::runtime_error(stream + "[" + std::to_string(index) + "]: " + what),
          stream_(std::move(stream)),
          index_(index) {}

    [[nodiscard]] const std::string& stream() const noexcept { return stream_; }
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::string stream_;
    std::size_t index_;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Text representation used by every CSV writer: 9 significant digits,
/// "nan" for missing values.
std::string format_real(double v);

/// Inverse of format_real; throws std::invalid_argument on garbage.
double parse_real(const std::string& s);

}  // namespace lded
