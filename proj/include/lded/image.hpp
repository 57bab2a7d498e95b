// Row-major 2D rasters and connected-component labeling.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lded {

template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height) {
        if (width < 1 || height < 1) throw std::invalid_argument("grid dimensions must be >= 1");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool same_shape(const auto& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }
    [[nodiscard]] bool in_bounds(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

private:
    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// 8-bit grayscale frame.
struct GrayImage : Grid<std::uint8_t> {
    using Grid::Grid;
};

/// Cells hold 0 or 1.
struct BinaryMask : Grid<std::uint8_t> {
    using Grid::Grid;
    [[nodiscard]] std::size_t count() const;
};

enum class Connectivity { four = 4, eight = 8 };

/// Component labels: 0 = background, 1..n in raster order of first pixel.
struct ComponentLabels {
    Grid<int> labels;
    std::vector<std::size_t> sizes;  // sizes[i] is the pixel count of label i + 1
};

ComponentLabels label_components(const BinaryMask& mask, Connectivity conn);

/// Largest component as its own mask; ties go to the component seen first in
/// raster order. Empty input gives an all-zero mask.
BinaryMask largest_component(const BinaryMask& mask, Connectivity conn);

}  // namespace lded
