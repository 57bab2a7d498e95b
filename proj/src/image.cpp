#include "lded/image.hpp"

#include <algorithm>
#include <utility>

namespace lded {

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(data().begin(), data().end(), std::uint8_t{1}));
}

ComponentLabels label_components(const BinaryMask& mask, Connectivity conn) {
    const int w = mask.width();
    const int h = mask.height();
    ComponentLabels out{Grid<int>(w, h, 0), {}};
    std::vector<std::pair<int, int>> stack;
    static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int n_dirs = conn == Connectivity::four ? 4 : 8;

    int next = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || out.labels.at(x, y)) continue;
            ++next;
            std::size_t size = 0;
            out.labels.at(x, y) = next;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++size;
                for (int d = 0; d < n_dirs; ++d) {
                    const int nx = cx + kDx[d];
                    const int ny = cy + kDy[d];
                    if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny) || out.labels.at(nx, ny)) continue;
                    out.labels.at(nx, ny) = next;
                    stack.emplace_back(nx, ny);
                }
            }
            out.sizes.push_back(size);
        }
    }
    return out;
}

BinaryMask largest_component(const BinaryMask& mask, Connectivity conn) {
    BinaryMask out(mask.width(), mask.height(), 0);
    const auto comps = label_components(mask, conn);
    if (comps.sizes.empty()) return out;
    const auto best = std::max_element(comps.sizes.begin(), comps.sizes.end());
    const int keep = static_cast<int>(best - comps.sizes.begin()) + 1;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = comps.labels.data()[i] == keep ? 1 : 0;
    }
    return out;
}

}  // namespace lded
