// Robot toolpaths: straight segments tagged with process mode and laser state,
// plus the zigzag raster used for both deposition fills and machining passes.
#pragma once

#include <filesystem>
#include <set>
#include <utility>
#include <vector>

#include "lded/common.hpp"

namespace lded {

enum class ToolMode { deposit, machine };

const char* to_string(ToolMode m);
ToolMode parse_tool_mode(const std::string& s);

struct Segment {
    ToolMode mode = ToolMode::deposit;
    Vec3 start;
    Vec3 end;
    bool laser_on = false;
    double power_w = 0.0;  // 0 whenever the laser is off
    double feed_mm_s = 0.0;
};

using Toolpath = std::vector<Segment>;

/// A set of cells (i, j) on the grid x = origin.x + i * cell, y likewise.
struct Footprint {
    Vec2 origin;
    double cell = 1.0;
    std::set<std::pair<int, int>> cells;

    /// Cell under (x, y); half-open cell intervals.
    [[nodiscard]] std::pair<int, int> cell_of(double x, double y) const;
    [[nodiscard]] bool contains(double x, double y) const;
    [[nodiscard]] bool empty() const { return cells.empty(); }
};

struct RasterOptions {
    double hatch = 0.5;
    double z = 0.0;
    ToolMode mode = ToolMode::deposit;
    double power_w = 0.0;
    double feed_mm_s = 10.0;
};

/// ceil(extent_y / hatch) over the footprint's bounding box.
std::size_t pass_count(const Footprint& fp, double hatch);

/// Zigzag over the bounding box: passes along x at y = ymin + (i + 0.5) * hatch,
/// alternating direction, joined by laser-off connectors. In deposit mode the
/// laser is on exactly over footprint cells; machine passes are all laser-off.
/// Throws std::invalid_argument for hatch <= 0.
Toolpath raster_fill(const Footprint& fp, const RasterOptions& opt);

/// CSV: seq,mode,x0,y0,z0,x1,y1,z1,laser_on,power_w,feed_mm_s
void write_toolpath(const Toolpath& path, const std::filesystem::path& file);
Toolpath read_toolpath(const std::filesystem::path& file);

}  // namespace lded
