#include "lded/toolpath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lded/csv.hpp"

namespace lded {

const char* to_string(ToolMode m) { return m == ToolMode::deposit ? "DEPOSIT" : "MACHINE"; }

ToolMode parse_tool_mode(const std::string& s) {
    if (s == "DEPOSIT") return ToolMode::deposit;
    if (s == "MACHINE") return ToolMode::machine;
    throw std::invalid_argument("unknown tool mode '" + s + "'");
}

std::pair<int, int> Footprint::cell_of(double x, double y) const {
    return {static_cast<int>(std::floor((x - origin.x) / cell)), static_cast<int>(std::floor((y - origin.y) / cell))};
}

bool Footprint::contains(double x, double y) const { return cells.count(cell_of(x, y)) > 0; }

namespace {

struct Bounds {
    int i0, i1, j0, j1;
};

Bounds bounds(const Footprint& fp) {
    Bounds b{std::numeric_limits<int>::max(), std::numeric_limits<int>::min(), std::numeric_limits<int>::max(),
             std::numeric_limits<int>::min()};
    for (const auto& [i, j] : fp.cells) {
        b.i0 = std::min(b.i0, i);
        b.i1 = std::max(b.i1, i);
        b.j0 = std::min(b.j0, j);
        b.j1 = std::max(b.j1, j);
    }
    return b;
}

}  // namespace

std::size_t pass_count(const Footprint& fp, double hatch) {
    if (!(hatch > 0)) throw std::invalid_argument("hatch must be positive");
    if (fp.empty()) return 0;
    const Bounds b = bounds(fp);
    const double extent = (b.j1 - b.j0 + 1) * fp.cell;
    // Tolerate representation error when hatch divides the extent.
    return static_cast<std::size_t>(std::ceil(extent / hatch - 1e-9));
}

Toolpath raster_fill(const Footprint& fp, const RasterOptions& opt) {
    const std::size_t passes = pass_count(fp, opt.hatch);
    Toolpath out;
    if (passes == 0) return out;
    const Bounds b = bounds(fp);
    const double xmin = fp.origin.x + b.i0 * fp.cell;
    const double ymin = fp.origin.y + b.j0 * fp.cell;
    const bool deposit = opt.mode == ToolMode::deposit;

    auto emit = [&](Vec3 a, Vec3 e, bool on) {
        out.push_back({opt.mode, a, e, on, on ? opt.power_w : 0.0, opt.feed_mm_s});
    };

    for (std::size_t p = 0; p < passes; ++p) {
        const double y = ymin + (static_cast<double>(p) + 0.5) * opt.hatch;
        const int j = fp.cell_of(xmin, y).second;
        // Runs of equal laser state along the row, left to right.
        std::vector<std::pair<int, bool>> runs;  // (first cell index, state)
        for (int i = b.i0; i <= b.i1; ++i) {
            const bool on = deposit && fp.cells.count({i, j}) > 0;
            if (runs.empty() || runs.back().second != on) runs.push_back({i, on});
        }
        std::vector<std::pair<double, double>> spans;  // x extents of each run
        std::vector<bool> states;
        for (std::size_t r = 0; r < runs.size(); ++r) {
            const int end = r + 1 < runs.size() ? runs[r + 1].first : b.i1 + 1;
            spans.push_back({fp.origin.x + runs[r].first * fp.cell, fp.origin.x + end * fp.cell});
            states.push_back(runs[r].second);
        }
        if (p % 2 == 1) {
            std::reverse(spans.begin(), spans.end());
            std::reverse(states.begin(), states.end());
            for (auto& s : spans) std::swap(s.first, s.second);
        }
        if (!out.empty()) emit(out.back().end, {spans.front().first, y, opt.z}, false);
        for (std::size_t r = 0; r < spans.size(); ++r)
            emit({spans[r].first, y, opt.z}, {spans[r].second, y, opt.z}, states[r]);
    }
    return out;
}

void write_toolpath(const Toolpath& path, const std::filesystem::path& file) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        const auto& s = path[i];
        rows.push_back({std::to_string(i), to_string(s.mode), format_real(s.start.x), format_real(s.start.y),
                        format_real(s.start.z), format_real(s.end.x), format_real(s.end.y), format_real(s.end.z),
                        s.laser_on ? "1" : "0", format_real(s.power_w), format_real(s.feed_mm_s)});
    }
    csv::write(file, {"seq", "mode", "x0", "y0", "z0", "x1", "y1", "z1", "laser_on", "power_w", "feed_mm_s"}, rows);
}

Toolpath read_toolpath(const std::filesystem::path& file) {
    const auto table = csv::read(file, "toolpath");
    Toolpath out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.size() != 11) throw DataError("toolpath", i, "expected 11 columns");
        try {
            Segment s;
            s.mode = parse_tool_mode(r[1]);
            s.start = {parse_real(r[2]), parse_real(r[3]), parse_real(r[4])};
            s.end = {parse_real(r[5]), parse_real(r[6]), parse_real(r[7])};
            s.laser_on = r[8] == "1";
            s.power_w = parse_real(r[9]);
            s.feed_mm_s = parse_real(r[10]);
            out.push_back(s);
        } catch (const std::invalid_argument& e) {
            throw DataError("toolpath", i, e.what());
        }
    }
    return out;
}

}  // namespace lded
