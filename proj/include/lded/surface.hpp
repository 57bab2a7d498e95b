// Laser-scanner point clouds: cropping and statistical outlier removal,
// height-map rasterization, over/under-built classification against the
// nominal layer surface, region extraction and dent-filling toolpaths.
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "lded/image.hpp"
#include "lded/session.hpp"
#include "lded/toolpath.hpp"

namespace lded::surface {

using session::PointCloud;

struct FilterConfig {
    std::size_t k = 8;
    double sigma_mult = 2.0;
    double substrate_margin = 0.1;  // mm above the box floor that still counts as substrate
};

struct FilterResult {
    PointCloud cloud;
    std::size_t cropped = 0;   // points outside the box or on the substrate
    std::size_t outliers = 0;  // removed by the kNN distance test
    [[nodiscard]] bool empty() const { return cloud.points.empty(); }
};

/// Crop to `box` with its floor raised by the substrate margin, then drop
/// points whose mean distance to their k nearest neighbours exceeds
/// mean + sigma_mult * stddev over the cropped cloud. Order is preserved.
FilterResult filter_point_cloud(const PointCloud& c, const BoundingBox& box, const FilterConfig& cfg = {});

/// Mean distance of each point to its k nearest other points (rtree search).
std::vector<double> mean_knn_distances(const std::vector<Vec3>& pts, std::size_t k);

struct HeightMap {
    Vec2 origin;
    double cell = 0.5;
    Grid<double> height;  // NaN where no point fell
    Grid<int> count;

    [[nodiscard]] int nx() const { return height.width(); }
    [[nodiscard]] int ny() const { return height.height(); }
};

/// Max z per cell [x0 + i*s, x0 + (i+1)*s) x [y0 + j*s, ...). The origin
/// defaults to the cloud's minimum x, y. Throws std::invalid_argument on an
/// empty cloud, non-positive cell size, or points left of the origin.
HeightMap rasterize_heightmap(const PointCloud& c, double cell, std::optional<Vec2> origin = std::nullopt);

enum class CellClass { ok, under_built, over_built, no_data };

const char* to_string(CellClass c);

struct DeviationMap {
    Vec2 origin;
    double cell = 0.5;
    double nominal = 0.0;
    double tau = 0.0;
    Grid<double> deviation;  // NaN for no_data
    Grid<CellClass> cls;
};

/// under_built when deviation < -tau, over_built when > tau, else ok.
DeviationMap deviation_map(const HeightMap& h, double nominal, double tau);

struct SurfaceRegion {
    CellClass kind = CellClass::under_built;
    std::vector<std::pair<int, int>> cells;  // sorted
    std::vector<std::vector<Vec2>> boundary;  // closed outlines, interior on the left
    double mean_deviation = 0.0;
    double nominal = 0.0;
    Vec2 origin;
    double cell = 0.5;

    [[nodiscard]] Footprint footprint() const;
    [[nodiscard]] BoundingBox bounds() const;  // xy extent; z = nominal
};

/// 4-connected components per defect kind, at least min_cells each, largest first.
std::vector<SurfaceRegion> extract_surface_regions(const DeviationMap& d, std::size_t min_cells = 4);

/// Outline of a cell set as closed polygons with collinear vertices merged.
std::vector<std::vector<Vec2>> trace_outline(const std::set<std::pair<int, int>>& cells, Vec2 origin, double cell);

/// Zigzag DEPOSIT fill of an under-built region at its nominal height. Throws
/// std::invalid_argument for other region kinds.
Toolpath fill_toolpath(const SurfaceRegion& r, double hatch, double feed_mm_s, double power_w);

struct SurfaceConfig {
    FilterConfig filter;
    double cell = 0.5;
    double tau_fraction = 0.25;  // tau = tau_fraction * layer height
    std::size_t min_cells = 4;
};

/// Filter, rasterize on the build-box xy grid and extract regions for one scan
/// whose nominal top is (layer + 1) * layer height.
std::vector<SurfaceRegion> analyze_scan(const session::Scan& scan, const session::Manifest& m,
                                        const SurfaceConfig& cfg = {});

/// CSV: region_id,kind,cells,mean_dev_mm,min_x,min_y,max_x,max_y
void write_regions(const std::vector<SurfaceRegion>& regions, const std::filesystem::path& path);

}  // namespace lded::surface
