#include "lded/surface.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "lded/csv.hpp"

namespace lded::surface {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using Entry = std::pair<BPoint, std::size_t>;

double dist(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

std::vector<double> mean_knn_distances(const std::vector<Vec3>& pts, std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<double> out(pts.size(), 0.0);
    if (pts.size() < 2) return out;
    const std::size_t kk = std::min(k, pts.size() - 1);

    std::vector<Entry> entries;
    entries.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) entries.emplace_back(BPoint(pts[i].x, pts[i].y, pts[i].z), i);
    const bgi::rtree<Entry, bgi::quadratic<16>> tree(entries.begin(), entries.end());

    std::vector<Entry> hits;
    std::vector<double> d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        hits.clear();
        tree.query(bgi::nearest(entries[i].first, static_cast<unsigned>(kk + 1)), std::back_inserter(hits));
        d.clear();
        bool self = false;
        for (const auto& h : hits) {
            if (h.second == i && !self) {
                self = true;
                continue;
            }
            d.push_back(dist(pts[i], pts[h.second]));
        }
        // With duplicates the point itself may lose a tie; drop the farthest.
        std::sort(d.begin(), d.end());
        d.resize(kk);
        double s = 0.0;
        for (double v : d) s += v;
        out[i] = s / static_cast<double>(kk);
    }
    return out;
}

FilterResult filter_point_cloud(const PointCloud& c, const BoundingBox& box, const FilterConfig& cfg) {
    if (cfg.k < 1) throw std::invalid_argument("k must be >= 1");
    FilterResult r;
    BoundingBox crop = box;
    crop.min.z += cfg.substrate_margin;
    std::vector<Vec3> kept;
    for (const auto& p : c.points) {
        // Points exactly at a raised floor still count as substrate.
        const bool above = cfg.substrate_margin > 0 ? p.z > crop.min.z : true;
        if (crop.contains(p) && above) kept.push_back(p);
    }
    r.cropped = c.points.size() - kept.size();
    if (kept.empty()) return r;

    const auto md = mean_knn_distances(kept, cfg.k);
    double mean = 0.0;
    for (double v : md) mean += v;
    mean /= static_cast<double>(md.size());
    double var = 0.0;
    for (double v : md) var += (v - mean) * (v - mean);
    const double limit = mean + cfg.sigma_mult * std::sqrt(var / static_cast<double>(md.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (md[i] <= limit) r.cloud.points.push_back(kept[i]);
        else ++r.outliers;
    }
    return r;
}

HeightMap rasterize_heightmap(const PointCloud& c, double cell, std::optional<Vec2> origin) {
    if (c.points.empty()) throw std::invalid_argument("cannot rasterize an empty cloud");
    if (!(cell > 0)) throw std::invalid_argument("cell size must be positive");
    double minx = c.points[0].x, miny = c.points[0].y, maxx = minx, maxy = miny;
    for (const auto& p : c.points) {
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
    }
    const Vec2 o = origin.value_or(Vec2{minx, miny});
    if (minx < o.x || miny < o.y) throw std::invalid_argument("points lie before the height-map origin");
    const int nx = static_cast<int>(std::floor((maxx - o.x) / cell)) + 1;
    const int ny = static_cast<int>(std::floor((maxy - o.y) / cell)) + 1;
    HeightMap h{o, cell, Grid<double>(nx, ny, kNaN), Grid<int>(nx, ny, 0)};
    for (const auto& p : c.points) {
        const int i = static_cast<int>(std::floor((p.x - o.x) / cell));
        const int j = static_cast<int>(std::floor((p.y - o.y) / cell));
        double& z = h.height.at(i, j);
        z = h.count.at(i, j) == 0 ? p.z : std::max(z, p.z);
        ++h.count.at(i, j);
    }
    return h;
}

const char* to_string(CellClass c) {
    switch (c) {
        case CellClass::ok: return "ok";
        case CellClass::under_built: return "under_built";
        case CellClass::over_built: return "over_built";
        case CellClass::no_data: return "no_data";
    }
    return "?";
}

DeviationMap deviation_map(const HeightMap& h, double nominal, double tau) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    DeviationMap d{h.origin, h.cell, nominal, tau, Grid<double>(h.nx(), h.ny(), kNaN),
                   Grid<CellClass>(h.nx(), h.ny(), CellClass::no_data)};
    for (std::size_t i = 0; i < h.height.size(); ++i) {
        if (h.count.data()[i] == 0) continue;
        const double dev = h.height.data()[i] - nominal;
        d.deviation.data()[i] = dev;
        d.cls.data()[i] = dev < -tau ? CellClass::under_built : dev > tau ? CellClass::over_built : CellClass::ok;
    }
    return d;
}

Footprint SurfaceRegion::footprint() const {
    Footprint fp{origin, cell, {}};
    fp.cells.insert(cells.begin(), cells.end());
    return fp;
}

BoundingBox SurfaceRegion::bounds() const {
    BoundingBox b{{INFINITY, INFINITY, nominal}, {-INFINITY, -INFINITY, nominal}};
    for (const auto& [i, j] : cells) {
        b.min.x = std::min(b.min.x, origin.x + i * cell);
        b.min.y = std::min(b.min.y, origin.y + j * cell);
        b.max.x = std::max(b.max.x, origin.x + (i + 1) * cell);
        b.max.y = std::max(b.max.y, origin.y + (j + 1) * cell);
    }
    return b;
}

std::vector<std::vector<Vec2>> trace_outline(const std::set<std::pair<int, int>>& cells, Vec2 origin, double cell) {
    using V = std::pair<int, int>;
    std::multimap<V, V> edges;  // start -> end, interior on the left
    auto in = [&](int i, int j) { return cells.count({i, j}) > 0; };
    for (const auto& [i, j] : cells) {
        if (!in(i, j - 1)) edges.insert({{i, j}, {i + 1, j}});
        if (!in(i + 1, j)) edges.insert({{i + 1, j}, {i + 1, j + 1}});
        if (!in(i, j + 1)) edges.insert({{i + 1, j + 1}, {i, j + 1}});
        if (!in(i - 1, j)) edges.insert({{i, j + 1}, {i, j}});
    }
    std::vector<std::vector<Vec2>> loops;
    while (!edges.empty()) {
        auto it = edges.begin();
        const V first = it->first;
        std::vector<V> loop{first};
        V cur = it->second;
        edges.erase(it);
        while (cur != first) {
            loop.push_back(cur);
            auto nx = edges.find(cur);
            if (nx == edges.end()) throw std::logic_error("open outline");
            cur = nx->second;
            edges.erase(nx);
        }
        // Keep only corners.
        std::vector<Vec2> poly;
        const std::size_t n = loop.size();
        for (std::size_t k = 0; k < n; ++k) {
            const V& a = loop[(k + n - 1) % n];
            const V& b = loop[k];
            const V& c = loop[(k + 1) % n];
            const long cross = static_cast<long>(b.first - a.first) * (c.second - b.second) -
                               static_cast<long>(b.second - a.second) * (c.first - b.first);
            if (cross != 0) poly.push_back({origin.x + b.first * cell, origin.y + b.second * cell});
        }
        loops.push_back(std::move(poly));
    }
    return loops;
}

std::vector<SurfaceRegion> extract_surface_regions(const DeviationMap& d, std::size_t min_cells) {
    if (min_cells < 1) throw std::invalid_argument("min_cells must be >= 1");
    std::vector<SurfaceRegion> out;
    for (CellClass kind : {CellClass::under_built, CellClass::over_built}) {
        BinaryMask m(d.cls.width(), d.cls.height());
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = d.cls.data()[i] == kind;
        const auto lab = label_components(m, Connectivity::four);
        std::vector<SurfaceRegion> found(lab.sizes.size());
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x) {
                const int l = lab.labels.at(x, y);
                if (l == 0) continue;
                auto& r = found[static_cast<std::size_t>(l - 1)];
                r.cells.push_back({x, y});
                r.mean_deviation += d.deviation.at(x, y);
            }
        for (auto& r : found) {
            if (r.cells.size() < min_cells) continue;
            r.kind = kind;
            r.mean_deviation /= static_cast<double>(r.cells.size());
            r.nominal = d.nominal;
            r.origin = d.origin;
            r.cell = d.cell;
            std::sort(r.cells.begin(), r.cells.end());
            r.boundary = trace_outline({r.cells.begin(), r.cells.end()}, d.origin, d.cell);
            out.push_back(std::move(r));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SurfaceRegion& a, const SurfaceRegion& b) { return a.cells.size() > b.cells.size(); });
    return out;
}

Toolpath fill_toolpath(const SurfaceRegion& r, double hatch, double feed_mm_s, double power_w) {
    if (r.kind != CellClass::under_built) throw std::invalid_argument("fill_toolpath needs an under_built region");
    return raster_fill(r.footprint(), {hatch, r.nominal, ToolMode::deposit, power_w, feed_mm_s});
}

std::vector<SurfaceRegion> analyze_scan(const session::Scan& scan, const session::Manifest& m,
                                        const SurfaceConfig& cfg) {
    const auto filtered = filter_point_cloud(scan.cloud, m.build_box, cfg.filter);
    if (filtered.empty()) return {};
    const Vec2 origin{m.build_box.min.x, m.build_box.min.y};
    const auto h = rasterize_heightmap(filtered.cloud, cfg.cell, origin);
    const double nominal = (scan.layer + 1) * m.layer_height_mm;
    return extract_surface_regions(deviation_map(h, nominal, cfg.tau_fraction * m.layer_height_mm), cfg.min_cells);
}

void write_regions(const std::vector<SurfaceRegion>& regions, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& r = regions[i];
        const auto b = r.bounds();
        rows.push_back({std::to_string(i), to_string(r.kind), std::to_string(r.cells.size()),
                        format_real(r.mean_deviation), format_real(b.min.x), format_real(b.min.y),
                        format_real(b.max.x), format_real(b.max.y)});
    }
    csv::write(path, {"region_id", "kind", "cells", "mean_dev_mm", "min_x", "min_y", "max_x", "max_y"}, rows);
}

}  // namespace lded::surface
