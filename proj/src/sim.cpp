#include "lded/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "lded/csv.hpp"

namespace lded::sim {

using json = nlohmann::ordered_json;
using fusion::QualityLabel;

namespace {

/// mt19937_64 with a hand-rolled Box-Muller so output does not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    double uniform() { return (static_cast<double>(g_() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 g_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double quantize(double v, double step) { return std::round(v / step) * step; }

bool is_keyhole_layer(const BuildSpec& s, int layer) {
    return std::find(s.keyhole_layers.begin(), s.keyhole_layers.end(), layer) != s.keyhole_layers.end();
}

}  // namespace

BuildSpec default_spec() {
    BuildSpec s;
    s.cracks = {{4, 21.2, 21.8}, {5, 27.0, 27.6}, {6, 30.6, 31.2}};
    s.keyhole_layers = {9, 10, 11};
    s.dents = {{6, 21.0, 6.0, 29.0, 14.0, 0.5}};
    return s;
}

BuildSpec clean_spec() {
    BuildSpec s;
    return s;
}

void check_spec(const BuildSpec& s) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("infeasible build spec: " + m); };
    if (s.layers < 3) fail("need at least 3 layers");
    if (!(s.layer_height > 0) || !(s.speed > 0) || !(s.wall_length > 0) || s.dwell < 0) fail("non-positive geometry");
    for (const auto& c : s.cracks) {
        const double start = c.layer * s.layer_time();
        if (c.layer < 0 || c.layer >= s.layers) fail("crack layer out of range");
        if (!(c.t0 < c.t1) || c.t0 < start || c.t1 > start + s.pass_time()) fail("crack window outside its pass");
        if (is_keyhole_layer(s, c.layer)) fail("crack and keyhole windows overlap");
    }
    for (int l : s.keyhole_layers)
        if (l < 0 || l >= s.layers) fail("keyhole layer out of range");
    for (const auto& d : s.dents) {
        if (d.layer < 0 || d.layer >= s.layers) fail("dent layer out of range");
        if (!(d.x0 < d.x1 && d.y0 < d.y1) || !(d.depth > 0)) fail("degenerate dent");
    }
}

PathState path_at(const BuildSpec& s, double t) {
    const double lt = s.layer_time();
    const int layer = std::clamp(static_cast<int>(std::floor(t / lt)), 0, s.layers - 1);
    const double u = t - layer * lt;
    PathState p;
    p.layer = layer;
    p.laser_on = u < s.pass_time();
    const double along = std::min(u, s.pass_time()) * s.speed;
    const double x = layer % 2 == 0 ? s.wall_x0 + along : s.wall_x0 + s.wall_length - along;
    p.position = {quantize(x, 1e-6), s.wall_y, quantize((layer + 0.5) * s.layer_height, 1e-6)};
    return p;
}

QualityLabel sample_label(const BuildSpec& s, double t, double z) {
    const int layer = static_cast<int>(std::floor(z / s.layer_height));
    for (const auto& c : s.cracks)
        if (c.layer == layer && t >= c.t0 && t < c.t1) return QualityLabel::crack;
    if (is_keyhole_layer(s, layer)) return QualityLabel::keyhole_pore;
    return QualityLabel::ok;
}

namespace {

std::vector<session::RobotSample> make_robot(const BuildSpec& s, double rate) {
    const auto n = static_cast<std::size_t>(std::floor(s.duration() * rate + 1e-9)) + 1;
    std::vector<session::RobotSample> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        const auto p = path_at(s, t);
        out[k] = {t, p.position, p.laser_on, s.speed};
    }
    return out;
}

std::vector<session::MeltPoolFrame> make_meltpool(const BuildSpec& s, const session::Manifest& m) {
    Rng rng(stream_seed(s.seed, 1));
    const double rate = m.rates.meltpool_hz;
    const auto n = static_cast<std::size_t>(std::floor(s.duration() * rate + 1e-9)) + 1;
    std::vector<session::MeltPoolFrame> out(n);
    const double cx0 = (m.image_width - 1) / 2.0, cy0 = (m.image_height - 1) / 2.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        const auto p = path_at(s, t);
        GrayImage img(m.image_width, m.image_height);
        double sx = 0, sy = 0, ang = 0, cx = cx0, cy = cy0;
        if (p.laser_on) {
            const double grow = std::pow(1.0 + s.mp_growth, p.layer);
            sx = 4.0 * grow * (1.0 + 0.02 * rng.normal());
            sy = 8.0 * grow * (1.0 + 0.02 * rng.normal());
            switch (sample_label(s, t, p.position.z)) {
                case QualityLabel::crack: sx *= s.crack_width_gain; break;
                case QualityLabel::keyhole_pore:
                    sx *= s.keyhole_gain;
                    sy *= s.keyhole_gain;
                    break;
                default: break;
            }
            ang = 0.03 * rng.normal();
            cx += 0.3 * rng.normal();
            cy += 0.3 * rng.normal();
        }
        const double c = std::cos(ang), sn = std::sin(ang);
        for (int y = 0; y < m.image_height; ++y)
            for (int x = 0; x < m.image_width; ++x) {
                double v = 20.0 + 3.0 * rng.normal();
                if (p.laser_on) {
                    const double dx = x - cx, dy = y - cy;
                    const double u = c * dx + sn * dy, w = -sn * dx + c * dy;
                    v += 200.0 * std::exp(-0.5 * (u * u / (sx * sx) + w * w / (sy * sy)));
                }
                img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
            }
        out[k] = {t, std::move(img)};
    }
    return out;
}

std::vector<session::ThermalFrame> make_thermal(const BuildSpec& s, const session::Manifest& m) {
    Rng rng(stream_seed(s.seed, 2));
    const double rate = m.rates.thermal_hz;
    const auto n = static_cast<std::size_t>(std::floor(s.duration() * rate + 1e-9)) + 1;
    std::vector<session::ThermalFrame> out(n);
    const double cx = (m.thermal_width - 1) / 2.0, cy = (m.thermal_height - 1) / 2.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        const auto p = path_at(s, t);
        double excess, sigma = 2.0 * std::pow(1.0 + s.mp_growth, p.layer);
        if (p.laser_on) {
            excess = 1650.0 + s.temp_drift * p.layer;
            if (sample_label(s, t, p.position.z) == QualityLabel::keyhole_pore) {
                excess += 150.0;
                sigma *= 1.1;
            }
        } else {
            const double since = t - (p.layer * s.layer_time() + s.pass_time());
            excess = 250.0 * std::exp(-since / 0.3);
        }
        Grid<float> g(m.thermal_width, m.thermal_height);
        for (int y = 0; y < m.thermal_height; ++y)
            for (int x = 0; x < m.thermal_width; ++x) {
                const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                g.at(x, y) = static_cast<float>(350.0 + excess * std::exp(-r2 / (2 * sigma * sigma)) + 3.0 * rng.normal());
            }
        out[k] = {t, std::move(g)};
    }
    return out;
}

session::AudioSignal make_audio(const BuildSpec& s, const session::Manifest& m) {
    Rng rng(stream_seed(s.seed, 3));
    session::AudioSignal a;
    a.rate = m.rates.audio_hz;
    const auto n = static_cast<std::size_t>(std::floor(s.duration() * a.rate + 1e-9)) + 1;
    a.samples.resize(n);
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / a.rate;
        const auto p = path_at(s, t);
        const double w = rng.normal();
        lp += 0.1 * (w - lp);
        double v = 0.01 * rng.normal();
        if (p.laser_on) {
            double lo = 0.7, hi = 0.3;
            switch (sample_label(s, t, p.position.z)) {
                case QualityLabel::crack:
                    lo = 0.55;
                    hi = 0.45;
                    break;
                case QualityLabel::keyhole_pore:
                    lo = 0.85;
                    hi = 0.15;
                    break;
                default: break;
            }
            v += 0.15 * (lo * 3.0 * lp + hi * (w - lp));
        }
        a.samples[i] = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0) / 32768.0;
    }
    return a;
}

std::vector<session::Scan> make_scans(const BuildSpec& s, const session::Manifest& m) {
    Rng rng(stream_seed(s.seed, 4));
    std::vector<session::Scan> out;
    const double step = 0.25;
    const int nx = static_cast<int>(std::lround(s.wall_length / step));
    const int ny = static_cast<int>(std::lround(s.scan_width / step));
    const double ylo = s.wall_y - s.scan_width / 2;
    for (int l = 0; l < s.layers; ++l) {
        session::Scan sc;
        sc.layer = l;
        sc.t = l * s.layer_time() + s.pass_time() + 0.5 * s.dwell;
        const double top = (l + 1) * s.layer_height;
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) {
                const double x = s.wall_x0 + i * step, y = ylo + j * step;
                double z = top + 0.02 * rng.normal();
                for (const auto& d : s.dents)
                    if (d.layer == l && x >= d.x0 && x < d.x1 && y >= d.y0 && y < d.y1) z -= d.depth;
                sc.cloud.points.push_back({x, y, quantize(z, 1e-6)});
            }
        // Substrate around the wall.
        for (double y = m.build_box.min.y; y <= m.build_box.max.y; y += 1.0)
            for (double x = m.build_box.min.x; x <= m.build_box.max.x; x += 1.0) {
                if (x >= s.wall_x0 && x <= s.wall_x0 + s.wall_length && y >= ylo && y <= ylo + s.scan_width) continue;
                sc.cloud.points.push_back({x, y, quantize(0.02 * rng.normal(), 1e-6)});
            }
        // Spatter above the surface.
        for (int k = 0; k < 5; ++k) {
            const double x = s.wall_x0 + s.wall_length * rng.uniform();
            const double y = ylo + s.scan_width * rng.uniform();
            sc.cloud.points.push_back({quantize(x, 1e-6), quantize(y, 1e-6), quantize(top + 1.0 + 2.0 * rng.uniform(), 1e-6)});
        }
        out.push_back(std::move(sc));
    }
    return out;
}

}  // namespace

Simulation simulate_build(const BuildSpec& spec) {
    check_spec(spec);
    Simulation sim;
    sim.truth.spec = spec;
    auto& s = sim.session;
    s.manifest.layer_height_mm = spec.layer_height;
    s.robot = make_robot(spec, s.manifest.rates.robot_hz);
    s.meltpool = make_meltpool(spec, s.manifest);
    s.thermal = make_thermal(spec, s.manifest);
    s.audio = make_audio(spec, s.manifest);
    s.scans = make_scans(spec, s.manifest);
    return sim;
}

// ---- ground truth -------------------------------------------------------------

namespace {

json spec_json(const BuildSpec& s) {
    json cracks = json::array(), dents = json::array();
    for (const auto& c : s.cracks) cracks.push_back({{"layer", c.layer}, {"t0", c.t0}, {"t1", c.t1}});
    for (const auto& d : s.dents)
        dents.push_back({{"layer", d.layer}, {"x0", d.x0}, {"y0", d.y0}, {"x1", d.x1}, {"y1", d.y1}, {"depth", d.depth}});
    return {{"wall_x0", s.wall_x0},
            {"wall_y", s.wall_y},
            {"wall_length", s.wall_length},
            {"scan_width", s.scan_width},
            {"layers", s.layers},
            {"layer_height", s.layer_height},
            {"speed", s.speed},
            {"dwell", s.dwell},
            {"power_w", s.power_w},
            {"crack_windows", cracks},
            {"keyhole_layers", s.keyhole_layers},
            {"dents", dents},
            {"crack_width_gain", s.crack_width_gain},
            {"keyhole_gain", s.keyhole_gain},
            {"mp_growth", s.mp_growth},
            {"temp_drift", s.temp_drift},
            {"seed", s.seed}};
}

/// Missing keys keep their defaults so partial spec files work.
BuildSpec spec_from(const json& j) {
    BuildSpec s;
    auto opt = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    opt("wall_x0", s.wall_x0);
    opt("wall_y", s.wall_y);
    opt("wall_length", s.wall_length);
    opt("scan_width", s.scan_width);
    opt("layers", s.layers);
    opt("layer_height", s.layer_height);
    opt("speed", s.speed);
    opt("dwell", s.dwell);
    opt("power_w", s.power_w);
    opt("keyhole_layers", s.keyhole_layers);
    opt("crack_width_gain", s.crack_width_gain);
    opt("keyhole_gain", s.keyhole_gain);
    opt("mp_growth", s.mp_growth);
    opt("temp_drift", s.temp_drift);
    opt("seed", s.seed);
    if (j.contains("crack_windows"))
        for (const auto& c : j.at("crack_windows"))
            s.cracks.push_back({c.at("layer").get<int>(), c.at("t0").get<double>(), c.at("t1").get<double>()});
    if (j.contains("dents"))
        for (const auto& d : j.at("dents"))
            s.dents.push_back({d.at("layer").get<int>(), d.at("x0").get<double>(), d.at("y0").get<double>(),
                               d.at("x1").get<double>(), d.at("y1").get<double>(), d.value("depth", 0.5)});
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
    const json j = {{"spec", spec_json(gt.spec)}, {"voxel_labels", "ground_truth_voxels.csv"}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
    try {
        return {spec_from(json::parse(slurp(path)).at("spec"))};
    } catch (const json::exception& e) {
        throw DataError("ground_truth", 0, e.what());
    }
}

BuildSpec spec_from_json_file(const std::filesystem::path& path) {
    try {
        BuildSpec s = spec_from(json::parse(slurp(path)));
        check_spec(s);
        return s;
    } catch (const json::exception& e) {
        throw DataError("spec", 0, e.what());
    }
}

std::map<std::int64_t, QualityLabel> ground_truth_twin(const GroundTruth& gt,
                                                       const std::vector<session::RobotSample>& robot,
                                                       const fusion::VoxelGrid& grid) {
    struct Votes {
        std::size_t n[3] = {0, 0, 0};  // ok, keyhole, crack
    };
    std::map<std::int64_t, Votes> votes;
    const auto nx = static_cast<std::int64_t>(grid.dims[0]), ny = static_cast<std::int64_t>(grid.dims[1]);
    for (const auto& r : robot) {
        if (!r.laser_on) continue;
        const double f[3] = {std::floor((r.position.x - grid.origin.x) / grid.voxel_size),
                             std::floor((r.position.y - grid.origin.y) / grid.voxel_size),
                             std::floor((r.position.z - grid.origin.z) / grid.voxel_size)};
        bool inside = true;
        for (int a = 0; a < 3; ++a) inside = inside && f[a] >= 0 && f[a] < grid.dims[a];
        if (!inside) continue;
        const std::int64_t key = static_cast<std::int64_t>(f[0]) + nx * (static_cast<std::int64_t>(f[1]) + ny * static_cast<std::int64_t>(f[2]));
        const auto l = sample_label(gt.spec, r.t, r.position.z);
        ++votes[key].n[l == QualityLabel::ok ? 0 : l == QualityLabel::keyhole_pore ? 1 : 2];
    }
    std::map<std::int64_t, QualityLabel> out;
    for (const auto& [key, v] : votes) {
        QualityLabel l = QualityLabel::ok;
        std::size_t best = v.n[0];
        if (v.n[1] > 0 && v.n[1] >= best) l = QualityLabel::keyhole_pore, best = v.n[1];
        if (v.n[2] > 0 && v.n[2] >= best) l = QualityLabel::crack;
        out[key] = l;
    }
    return out;
}

std::set<std::pair<int, int>> dent_cells(const GroundTruth& gt, int layer, Vec2 origin, double cell) {
    std::set<std::pair<int, int>> out;
    for (const auto& d : gt.spec.dents) {
        if (d.layer != layer) continue;
        const int i0 = static_cast<int>(std::ceil((d.x0 - origin.x) / cell - 1e-9));
        const int i1 = static_cast<int>(std::floor((d.x1 - origin.x) / cell + 1e-9));
        const int j0 = static_cast<int>(std::ceil((d.y0 - origin.y) / cell - 1e-9));
        const int j1 = static_cast<int>(std::floor((d.y1 - origin.y) / cell + 1e-9));
        for (int j = j0; j < j1; ++j)
            for (int i = i0; i < i1; ++i) out.insert({i, j});
    }
    return out;
}

void write_simulation(const Simulation& sim, const std::filesystem::path& dir) {
    session::store_session(sim.session, dir);
    write_ground_truth(sim.truth, dir / "ground_truth.json");
    const auto grid = fusion::grid_for_box(sim.session.manifest.build_box, sim.truth.spec.layer_height);
    const auto labels = ground_truth_twin(sim.truth, sim.session.robot, grid);
    std::vector<std::vector<std::string>> rows;
    const auto nx = static_cast<std::int64_t>(grid.dims[0]), ny = static_cast<std::int64_t>(grid.dims[1]);
    for (const auto& [key, l] : labels) {
        rows.push_back({std::to_string(key % nx), std::to_string((key / nx) % ny), std::to_string(key / (nx * ny)),
                        fusion::to_string(l)});
    }
    csv::write(dir / "ground_truth_voxels.csv", {"ix", "iy", "iz", "label"}, rows);
}

}  // namespace lded::sim
