#include "lded/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "lded/csv.hpp"

namespace lded::fusion {

ResampleMode parse_resample_mode(const std::string& s) {
    if (s == "linear") return ResampleMode::linear;
    if (s == "hold") return ResampleMode::hold;
    throw std::invalid_argument("unknown resample mode '" + s + "'");
}

Resampled resample_features(const Series& series, const std::vector<double>& ticks, const ResampleConfig& cfg) {
    Resampled out;
    out.width = series.empty() ? 0 : series.front().values.size();
    out.values.assign(ticks.size() * out.width, kNaN);
    out.valid.assign(ticks.size(), 0);
    if (series.empty()) return out;

    std::vector<double> s(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        s[i] = series[i].t + cfg.time_offset;
        if (series[i].values.size() != out.width) throw DataError("series", i, "inconsistent feature width");
        if (i > 0 && !(s[i] > s[i - 1])) throw DataError("series", i, "timestamps not strictly increasing");
    }

    auto put = [&](std::size_t tick, std::size_t src) {
        std::copy(series[src].values.begin(), series[src].values.end(), out.values.begin() + tick * out.width);
        out.valid[tick] = 1;
    };
    // Nearest valid source sample within max_gap of tau; earlier wins ties.
    auto bridge = [&](std::size_t tick, double tau, std::size_t i) {
        std::size_t best = series.size();
        double best_d = INFINITY;
        for (std::size_t b = i + 1; b-- > 0;) {
            const double d = tau - s[b];
            if (d > cfg.max_gap) break;
            if (series[b].valid) {
                best = b;
                best_d = d;
                break;
            }
        }
        for (std::size_t f = i + 1; f < series.size(); ++f) {
            const double d = s[f] - tau;
            if (d > cfg.max_gap || d >= best_d) break;
            if (series[f].valid) {
                best = f;
                break;
            }
        }
        if (best < series.size()) put(tick, best);
    };

    for (std::size_t k = 0; k < ticks.size(); ++k) {
        const double tau = ticks[k];
        if (tau < s.front() || tau > s.back()) continue;
        const std::size_t i = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), tau) - s.begin()) - 1;
        if (s[i] == tau || cfg.mode == ResampleMode::hold) {
            if (series[i].valid) put(k, i);
            else bridge(k, tau, i);
            continue;
        }
        const std::size_t j = i + 1;
        if (!series[i].valid || !series[j].valid) {
            bridge(k, tau, i);
            continue;
        }
        const double w = (tau - s[i]) / (s[j] - s[i]);
        for (std::size_t c = 0; c < out.width; ++c) {
            const double a = series[i].values[c], b = series[j].values[c];
            out.values[k * out.width + c] = a + (b - a) * w;
        }
        out.valid[k] = 1;
    }
    return out;
}

Series to_series(const std::vector<meltpool::MeltPoolFeatures>& f) {
    Series s;
    s.reserve(f.size());
    for (const auto& x : f)
        s.push_back({x.t, {x.area_m00, x.mu20, x.mu02, x.mu11, x.hull_area, x.width_a, x.length_b}, x.valid});
    return s;
}

Series to_series(const std::vector<acoustic::AcousticFeatures>& f) {
    Series s;
    s.reserve(f.size());
    for (const auto& x : f) {
        Sample smp{x.t, {x.ae, x.sc, x.sbw, x.sr}, x.valid};
        smp.values.insert(smp.values.end(), x.mfcc.begin(), x.mfcc.end());
        s.push_back(std::move(smp));
    }
    return s;
}

Series to_series(const std::vector<thermal::ThermalFeatures>& f) {
    Series s;
    s.reserve(f.size());
    for (const auto& x : f) s.push_back({x.t, {x.peak, x.mean, x.variance, x.kurtosis}, x.valid});
    return s;
}

std::vector<double> robot_ticks(const std::vector<session::RobotSample>& robot) {
    std::vector<double> ticks;
    ticks.reserve(robot.size());
    for (std::size_t i = 0; i < robot.size(); ++i) {
        const double k = std::round(robot[i].t * kFusionRateHz);
        if (std::abs(robot[i].t - k / kFusionRateHz) > kGridTolerance)
            throw DataError("robot", i, "timestamp off the 250 Hz grid");
        ticks.push_back(k / kFusionRateHz);
    }
    return ticks;
}

FusedDataset fuse(const std::vector<session::RobotSample>& robot, const Resampled& mp, const Resampled& ac,
                  const Resampled& th) {
    const auto ticks = robot_ticks(robot);
    auto check = [&](const Resampled& r, std::size_t width, const char* name) {
        if (r.valid.size() != robot.size() || (r.width != width && r.width != 0))
            throw std::invalid_argument(std::string(name) + " stream does not match the robot grid");
    };
    check(mp, kMeltPoolChannels, "meltpool");
    check(ac, kAcousticChannels, "acoustic");
    check(th, kThermalChannels, "thermal");

    FusedDataset d;
    d.records.resize(robot.size());
    for (std::size_t i = 0; i < robot.size(); ++i) {
        auto& r = d.records[i];
        r.t = ticks[i];
        r.position = robot[i].position;
        r.laser_on = robot[i].laser_on;
        r.features.fill(kNaN);
        auto attach = [&](const Resampled& s, std::size_t offset, bool& flag) {
            flag = s.width != 0 && s.valid[i];
            if (flag) std::copy(s.row(i), s.row(i) + s.width, r.features.begin() + offset);
        };
        attach(mp, kMeltPoolOffset, r.valid_mp);
        attach(ac, kAcousticOffset, r.valid_ac);
        attach(th, kThermalOffset, r.valid_th);
    }
    return d;
}

FusedDataset fuse_streams(const std::vector<session::RobotSample>& robot,
                          const std::vector<meltpool::MeltPoolFeatures>& mp,
                          const std::vector<acoustic::AcousticFeatures>& ac,
                          const std::vector<thermal::ThermalFeatures>& th, const FusionConfig& cfg) {
    const auto ticks = robot_ticks(robot);
    auto run = [&](const Series& s, std::size_t width, const ResampleConfig& c) {
        Resampled r = resample_features(s, ticks, c);
        if (s.empty()) {
            r.width = width;
            r.values.assign(ticks.size() * width, kNaN);
        }
        return r;
    };
    return fuse(robot, run(to_series(mp), kMeltPoolChannels, cfg.meltpool),
                run(to_series(ac), kAcousticChannels, cfg.acoustic), run(to_series(th), kThermalChannels, cfg.thermal));
}

// ---- twin -------------------------------------------------------------------

const char* to_string(QualityLabel l) {
    switch (l) {
        case QualityLabel::ok: return "ok";
        case QualityLabel::keyhole_pore: return "keyhole_pore";
        case QualityLabel::crack: return "crack";
        case QualityLabel::under_built: return "under_built";
        case QualityLabel::over_built: return "over_built";
    }
    return "?";
}

QualityLabel parse_label(const std::string& s) {
    for (auto l : {QualityLabel::ok, QualityLabel::keyhole_pore, QualityLabel::crack, QualityLabel::under_built,
                   QualityLabel::over_built})
        if (s == to_string(l)) return l;
    throw std::invalid_argument("unknown quality label '" + s + "'");
}

void ChannelStats::add(double v) {
    ++n;
    if (n == 1) {
        mean = v;
        max = v;
        m2 = 0.0;
        return;
    }
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
    max = std::max(max, v);
}

VoxelGrid grid_for_box(const BoundingBox& box, double voxel_size) {
    if (!(voxel_size > 0)) throw std::invalid_argument("voxel size must be positive");
    auto n = [&](double lo, double hi) { return std::max(1, static_cast<int>(std::ceil((hi - lo) / voxel_size - 1e-9))); };
    return {box.min, voxel_size, {n(box.min.x, box.max.x), n(box.min.y, box.max.y), n(box.min.z, box.max.z)}};
}

const Voxel* DigitalTwin::find(int ix, int iy, int iz) const {
    const auto it = voxels.find(key(ix, iy, iz));
    return it == voxels.end() ? nullptr : &it->second;
}

std::uint64_t DigitalTwin::total_count() const {
    std::uint64_t n = 0;
    for (const auto& [k, v] : voxels) n += v.count;
    return n;
}

DigitalTwin voxelize(const FusedDataset& d, const VoxelGrid& grid) {
    if (!(grid.voxel_size > 0)) throw std::invalid_argument("voxel size must be positive");
    if (grid.dims[0] < 1 || grid.dims[1] < 1 || grid.dims[2] < 1) throw std::invalid_argument("dims must be >= 1");
    DigitalTwin t;
    t.grid = grid;
    for (const auto& r : d.records) {
        if (!r.laser_on) continue;
        const double f[3] = {std::floor((r.position.x - grid.origin.x) / grid.voxel_size),
                             std::floor((r.position.y - grid.origin.y) / grid.voxel_size),
                             std::floor((r.position.z - grid.origin.z) / grid.voxel_size)};
        bool inside = true;
        for (int a = 0; a < 3; ++a) inside = inside && f[a] >= 0 && f[a] < grid.dims[a];
        if (!inside) {
            ++t.out_of_bounds;
            continue;
        }
        const int ix = static_cast<int>(f[0]), iy = static_cast<int>(f[1]), iz = static_cast<int>(f[2]);
        Voxel& v = t.voxels[t.key(ix, iy, iz)];
        v.ix = ix;
        v.iy = iy;
        v.iz = iz;
        ++v.count;
        for (std::size_t c = 0; c < kFeatureChannels; ++c) {
            if (!r.valid(channel_modality(c)) || std::isnan(r.features[c])) continue;
            v.channels[c].add(r.features[c]);
        }
    }
    return t;
}

std::vector<std::string> twin_header() {
    std::vector<std::string> h = {"ix", "iy", "iz", "cx", "cy", "cz", "count"};
    for (const auto& n : feature_channel_names()) {
        h.push_back("mean_" + n);
        h.push_back("max_" + n);
        h.push_back("var_" + n);
    }
    h.push_back("label");
    return h;
}

void export_twin(const DigitalTwin& t, const std::filesystem::path& csv_path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(t.voxels.size());
    for (const auto& [k, v] : t.voxels) {
        const Vec3 c = t.grid.center(v.ix, v.iy, v.iz);
        std::vector<std::string> row = {std::to_string(v.ix), std::to_string(v.iy), std::to_string(v.iz),
                                        format_real(c.x),     format_real(c.y),     format_real(c.z),
                                        std::to_string(v.count)};
        for (const auto& ch : v.channels) {
            row.push_back(format_real(ch.mean));
            row.push_back(format_real(ch.max));
            row.push_back(format_real(ch.variance()));
        }
        row.emplace_back(to_string(v.label));
        rows.push_back(std::move(row));
    }
    csv::write(csv_path, twin_header(), rows);
}

void export_twin_meta(const DigitalTwin& t, const std::filesystem::path& json_path) {
    nlohmann::ordered_json j;
    j["origin"] = {t.grid.origin.x, t.grid.origin.y, t.grid.origin.z};
    j["voxel_size"] = t.grid.voxel_size;
    j["dims"] = t.grid.dims;
    j["out_of_bounds"] = t.out_of_bounds;
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot write " + json_path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + json_path.string());
}

DigitalTwin import_twin(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    DigitalTwin t;
    {
        std::ifstream in(json_path);
        if (!in) throw IoError("cannot read " + json_path.string());
        nlohmann::json j;
        try {
            in >> j;
            const auto o = j.at("origin");
            t.grid.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
            t.grid.voxel_size = j.at("voxel_size").get<double>();
            t.grid.dims = j.at("dims").get<std::array<int, 3>>();
            t.out_of_bounds = j.at("out_of_bounds").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError("twin_meta", 0, e.what());
        }
    }
    const auto table = csv::read(csv_path, "twin");
    if (table.header != twin_header()) throw DataError("twin", 0, "unexpected twin.csv header");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        Voxel v;
        try {
            v.ix = std::stoi(r[0]);
            v.iy = std::stoi(r[1]);
            v.iz = std::stoi(r[2]);
            v.count = std::stoull(r[6]);
            for (std::size_t c = 0; c < kFeatureChannels; ++c) {
                auto& ch = v.channels[c];
                ch.mean = parse_real(r[7 + 3 * c]);
                ch.max = parse_real(r[8 + 3 * c]);
                const double var = parse_real(r[9 + 3 * c]);
                ch.n = std::isnan(ch.mean) ? 0 : v.count;
                ch.m2 = ch.n == 0 ? 0.0 : var * static_cast<double>(ch.n);
            }
            v.label = parse_label(r.back());
        } catch (const std::exception& e) {
            throw DataError("twin", i, e.what());
        }
        t.voxels[t.key(v.ix, v.iy, v.iz)] = v;
    }
    return t;
}

}  // namespace lded::fusion
