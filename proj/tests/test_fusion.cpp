#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "lded/fusion.hpp"
#include "oracles.hpp"

using namespace lded;
using namespace lded::fusion;

namespace {

std::vector<double> grid_ticks(double t0, double t1) {
    std::vector<double> t;
    for (int k = static_cast<int>(std::ceil(t0 * 250)); k <= static_cast<int>(std::floor(t1 * 250)); ++k)
        t.push_back(k / 250.0);
    return t;
}

Series sampled(double rate, double t0, double t1, auto f) {
    Series s;
    for (int k = 0; t0 + k / rate <= t1 + 1e-12; ++k) {
        const double t = t0 + k / rate;
        s.push_back({t, {f(t)}, true});
    }
    return s;
}

std::vector<session::RobotSample> robot(double seconds) {
    std::vector<session::RobotSample> r;
    const int n = static_cast<int>(std::lround(seconds * 250));
    for (int k = 0; k <= n; ++k) r.push_back({k / 250.0, {5.0 + 0.04 * k, 10.0, 0.25}, k % 50 < 40, 10.0});
    return r;
}

std::filesystem::path tmp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("resampling") {
    CHECK(kFusionRateHz == 250.0);
    const auto ticks = grid_ticks(0, 1);

    SUBCASE("constant series, both modes") {
        const auto s = sampled(30, 0, 1, [](double) { return 7.0; });
        for (auto mode : {ResampleMode::linear, ResampleMode::hold}) {
            const auto r = resample_features(s, ticks, {mode, 0.1, 0.0});
            for (std::size_t k = 0; k < ticks.size(); ++k) {
                CHECK(r.valid[k]);
                CHECK(r.row(k)[0] == 7.0);
            }
        }
    }
    SUBCASE("ramp is exact under linear interpolation") {
        const auto s = sampled(30, 0, 1, [](double t) { return t; });
        const auto r = resample_features(s, ticks);
        for (std::size_t k = 0; k < ticks.size(); ++k) CHECK(std::abs(r.row(k)[0] - ticks[k]) <= 1e-12);
    }
    SUBCASE("sine within the interpolation error bound") {
        const double A = 1.5, f = 2.0, dt = 1.0 / 120;
        const auto s = sampled(120, 0, 1, [&](double t) { return A * std::sin(2 * std::numbers::pi * f * t); });
        const auto r = resample_features(s, ticks);
        const double bound = 0.5 * std::pow(2 * std::numbers::pi * f * dt, 2) * A;
        double worst = 0;
        for (std::size_t k = 0; k < ticks.size(); ++k)
            worst = std::max(worst, std::abs(r.row(k)[0] - A * std::sin(2 * std::numbers::pi * f * ticks[k])));
        CHECK(worst <= bound);
    }
    SUBCASE("hold takes the latest sample") {
        Series s{{0.0, {1}, true}, {0.1, {2}, true}, {0.2, {3}, true}};
        const auto r = resample_features(s, {0.0, 0.05, 0.1, 0.15, 0.2, 0.25}, {ResampleMode::hold, 0.1, 0});
        CHECK(r.row(1)[0] == 1);
        CHECK(r.row(3)[0] == 2);
        CHECK(r.row(4)[0] == 3);
        CHECK_FALSE(r.valid[5]);
    }
    SUBCASE("outside the source span is invalid") {
        const auto s = sampled(86, 0.5, 1.0, [](double t) { return t; });
        const auto r = resample_features(s, ticks);
        for (std::size_t k = 0; k < ticks.size(); ++k) {
            const bool inside = ticks[k] >= s.front().t && ticks[k] <= s.back().t;
            CHECK(bool(r.valid[k]) == inside);
            if (!inside) CHECK(std::isnan(r.row(k)[0]));
        }
    }
    SUBCASE("invalid samples are bridged only within max_gap") {
        Series s;
        for (int i = 0; i <= 30; ++i) s.push_back({i / 30.0, {double(i)}, !(i >= 10 && i <= 20)});
        const auto r = resample_features(s, ticks);
        for (std::size_t k = 0; k < ticks.size(); ++k) {
            const double t = ticks[k];
            const double nearest_valid = std::min(std::abs(t - 9 / 30.0), std::abs(t - 21 / 30.0));
            if (t > 9 / 30.0 && t < 21 / 30.0) {
                CHECK(bool(r.valid[k]) == (nearest_valid <= 0.1));
                if (r.valid[k]) CHECK((r.row(k)[0] == 9.0 || r.row(k)[0] == 21.0));
            } else {
                CHECK(r.valid[k]);
            }
        }
    }
    SUBCASE("exact source times reproduce the source value") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-5, 5);
        Series s;
        for (int i = 0; i <= 50; ++i) s.push_back({i / 50.0, {u(rng), u(rng)}, true});
        const auto r = resample_features(s, ticks);
        for (std::size_t k = 0; k < ticks.size(); k += 5) {
            CHECK(r.row(k)[0] == s[k / 5].values[0]);
            CHECK(r.row(k)[1] == s[k / 5].values[1]);
        }
    }
    SUBCASE("validity survives extension") {
        auto s = sampled(30, 0, 0.5, [](double t) { return t; });
        const auto a = resample_features(s, ticks);
        const auto more = sampled(30, 0, 1, [](double t) { return t; });
        const auto b = resample_features(more, ticks);
        for (std::size_t k = 0; k < ticks.size(); ++k)
            if (a.valid[k]) CHECK(b.valid[k]);
    }
    SUBCASE("time offset") {
        const auto s = sampled(30, 0, 0.5, [](double t) { return t; });
        const auto r = resample_features(s, ticks, {ResampleMode::linear, 0.1, 0.2});
        CHECK_FALSE(r.valid[0]);
        CHECK(r.valid[50]);
        CHECK(r.row(50)[0] == doctest::Approx(0.0));
    }
    SUBCASE("unsorted input") {
        Series s{{0.0, {1}, true}, {0.2, {2}, true}, {0.1, {3}, true}};
        CHECK_THROWS_AS(resample_features(s, ticks), DataError);
    }
}

TEST_CASE("fusion") {
    const auto rb = robot(1.0);
    std::vector<meltpool::MeltPoolFeatures> mp;
    for (int i = 0; i <= 30; ++i) {
        meltpool::MeltPoolFeatures f;
        f.t = i / 30.0;
        f.area_m00 = 100 + i;
        f.mu20 = f.mu02 = f.mu11 = f.hull_area = f.width_a = f.length_b = 1.0;
        f.valid = true;
        mp.push_back(f);
    }
    std::vector<acoustic::AcousticFeatures> ac;
    for (int i = 0; i < 40; ++i) {
        acoustic::AcousticFeatures f;
        f.t = 0.5 + i / 86.0;
        f.ae = f.sc = f.sbw = f.sr = 1.0;
        f.valid = true;
        ac.push_back(f);
    }
    std::vector<thermal::ThermalFeatures> th;
    const auto d = fuse_streams(rb, mp, ac, th);
    REQUIRE(d.records.size() == 251);
    for (std::size_t k = 0; k < d.records.size(); ++k) {
        const auto& r = d.records[k];
        CHECK(r.t == k / 250.0);
        CHECK(r.position.x == rb[k].position.x);
        CHECK(r.laser_on == rb[k].laser_on);
        CHECK(r.valid_mp);
        CHECK(r.valid_ac == (r.t >= 0.5 && r.t <= ac.back().t));
        CHECK_FALSE(r.valid_th);
    }
    CHECK(d.records[100].position.x == rb[100].position.x);

    auto off = rb;
    off[7].t += 1e-6;
    try {
        fuse_streams(off, mp, ac, th);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.stream() == "robot");
        CHECK(e.index() == 7);
    }

    Resampled short_mp{kMeltPoolChannels, std::vector<double>(10 * kMeltPoolChannels), std::vector<std::uint8_t>(10)};
    Resampled empty{};
    empty.valid.assign(rb.size(), 0);
    CHECK_THROWS_AS(fuse(rb, short_mp, empty, empty), std::invalid_argument);
}

namespace {

FusedDataset random_dataset(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> pos(-1, 6), val(-10, 10);
    std::bernoulli_distribution coin(0.8), nan(0.05);
    FusedDataset d;
    for (std::size_t i = 0; i < n; ++i) {
        FusedRecord r;
        r.t = static_cast<double>(i) / 250.0;
        r.position = {pos(rng), pos(rng), pos(rng)};
        r.laser_on = coin(rng);
        r.valid_mp = coin(rng);
        r.valid_ac = coin(rng);
        r.valid_th = coin(rng);
        for (auto& f : r.features) f = nan(rng) ? kNaN : val(rng);
        d.records.push_back(r);
    }
    return d;
}

}  // namespace

TEST_CASE("voxelization") {
    const VoxelGrid g{{0, 0, 0}, 1.0, {5, 5, 5}};

    SUBCASE("one position") {
        FusedDataset d;
        for (int i = 0; i < 20; ++i) {
            FusedRecord r;
            r.position = {2.5, 1.5, 0.5};
            r.laser_on = i % 4 != 0;
            d.records.push_back(r);
        }
        const auto t = voxelize(d, g);
        REQUIRE(t.voxels.size() == 1);
        CHECK(t.voxels.begin()->second.count == 15);
        CHECK(t.voxels.begin()->second.layer() == 0);
    }
    SUBCASE("laser-off records never land") {
        FusedDataset d;
        FusedRecord r;
        r.position = {1, 1, 1};
        d.records.assign(10, r);
        CHECK(voxelize(d, g).voxels.empty());
    }
    SUBCASE("streaming statistics match the two-pass oracle; counts are conserved") {
        std::mt19937_64 rng(99);
        const auto d = random_dataset(rng, 3000);
        const auto t = voxelize(d, g);
        std::size_t on = 0;
        for (const auto& r : d.records) on += r.laser_on;
        CHECK(t.total_count() + t.out_of_bounds == on);

        std::map<std::int64_t, std::vector<const FusedRecord*>> members;
        for (const auto& r : d.records) {
            if (!r.laser_on) continue;
            const int ix = int(std::floor(r.position.x)), iy = int(std::floor(r.position.y)),
                      iz = int(std::floor(r.position.z));
            if (ix < 0 || iy < 0 || iz < 0 || ix >= 5 || iy >= 5 || iz >= 5) continue;
            members[t.key(ix, iy, iz)].push_back(&r);
        }
        CHECK(members.size() == t.voxels.size());
        for (const auto& [key, recs] : members) {
            const auto& v = t.voxels.at(key);
            CHECK(v.count == recs.size());
            for (std::size_t c = 0; c < kFeatureChannels; ++c) {
                std::vector<double> vals;
                for (const auto* r : recs)
                    if (r->valid(channel_modality(c)) && !std::isnan(r->features[c])) vals.push_back(r->features[c]);
                if (vals.empty()) {
                    CHECK(std::isnan(v.channels[c].mean));
                    continue;
                }
                const auto o = oracle::two_pass(vals);
                CHECK(v.channels[c].mean == doctest::Approx(o.mean).epsilon(1e-9).scale(10));
                CHECK(v.channels[c].variance() == doctest::Approx(o.var).epsilon(1e-9));
                CHECK(v.channels[c].max == o.max);
            }
        }
    }
    SUBCASE("halving the voxel size refines every occupied voxel") {
        std::mt19937_64 rng(5);
        const auto d = random_dataset(rng, 500);
        const auto coarse = voxelize(d, g);
        const auto fine = voxelize(d, {{0, 0, 0}, 0.5, {10, 10, 10}});
        CHECK(fine.total_count() == coarse.total_count());
        for (const auto& [k, v] : coarse.voxels) {
            std::uint64_t n = 0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int c = 0; c < 2; ++c)
                        if (const auto* ch = fine.find(2 * v.ix + a, 2 * v.iy + b, 2 * v.iz + c)) n += ch->count;
            CHECK(n == v.count);
        }
    }
    CHECK_THROWS_AS(voxelize({}, {{0, 0, 0}, 0.0, {1, 1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(voxelize({}, {{0, 0, 0}, 1.0, {0, 1, 1}}), std::invalid_argument);
}

TEST_CASE("twin export") {
    const VoxelGrid g{{0, 0, 0}, 0.5, {100, 40, 16}};
    DigitalTwin empty;
    empty.grid = g;
    export_twin(empty, tmp("lded_twin_empty.csv"));
    std::ifstream in(tmp("lded_twin_empty.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1);

    FusedDataset one;
    FusedRecord r;
    r.laser_on = true;
    r.position = {3.3, 4.4, 0.25};
    r.valid_mp = true;
    r.features.fill(1.0);
    one.records.push_back(r);
    export_twin(voxelize(one, g), tmp("lded_twin_one.csv"));
    std::ifstream in1(tmp("lded_twin_one.csv"));
    lines = 0;
    while (std::getline(in1, line)) ++lines;
    CHECK(lines == 2);

    std::mt19937_64 rng(3);
    auto d = random_dataset(rng, 2000);
    auto t = voxelize(d, {{0, 0, 0}, 0.5, {12, 12, 12}});
    t.voxels.begin()->second.label = QualityLabel::crack;
    export_twin(t, tmp("lded_twin_a.csv"));
    export_twin_meta(t, tmp("lded_twin_a.json"));
    const auto back = import_twin(tmp("lded_twin_a.csv"), tmp("lded_twin_a.json"));
    CHECK(back.voxels.size() == t.voxels.size());
    CHECK(back.out_of_bounds == t.out_of_bounds);
    CHECK(back.grid.dims == t.grid.dims);
    CHECK(back.voxels.begin()->second.label == QualityLabel::crack);
    export_twin(back, tmp("lded_twin_b.csv"));
    std::ifstream a(tmp("lded_twin_a.csv")), b(tmp("lded_twin_b.csv"));
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
    for (auto n : {"lded_twin_empty.csv", "lded_twin_one.csv", "lded_twin_a.csv", "lded_twin_a.json", "lded_twin_b.csv"})
        std::filesystem::remove(tmp(n));
}
