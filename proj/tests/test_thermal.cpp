#include <doctest.h>

#include <cmath>
#include <random>

#include "lded/thermal.hpp"

using namespace lded;
using namespace lded::thermal;

namespace {

Grid<float> field(int w, int h, float v) { return Grid<float>(w, h, v); }

void blob(Grid<float>& g, int x0, int y0, int w, int h, float v) {
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) g.at(x, y) = v;
}

}  // namespace

TEST_CASE("emissivity map levels") {
    CHECK(kEmissivityMolten == 0.3);
    CHECK(kEmissivityHaz == 0.5);

    auto cold = field(16, 16, 300.0f);
    const auto e0 = build_emissivity_map(cold, 1400, 600);
    for (double e : e0.data()) CHECK(e == 1.0);

    auto g = field(16, 16, 300.0f);
    blob(g, 4, 4, 5, 5, 900.0f);
    g.at(6, 6) = 1600.0f;
    const auto e = build_emissivity_map(g, 1400, 600);
    int molten = 0, haz = 0;
    for (double v : e.data()) {
        molten += v == 0.3;
        haz += v == 0.5;
    }
    CHECK(molten == 1);
    CHECK(haz == 24);
    CHECK(e.at(6, 6) == 0.3);
    CHECK(e.at(0, 0) == 1.0);
}

TEST_CASE("emissivity correction") {
    auto g = field(8, 8, 0.0f);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> d(300.0f, 2500.0f);
    for (auto& v : g.data()) v = d(rng);
    const auto same = correct_emissivity(g, EmissivityMap(8, 8, 1.0));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(same.data()[i] == static_cast<double>(g.data()[i]));

    auto one = field(1, 1, 1000.0f);
    // 1000 / 0.3^(1/4) evaluated as nested square roots
    CHECK(correct_emissivity(one, EmissivityMap(1, 1, 0.3)).at(0, 0) == doctest::Approx(1000.0 / std::sqrt(std::sqrt(0.3))).epsilon(1e-14));
    auto half = field(1, 1, 500.0f);
    CHECK(correct_emissivity(half, EmissivityMap(1, 1, 0.0625)).at(0, 0) == doctest::Approx(1000.0).epsilon(1e-15));

    // Lower emissivity, hotter true temperature.
    double prev = 0;
    for (double eps = 1.0; eps > 0.05; eps -= 0.05) {
        const double t = correct_emissivity(one, EmissivityMap(1, 1, eps)).at(0, 0);
        CHECK(t > prev);
        prev = t;
    }

    CHECK_THROWS_AS(correct_emissivity(one, EmissivityMap(1, 1, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(correct_emissivity(one, EmissivityMap(1, 1, 1.5)), std::invalid_argument);
    CHECK_THROWS_AS(correct_emissivity(one, EmissivityMap(2, 1, 0.5)), std::invalid_argument);
}

TEST_CASE("roi segmentation") {
    auto cold = field(20, 20, 300.0f);
    CHECK(segment_roi(cold, 600).count() == 0);

    auto g = field(20, 20, 300.0f);
    blob(g, 0, 0, 12, 10, 800.0f);   // 120 cells
    blob(g, 14, 14, 6, 5, 800.0f);   // 30 cells
    const auto roi = segment_roi(g, 600);
    CHECK(roi.count() == 120);
    CHECK(roi.at(0, 0) == 1);
    CHECK(roi.at(15, 15) == 0);
}

TEST_CASE("temperature statistics") {
    const auto f = sample_stats({1, 2, 3, 4});
    CHECK(f.mean == 2.5);
    CHECK(f.variance == 1.25);
    CHECK(f.kurtosis == doctest::Approx(1.64).epsilon(1e-15));
    CHECK(f.peak == 4.0);

    const auto c = sample_stats(std::vector<double>(50, 1200.0));
    CHECK(c.peak == 1200.0);
    CHECK(c.mean == 1200.0);
    CHECK(c.variance == 0.0);
    CHECK(std::isnan(c.kurtosis));
    CHECK(c.degenerate);
    CHECK(c.valid);

    const auto e = sample_stats({});
    CHECK_FALSE(e.valid);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(1500.0, 80.0);
    std::vector<double> g(100000);
    for (auto& v : g) v = n(rng);
    CHECK(std::abs(sample_stats(g).kurtosis - 3.0) <= 0.1);
}

TEST_CASE("frame statistics match a naive double loop") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(500.0, 2000.0);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 30; ++trial) {
        TemperatureField t(12, 9);
        BinaryMask m(12, 9);
        for (auto& v : t.data()) v = d(rng);
        for (auto& v : m.data()) v = coin(rng);
        if (m.count() == 0) continue;
        double n = 0, s = 0, mx = -1;
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 12; ++x)
                if (m.at(x, y)) {
                    n += 1;
                    s += t.at(x, y);
                    mx = std::max(mx, t.at(x, y));
                }
        const double mean = s / n;
        double s2 = 0, s4 = 0;
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 12; ++x)
                if (m.at(x, y)) {
                    s2 += std::pow(t.at(x, y) - mean, 2);
                    s4 += std::pow(t.at(x, y) - mean, 4);
                }
        const auto f = thermal_stats(t, m);
        CHECK(f.peak == mx);
        CHECK(f.mean == doctest::Approx(mean).epsilon(1e-9));
        CHECK(f.variance == doctest::Approx(s2 / n).epsilon(1e-9));
        CHECK(f.kurtosis == doctest::Approx((s4 / n) / std::pow(s2 / n, 2)).epsilon(1e-9));
        CHECK(f.peak >= f.mean);
        CHECK(f.kurtosis >= 1.0);
    }
}

TEST_CASE("frame pipeline") {
    session::ThermalFrame fr;
    fr.t = 0.5;
    fr.kelvin = field(24, 24, 350.0f);
    blob(fr.kelvin, 8, 8, 6, 6, 900.0f);
    blob(fr.kelvin, 10, 10, 2, 2, 1500.0f);
    const auto f = extract_thermal_features(fr);
    CHECK(f.valid);
    CHECK(f.t == 0.5);
    CHECK(f.roi_pixels == 36);
    CHECK(f.peak == doctest::Approx(1500.0 * std::pow(0.3, -0.25)));
    const double mean = (32 * 900.0 * std::pow(0.5, -0.25) + 4 * 1500.0 * std::pow(0.3, -0.25)) / 36;
    CHECK(f.mean == doctest::Approx(mean));

    session::ThermalFrame dark{1.0, field(24, 24, 300.0f)};
    CHECK_FALSE(extract_thermal_features(dark).valid);
}
