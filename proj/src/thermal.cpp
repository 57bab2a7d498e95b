#include "lded/thermal.hpp"

#include <algorithm>
#include <cmath>

#include "lded/csv.hpp"

namespace lded::thermal {

BinaryMask segment_roi(const Grid<float>& apparent, double haz_threshold) {
    if (!(haz_threshold > 0)) throw std::invalid_argument("haz threshold must be positive");
    BinaryMask hot(apparent.width(), apparent.height());
    for (std::size_t i = 0; i < apparent.size(); ++i) hot.data()[i] = apparent.data()[i] >= haz_threshold ? 1 : 0;
    return largest_component(hot, Connectivity::eight);
}

EmissivityMap build_emissivity_map(const Grid<float>& apparent, double melt_threshold, double haz_threshold,
                                   const EmissivityLevels& levels) {
    if (!(melt_threshold > 0)) throw std::invalid_argument("melt threshold must be positive");
    const BinaryMask roi = segment_roi(apparent, haz_threshold);
    EmissivityMap eps(apparent.width(), apparent.height(), levels.background);
    for (std::size_t i = 0; i < apparent.size(); ++i) {
        if (apparent.data()[i] >= melt_threshold) eps.data()[i] = levels.molten;
        else if (roi.data()[i]) eps.data()[i] = levels.haz;
    }
    return eps;
}

TemperatureField correct_emissivity(const Grid<float>& apparent, const EmissivityMap& eps) {
    if (!apparent.same_shape(eps)) throw std::invalid_argument("emissivity map shape mismatch");
    TemperatureField out(apparent.width(), apparent.height());
    for (std::size_t i = 0; i < apparent.size(); ++i) {
        const double e = eps.data()[i];
        if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("emissivity must lie in (0, 1]");
        const double t = apparent.data()[i];
        out.data()[i] = e == 1.0 ? t : t * std::pow(e, -0.25);
    }
    return out;
}

ThermalFeatures sample_stats(const std::vector<double>& v) {
    ThermalFeatures f;
    f.roi_pixels = v.size();
    if (v.empty()) return f;
    f.valid = true;
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    f.mean = sum / n;
    f.peak = *std::max_element(v.begin(), v.end());
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = (x - f.mean) * (x - f.mean);
        m2 += d;
        m4 += d * d;
    }
    m2 /= n;
    m4 /= n;
    f.variance = m2;
    if (m2 > 0.0) f.kurtosis = m4 / (m2 * m2);
    else f.degenerate = true;
    return f;
}

ThermalFeatures thermal_stats(const TemperatureField& temps, const BinaryMask& roi) {
    if (!temps.same_shape(roi)) throw std::invalid_argument("roi shape mismatch");
    std::vector<double> v;
    for (std::size_t i = 0; i < temps.size(); ++i)
        if (roi.data()[i]) v.push_back(temps.data()[i]);
    return sample_stats(v);
}

ThermalFeatures extract_thermal_features(const session::ThermalFrame& frame, const ThermalConfig& cfg) {
    const BinaryMask roi = segment_roi(frame.kelvin, cfg.haz_threshold_k);
    const EmissivityMap eps = build_emissivity_map(frame.kelvin, cfg.melt_threshold_k, cfg.haz_threshold_k, cfg.levels);
    ThermalFeatures f = thermal_stats(correct_emissivity(frame.kelvin, eps), roi);
    f.t = frame.t;
    return f;
}

void write_features(const std::vector<ThermalFeatures>& feats, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(feats.size());
    for (const auto& f : feats) {
        rows.push_back({format_real(f.t), format_real(f.peak), format_real(f.mean), format_real(f.variance),
                        format_real(f.kurtosis), std::to_string(f.roi_pixels), f.valid ? "1" : "0"});
    }
    csv::write(path, {"t", "peak", "mean", "variance", "kurtosis", "roi_pixels", "valid"}, rows);
}

std::vector<ThermalFeatures> read_features(const std::filesystem::path& path) {
    const auto table = csv::read(path, "thermal_features");
    std::vector<ThermalFeatures> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.size() != 7) throw DataError("thermal_features", i, "expected 7 columns");
        ThermalFeatures f;
        try {
            f.t = parse_real(r[0]);
            f.peak = parse_real(r[1]);
            f.mean = parse_real(r[2]);
            f.variance = parse_real(r[3]);
            f.kurtosis = parse_real(r[4]);
            f.roi_pixels = static_cast<std::size_t>(std::stoull(r[5]));
        } catch (const std::exception& e) {
            throw DataError("thermal_features", i, e.what());
        }
        f.valid = r[6] == "1";
        f.degenerate = f.valid && std::isnan(f.kurtosis);
        out.push_back(f);
    }
    return out;
}

}  // namespace lded::thermal
