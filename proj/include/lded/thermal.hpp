// Emissivity correction of the thermal camera stream and the per-frame
// temperature statistics of the melt pool plus heat-affected zone.
#pragma once

#include <filesystem>
#include <vector>

#include "lded/common.hpp"
#include "lded/image.hpp"
#include "lded/session.hpp"

namespace lded::thermal {

inline constexpr double kEmissivityMolten = 0.3;
inline constexpr double kEmissivityHaz = 0.5;

struct EmissivityLevels {
    double molten = kEmissivityMolten;
    double haz = kEmissivityHaz;
    double background = 1.0;
};

using EmissivityMap = Grid<double>;
using TemperatureField = Grid<double>;

/// Largest 8-connected component of cells at or above haz_threshold.
BinaryMask segment_roi(const Grid<float>& apparent, double haz_threshold);

/// Molten cells (T >= melt_threshold) get levels.molten, the rest of the ROI
/// levels.haz, everything else levels.background.
EmissivityMap build_emissivity_map(const Grid<float>& apparent, double melt_threshold, double haz_threshold,
                                   const EmissivityLevels& levels = {});

/// Graybody total-radiance correction T * eps^(-1/4). Throws
/// std::invalid_argument on a shape mismatch or eps outside (0, 1].
TemperatureField correct_emissivity(const Grid<float>& apparent, const EmissivityMap& eps);

struct ThermalFeatures {
    double t = 0.0;
    double peak = kNaN;
    double mean = kNaN;
    double variance = kNaN;
    double kurtosis = kNaN;  // Pearson, m4 / m2^2
    std::size_t roi_pixels = 0;
    bool valid = false;       // ROI non-empty
    bool degenerate = false;  // zero variance, kurtosis undefined
};

ThermalFeatures thermal_stats(const TemperatureField& temps, const BinaryMask& roi);

/// Same statistics over a plain sample list.
ThermalFeatures sample_stats(const std::vector<double>& values);

struct ThermalConfig {
    double melt_threshold_k = 1400.0;
    double haz_threshold_k = 600.0;
    EmissivityLevels levels;
};

/// Segment on apparent temperature, build the map, correct, and summarize the
/// corrected ROI.
ThermalFeatures extract_thermal_features(const session::ThermalFrame& frame, const ThermalConfig& cfg = {});

/// CSV: t,peak,mean,variance,kurtosis,roi_pixels,valid
void write_features(const std::vector<ThermalFeatures>& f, const std::filesystem::path& path);
std::vector<ThermalFeatures> read_features(const std::filesystem::path& path);

}  // namespace lded::thermal
