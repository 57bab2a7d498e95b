// Pipeline configuration, the individual pipeline stages used by the
// command-line tool, and the tool's entry point.
//
// Artifacts written into the output directory:
//   features_meltpool.csv features_acoustic.csv features_thermal.csv   features
//   fused.csv                                                          fuse
//   twin.csv twin_meta.json                                            twin
//   twin_labeled.csv regions.csv surface_regions.csv [metrics.csv]     detect
//   plan.csv toolpath.csv                                              correct
//   report_meltpool.csv report_features.csv report_layers.csv          report
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lded/acoustic.hpp"
#include "lded/fusion.hpp"
#include "lded/meltpool.hpp"
#include "lded/quality.hpp"
#include "lded/session.hpp"
#include "lded/surface.hpp"
#include "lded/thermal.hpp"

namespace lded::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitUsage = 64;

struct PipelineConfig {
    meltpool::MeltPoolConfig meltpool;
    acoustic::AcousticConfig acoustic;
    acoustic::GateConfig gate;
    bool raw_audio = false;
    // Thermal thresholds come from the manifest unless the config sets them.
    std::optional<double> melt_threshold_k, haz_threshold_k;
    fusion::FusionConfig fusion;
    double voxel_size = 0.5;
    quality::RuleThresholds rules;
    std::size_t knn_k = 5;
    surface::SurfaceConfig surface;
    quality::ToolpathParams toolpath;
};

/// Reads a JSON config; missing keys keep their defaults, unknown keys and
/// out-of-range values throw std::invalid_argument.
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws std::invalid_argument naming the first out-of-range field.
void check_config(const PipelineConfig& c);

/// Audio of the longest laser-off stretch of the robot stream, or empty when
/// that stretch is shorter than the gate's minimum profile length.
std::vector<double> noise_profile(const session::Session& s);

struct FeatureSet {
    std::vector<meltpool::MeltPoolFeatures> meltpool;
    std::vector<acoustic::AcousticFeatures> acoustic;
    std::vector<thermal::ThermalFeatures> thermal;
    std::vector<std::string> warnings;
};

FeatureSet compute_features(const session::Session& s, const PipelineConfig& c);

fusion::VoxelGrid twin_grid(const session::Manifest& m, const PipelineConfig& c);

/// Surface regions of every scan, in scan order.
std::vector<surface::SurfaceRegion> surface_regions(const session::Session& s, const PipelineConfig& c);

/// Entry point of the ldedtwin tool. Never throws.
int run(int argc, const char* const* argv);

}  // namespace lded::cli
