// Spatiotemporal fusion: feature streams resampled onto the 250 Hz robot
// clock, joined with TCP positions, and aggregated into a voxel twin.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "lded/acoustic.hpp"
#include "lded/fused.hpp"
#include "lded/meltpool.hpp"
#include "lded/session.hpp"
#include "lded/thermal.hpp"

namespace lded::fusion {

// ---- resampling -------------------------------------------------------------

enum class ResampleMode { linear, hold };

ResampleMode parse_resample_mode(const std::string& s);

struct Sample {
    double t = 0.0;
    std::vector<double> values;
    bool valid = true;
};

using Series = std::vector<Sample>;

struct ResampleConfig {
    ResampleMode mode = ResampleMode::linear;
    double max_gap = 0.1;      // s; bridge invalid samples by holding the nearest valid one
    double time_offset = 0.0;  // s added to every source timestamp
};

struct Resampled {
    std::size_t width = 0;
    std::vector<double> values;  // ticks x width, NaN where invalid
    std::vector<std::uint8_t> valid;

    [[nodiscard]] const double* row(std::size_t tick) const { return values.data() + tick * width; }
};

/// Resample `series` (strictly increasing times, equal widths) onto `ticks`.
/// Ticks outside [first, last] source time are invalid. Throws DataError on an
/// unsorted series.
Resampled resample_features(const Series& series, const std::vector<double>& ticks, const ResampleConfig& cfg = {});

Series to_series(const std::vector<meltpool::MeltPoolFeatures>& f);
Series to_series(const std::vector<acoustic::AcousticFeatures>& f);
Series to_series(const std::vector<thermal::ThermalFeatures>& f);

// ---- fusion -----------------------------------------------------------------

/// Tolerance for a robot timestamp to count as the tick k / 250.
inline constexpr double kGridTolerance = 1e-9;

/// One record per robot sample with t snapped to k / 250; position and laser
/// state are copied. Throws DataError("robot", i) for an off-grid sample and
/// std::invalid_argument when a resampled stream has the wrong length.
FusedDataset fuse(const std::vector<session::RobotSample>& robot, const Resampled& mp, const Resampled& ac,
                  const Resampled& th);

/// Robot timestamps as the fusion tick vector.
std::vector<double> robot_ticks(const std::vector<session::RobotSample>& robot);

struct FusionConfig {
    ResampleConfig meltpool;
    ResampleConfig acoustic;
    ResampleConfig thermal;
};

FusedDataset fuse_streams(const std::vector<session::RobotSample>& robot,
                          const std::vector<meltpool::MeltPoolFeatures>& mp,
                          const std::vector<acoustic::AcousticFeatures>& ac,
                          const std::vector<thermal::ThermalFeatures>& th, const FusionConfig& cfg = {});

// ---- twin -------------------------------------------------------------------

enum class QualityLabel { ok, keyhole_pore, crack, under_built, over_built };

const char* to_string(QualityLabel l);
QualityLabel parse_label(const std::string& s);

/// Streaming mean / population variance / max of one channel.
struct ChannelStats {
    std::uint64_t n = 0;
    double mean = kNaN;
    double m2 = 0.0;
    double max = kNaN;

    void add(double v);
    [[nodiscard]] double variance() const { return n == 0 ? kNaN : m2 / static_cast<double>(n); }
};

struct Voxel {
    int ix = 0, iy = 0, iz = 0;
    std::uint64_t count = 0;
    std::array<ChannelStats, kFeatureChannels> channels{};
    QualityLabel label = QualityLabel::ok;

    [[nodiscard]] int layer() const { return iz; }
    [[nodiscard]] double mean(std::size_t channel) const { return channels[channel].mean; }
};

struct VoxelGrid {
    Vec3 origin;
    double voxel_size = 0.5;
    std::array<int, 3> dims{1, 1, 1};

    [[nodiscard]] Vec3 center(int ix, int iy, int iz) const {
        return {origin.x + (ix + 0.5) * voxel_size, origin.y + (iy + 0.5) * voxel_size,
                origin.z + (iz + 0.5) * voxel_size};
    }
};

/// Grid covering `box` at `voxel_size` (dims rounded up).
VoxelGrid grid_for_box(const BoundingBox& box, double voxel_size);

struct DigitalTwin {
    VoxelGrid grid;
    std::uint64_t out_of_bounds = 0;
    std::map<std::int64_t, Voxel> voxels;  // keyed by ix + nx * (iy + ny * iz)

    [[nodiscard]] std::int64_t key(int ix, int iy, int iz) const {
        return ix + static_cast<std::int64_t>(grid.dims[0]) *
                        (iy + static_cast<std::int64_t>(grid.dims[1]) * iz);
    }
    [[nodiscard]] const Voxel* find(int ix, int iy, int iz) const;
    [[nodiscard]] std::uint64_t total_count() const;
};

/// Laser-on records go to voxel floor((p - origin) / size); others outside the
/// grid are counted in out_of_bounds. Invalid or NaN channel values are skipped.
DigitalTwin voxelize(const FusedDataset& d, const VoxelGrid& grid);

/// twin.csv: ix,iy,iz,cx,cy,cz,count, mean_/max_/var_ per channel, label.
void export_twin(const DigitalTwin& t, const std::filesystem::path& csv_path);
/// twin_meta.json: origin, voxel_size, dims, out_of_bounds.
void export_twin_meta(const DigitalTwin& t, const std::filesystem::path& json_path);

/// Reads both files back. Channel sample counts are not stored; a channel with
/// a finite mean is given n = voxel count.
DigitalTwin import_twin(const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

std::vector<std::string> twin_header();

}  // namespace lded::fusion
