// Session data model: five time-stamped sensor streams plus manifest, with
// validated load/store of the on-disk session directory.
//
// Directory layout:
//   manifest.json
//   audio.wav                      PCM s16le mono
//   meltpool/index.csv             t,filename
//   meltpool/frame_NNNNNN.pgm      binary P5, 8-bit
//   thermal.bin                    u32 W, u32 H, u32 N, then N x (f64 t, W*H f32 kelvin)
//   robot.csv                      t,x,y,z,laser_on,feed
//   scans/index.csv                t,layer,filename
//   scans/scan_NNN.xyz             "x y z" per line, mm
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lded/common.hpp"
#include "lded/fused.hpp"
#include "lded/image.hpp"

namespace lded::session {

inline constexpr double kAudioRateHz = 44100.0;
inline constexpr double kMeltPoolRateHz = 30.0;
inline constexpr double kThermalRateHz = 120.0;
inline constexpr double kRobotRateHz = 250.0;

/// Relative tolerance between declared and observed stream rates.
inline constexpr double kRateTolerance = 0.01;

/// Audio length may differ from the robot duration by at most this many samples.
inline constexpr std::size_t kAudioSlackSamples = 2048;

struct SensorRates {
    double audio_hz = kAudioRateHz;
    double meltpool_hz = kMeltPoolRateHz;
    double thermal_hz = kThermalRateHz;
    double robot_hz = kRobotRateHz;
};

struct Manifest {
    SensorRates rates;
    int image_width = 64;
    int image_height = 64;
    int thermal_width = 24;
    int thermal_height = 24;
    BoundingBox build_box{{0, 0, 0}, {50, 20, 8}};
    double layer_height_mm = 0.5;
    double emissivity_melt = 0.3;
    double emissivity_haz = 0.5;
    double melt_threshold_k = 1400.0;
    double haz_threshold_k = 600.0;
};

struct AudioSignal {
    double rate = kAudioRateHz;
    std::vector<double> samples;  // in [-1, 1]

    [[nodiscard]] double duration() const {
        return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) / rate;
    }
};

struct MeltPoolFrame {
    double t = 0.0;
    GrayImage image;
};

/// Apparent (unity-emissivity) temperatures in kelvin.
struct ThermalFrame {
    double t = 0.0;
    Grid<float> kelvin;
};

struct RobotSample {
    double t = 0.0;
    Vec3 position;
    bool laser_on = false;
    double feed = 0.0;  // mm/s
};

struct PointCloud {
    std::vector<Vec3> points;
};

struct Scan {
    double t = 0.0;
    int layer = 0;
    PointCloud cloud;
};

struct Session {
    Manifest manifest;
    AudioSignal audio;
    std::vector<MeltPoolFrame> meltpool;
    std::vector<ThermalFrame> thermal;
    std::vector<RobotSample> robot;
    std::vector<Scan> scans;

    /// End time of the robot stream (the build duration).
    [[nodiscard]] double duration() const { return robot.empty() ? 0.0 : robot.back().t; }
};

struct Violation {
    std::string stream;
    std::string kind;  // "empty", "timestamp", "rate", "duration", "dims", "value"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    [[nodiscard]] std::string to_string() const;
};

/// Loads and parses every stream. Throws IoError for missing/unreadable
/// files and DataError (naming stream and record index) for malformed
/// records or non-monotonic timestamps.
Session load_session(const std::filesystem::path& dir);

/// Writes a complete session directory, creating it if needed.
void store_session(const Session& s, const std::filesystem::path& dir);

/// Checks all session invariants; never throws for data problems.
ValidationReport validate_session(const Session& s);

// Individual format codecs.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);
AudioSignal read_wav(const std::filesystem::path& path);
void write_wav(const AudioSignal& a, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
std::vector<ThermalFrame> read_thermal(const std::filesystem::path& path);
void write_thermal(const std::vector<ThermalFrame>& frames, const std::filesystem::path& path);
std::vector<RobotSample> read_robot(const std::filesystem::path& path);
void write_robot(const std::vector<RobotSample>& robot, const std::filesystem::path& path);
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const PointCloud& c, const std::filesystem::path& path);

/// fused.csv: t,x,y,z,laser_on,<35 feature columns>,valid_mp,valid_ac,valid_th
void write_fused(const FusedDataset& d, const std::filesystem::path& path);
FusedDataset read_fused(const std::filesystem::path& path);
std::vector<std::string> fused_header();

}  // namespace lded::session
