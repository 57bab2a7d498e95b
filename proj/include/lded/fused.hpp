// Fused per-tick records: every feature channel aligned on the robot grid.
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "lded/common.hpp"

namespace lded {

/// Rate of the robot position stream, which defines the fusion time axis.
inline constexpr double kFusionRateHz = 250.0;

inline constexpr std::size_t kMeltPoolChannels = 7;   // area, mu20, mu02, mu11, hull, width, length
inline constexpr std::size_t kAcousticChannels = 24;  // ae, sc, sbw, sr, 20 mfcc
inline constexpr std::size_t kThermalChannels = 4;    // peak, mean, variance, kurtosis
inline constexpr std::size_t kFeatureChannels =
    kMeltPoolChannels + kAcousticChannels + kThermalChannels;

enum class Modality { meltpool, acoustic, thermal };

/// Column names of the 35 feature channels in fused/twin order.
const std::vector<std::string>& feature_channel_names();

/// Modality that owns feature channel `i`.
Modality channel_modality(std::size_t i);

/// Offset of the first channel of each modality inside the flat feature vector.
inline constexpr std::size_t kMeltPoolOffset = 0;
inline constexpr std::size_t kAcousticOffset = kMeltPoolChannels;
inline constexpr std::size_t kThermalOffset = kMeltPoolChannels + kAcousticChannels;

/// Channel indices used by the rule labeler.
inline constexpr std::size_t kChannelMpArea = 0;
inline constexpr std::size_t kChannelMpWidth = 5;
inline constexpr std::size_t kChannelMpLength = 6;

struct FusedRecord {
    double t = 0.0;  // exactly k / 250
    Vec3 position;
    bool laser_on = false;
    std::array<double, kFeatureChannels> features{};  // NaN where the channel is invalid
    bool valid_mp = false;
    bool valid_ac = false;
    bool valid_th = false;

    [[nodiscard]] bool valid(Modality m) const noexcept {
        switch (m) {
            case Modality::meltpool: return valid_mp;
            case Modality::acoustic: return valid_ac;
            case Modality::thermal: return valid_th;
        }
        return false;
    }
};

struct FusedDataset {
    double rate = kFusionRateHz;
    std::vector<FusedRecord> records;
};

}  // namespace lded
