#include "lded/fused.hpp"

#include <cstdio>

namespace lded {

const std::vector<std::string>& feature_channel_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n = {"mp_area",      "mp_mu20",  "mp_mu02", "mp_mu11",
                                      "mp_hull_area", "mp_width", "mp_length",
                                      "ac_ae",        "ac_sc",    "ac_sbw",  "ac_sr"};
        for (int i = 0; i < 20; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "ac_mfcc%02d", i);
            n.emplace_back(buf);
        }
        n.insert(n.end(), {"th_peak", "th_mean", "th_variance", "th_kurtosis"});
        return n;
    }();
    return names;
}

Modality channel_modality(std::size_t i) {
    if (i < kAcousticOffset) return Modality::meltpool;
    if (i < kThermalOffset) return Modality::acoustic;
    return Modality::thermal;
}

}  // namespace lded
