// Location-specific quality labels on the voxel twin (melt-pool rules and a
// k-nearest-neighbour baseline), 3D defect regions, and the correction plan
// and toolpath that remove or restore them.
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lded/fusion.hpp"
#include "lded/surface.hpp"
#include "lded/toolpath.hpp"

namespace lded::quality {

using fusion::DigitalTwin;
using fusion::QualityLabel;

// ---- rules ------------------------------------------------------------------

struct RuleThresholds {
    double width_spike_z = 3.0;
    double area_high_z = 2.0;
    int baseline_window = 0;          // layers pooled on each side for the width baseline
    double isolated_fraction = 0.25;  // crack only if fewer than this share of a layer spikes
};

/// Median and a floored robust scale: max(1.4826 * MAD, 0.01 * |median|, 1e-12).
struct RobustStats {
    double median = 0.0;
    double scale = 1.0;
};
RobustStats robust_stats(std::vector<double> v);

/// Relabels every voxel. Crack: layer-local width z-score above width_spike_z
/// in a layer where such spikes are isolated. Keyhole: build-wide area z-score
/// above area_high_z in the upper half of occupied layers. Throws
/// std::invalid_argument on an empty twin.
void label_rules(DigitalTwin& twin, const RuleThresholds& th = {});

// ---- kNN --------------------------------------------------------------------

struct Classifier {
    std::size_t k = 5;
    std::vector<std::string> schema;        // full input feature names
    std::vector<std::size_t> used;          // indices into schema kept after dropping constants
    std::vector<double> mean, sd;           // per used feature
    std::vector<std::vector<double>> points;  // standardized training rows
    std::vector<QualityLabel> labels;
    std::vector<std::string> warnings;
};

/// Standardizes on the training set, dropping zero-variance features (with a
/// warning). NaN inputs are replaced by the training mean. Throws
/// std::invalid_argument when k is 0 or exceeds the row count.
Classifier fit_knn(const std::vector<std::vector<double>>& rows, const std::vector<QualityLabel>& labels,
                   std::size_t k, std::vector<std::string> schema = {});

/// Majority of the k nearest training rows (ties on distance go to the lower
/// training index); vote ties go to the smallest summed distance, then to the
/// earlier label in {ok, keyhole_pore, crack}.
QualityLabel predict(const Classifier& c, const std::vector<double>& row);

/// Voxel feature vector: the 35 channel means.
std::vector<double> voxel_features(const fusion::Voxel& v);
std::vector<std::string> voxel_feature_names();

/// Throws std::invalid_argument when the classifier schema differs from the
/// twin's voxel features.
void predict_twin(const Classifier& c, DigitalTwin& twin);

void save_classifier(const Classifier& c, const std::filesystem::path& path);
Classifier load_classifier(const std::filesystem::path& path);

// ---- regions ----------------------------------------------------------------

struct DefectRegion3D {
    QualityLabel label = QualityLabel::ok;
    std::vector<std::array<int, 3>> voxels;  // sorted by (iz, iy, ix)
    std::vector<std::array<int, 3>> boundary;
    std::array<int, 3> min{}, max{};
    Vec3 centroid;  // mm, mean of voxel centres

    [[nodiscard]] int min_layer() const { return min[2]; }
    [[nodiscard]] int max_layer() const { return max[2]; }
};

/// 6-connected components of equal non-ok labels, largest first.
std::vector<DefectRegion3D> extract_regions_3d(const DigitalTwin& twin);

/// CSV: region_id,label,voxels,cx,cy,cz,min_layer,max_layer
void write_regions(const std::vector<DefectRegion3D>& regions, const std::filesystem::path& path);

/// Twin labels of every occupied voxel.
std::map<std::int64_t, QualityLabel> twin_labels(const DigitalTwin& twin);

struct LabelScore {
    QualityLabel label = QualityLabel::ok;
    std::size_t tp = 0, fp = 0, fn = 0;
    [[nodiscard]] double precision() const { return tp + fp == 0 ? kNaN : double(tp) / double(tp + fp); }
    [[nodiscard]] double recall() const { return tp + fn == 0 ? kNaN : double(tp) / double(tp + fn); }
};

/// Per-label scores over voxels present in `predicted`.
std::vector<LabelScore> score_labels(const std::map<std::int64_t, QualityLabel>& predicted,
                                     const std::map<std::int64_t, QualityLabel>& truth);

/// CSV: label,tp,fp,fn,precision,recall
void write_scores(const std::vector<LabelScore>& s, const std::filesystem::path& path);

// ---- correction -------------------------------------------------------------

enum class ActionKind { machine_remove, deposit_restore };
const char* to_string(ActionKind a);

struct Action {
    ActionKind kind = ActionKind::machine_remove;
    std::size_t volume = 0;  // shared by the remove/restore pair of one volume
    QualityLabel label = QualityLabel::ok;
    double z_floor = 0.0;    // mm
    double z_top = 0.0;      // mm
    Footprint footprint;

    [[nodiscard]] double depth() const { return z_top - z_floor; }
};

struct CorrectionPlan {
    std::vector<Action> actions;
};

struct PlanContext {
    fusion::VoxelGrid grid;
    double top_z = 0.0;  // current top surface of the part, mm
};

/// Part top from the highest occupied voxel layer.
PlanContext plan_context(const DigitalTwin& twin);

/// Internal defects: remove from the top down to the floor of the lowest
/// layer, then restore that height. over_built: remove the mean positive
/// deviation. under_built: restore |mean deviation|. Volumes ordered
/// bottom-up, removal before restoration within a volume.
CorrectionPlan plan_correction(const std::vector<DefectRegion3D>& regions,
                               const std::vector<surface::SurfaceRegion>& surface_regions, const PlanContext& ctx);

struct ToolpathParams {
    double hatch = 0.5;
    double layer_height = 0.5;
    double base_power_w = 400.0;
    double power_gain = 0.1;
    double deposit_feed = 10.0;
    double machine_feed = 20.0;
};

/// base * clamp(1 + gain * (depth / layer_height - 1), 0.8, 1.2)
double deposit_power(const ToolpathParams& p, double depth);

/// MACHINE rasters (laser off) per removed layer, DEPOSIT fills per restored
/// layer. Throws std::invalid_argument on an empty plan.
Toolpath generate_toolpath(const CorrectionPlan& plan, const ToolpathParams& p = {});

/// CSV: action_id,volume,action,label,z_floor,z_top,depth_mm,cells
void write_plan(const CorrectionPlan& plan, const std::filesystem::path& path);

}  // namespace lded::quality
