// Deterministic synthetic build: a back-and-forth thin wall with all five
// sensor streams, injected crack / keyhole / dent defects, and the
// ground truth those injections imply.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "lded/fusion.hpp"
#include "lded/session.hpp"

namespace lded::sim {

/// Crack: melt-pool width spikes during [t0, t1) (absolute seconds).
struct CrackWindow {
    int layer = 0;
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Rectangular surface depression seen in the scan after `layer`.
struct Dent {
    int layer = 0;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // [x0, x1) x [y0, y1), mm
    double depth = 0.5;
};

struct BuildSpec {
    double wall_x0 = 5.0;
    double wall_y = 10.0;
    double wall_length = 40.0;
    double scan_width = 10.0;  // scanned top surface spans wall_y +- scan_width / 2
    int layers = 12;
    double layer_height = 0.5;
    double speed = 10.0;  // mm/s
    double dwell = 1.0;   // laser-off seconds after each pass
    double power_w = 400.0;

    std::vector<CrackWindow> cracks;
    std::vector<int> keyhole_layers;
    std::vector<Dent> dents;

    double crack_width_gain = 1.45;
    double keyhole_gain = 1.35;   // both melt-pool axes
    double mp_growth = 0.015;     // per-layer relative growth of both axes
    double temp_drift = 15.0;     // K per layer added to the thermal peak

    std::uint64_t seed = 7;

    [[nodiscard]] double pass_time() const { return wall_length / speed; }
    [[nodiscard]] double layer_time() const { return pass_time() + dwell; }
    [[nodiscard]] double duration() const { return layers * layer_time(); }
};

/// 12 layers x 5 s; cracks in layers 4-6, keyhole layers 9-11, one 8 x 8 mm
/// dent after layer 6.
BuildSpec default_spec();
/// Same geometry, no defects.
BuildSpec clean_spec();

/// Throws std::invalid_argument for an infeasible spec.
void check_spec(const BuildSpec& s);

/// Robot state at time t.
struct PathState {
    int layer = 0;
    bool laser_on = false;
    Vec3 position;
};
PathState path_at(const BuildSpec& s, double t);

struct GroundTruth {
    BuildSpec spec;
};

struct Simulation {
    session::Session session;
    GroundTruth truth;
};

Simulation simulate_build(const BuildSpec& spec);

/// Writes the session plus ground_truth.json.
void write_simulation(const Simulation& sim, const std::filesystem::path& dir);

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

BuildSpec spec_from_json_file(const std::filesystem::path& path);

/// True label of one robot sample.
fusion::QualityLabel sample_label(const BuildSpec& s, double t, double z);

/// Majority label of the laser-on robot samples in each voxel; ties go to the
/// defect label.
std::map<std::int64_t, fusion::QualityLabel> ground_truth_twin(const GroundTruth& gt,
                                                               const std::vector<session::RobotSample>& robot,
                                                               const fusion::VoxelGrid& grid);

/// Cells (origin = build box xy, size `cell`) fully covered by dents of `layer`.
std::set<std::pair<int, int>> dent_cells(const GroundTruth& gt, int layer, Vec2 origin, double cell);

}  // namespace lded::sim
