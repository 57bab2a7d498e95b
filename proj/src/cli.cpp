#include "lded/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "lded/csv.hpp"
#include "lded/sim.hpp"
#include "lded/toolpath.hpp"

namespace lded::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config -----------------------------------------------------------------

namespace {

// Reads keys of one config section, rejecting any key it was not asked about.
class Section {
public:
    Section(const json& root, const std::string& name) : name_(name) {
        if (!root.contains(name)) return;
        node_ = &root.at(name);
        if (!node_->is_object()) throw std::invalid_argument("config: '" + name + "' must be an object");
    }
    ~Section() noexcept(false) {
        if (!node_ || std::uncaught_exceptions() > 0) return;
        for (const auto& [k, v] : node_->items())
            if (!seen_.count(k)) throw std::invalid_argument("config: unknown key '" + name_ + "." + k + "'");
    }
    template <class T>
    void get(const std::string& key, std::optional<T>& out) {
        T v{};
        if (node_ && node_->contains(key)) {
            get(key, v);
            out = v;
        }
        seen_.insert(key);
    }
    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!node_ || !node_->contains(key)) return;
        try {
            out = node_->at(key).get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config: bad value for '" + name_ + "." + key + "'");
        }
    }

private:
    std::string name_;
    const json* node_ = nullptr;
    std::set<std::string> seen_;
};

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what + " out of range");
}

}  // namespace

void check_config(const PipelineConfig& c) {
    require(c.meltpool.min_threshold >= 0 && c.meltpool.min_threshold <= 255, "meltpool.min_threshold");
    require(c.acoustic.frame_size >= 2 && acoustic::is_power_of_two(c.acoustic.frame_size), "acoustic.frame_size");
    require(c.acoustic.hop >= 1 && c.acoustic.hop <= c.acoustic.frame_size, "acoustic.hop");
    require(c.acoustic.rolloff_pct > 0 && c.acoustic.rolloff_pct <= 1, "acoustic.rolloff");
    require(c.gate.k_sigma >= 0, "acoustic.gate_k_sigma");
    require(c.gate.attenuation_db >= 0, "acoustic.gate_attenuation_db");
    require(!c.melt_threshold_k || *c.melt_threshold_k > 0, "thermal.melt_threshold_k");
    require(!c.haz_threshold_k || *c.haz_threshold_k > 0, "thermal.haz_threshold_k");
    for (const auto* r : {&c.fusion.meltpool, &c.fusion.acoustic, &c.fusion.thermal})
        require(r->max_gap >= 0 && std::isfinite(r->time_offset), "fusion.max_gap");
    require(c.voxel_size > 0, "twin.voxel_size");
    require(c.rules.width_spike_z > 0, "rules.width_spike_z");
    require(c.rules.area_high_z > 0, "rules.area_high_z");
    require(c.rules.baseline_window >= 0, "rules.baseline_window");
    require(c.rules.isolated_fraction > 0 && c.rules.isolated_fraction <= 1, "rules.isolated_fraction");
    require(c.knn_k >= 1, "knn.k");
    require(c.surface.filter.k >= 1, "surface.k");
    require(c.surface.filter.sigma_mult > 0, "surface.sigma_mult");
    require(c.surface.filter.substrate_margin >= 0, "surface.substrate_margin");
    require(c.surface.cell > 0, "surface.cell");
    require(c.surface.tau_fraction > 0, "surface.tau_fraction");
    require(c.toolpath.hatch > 0, "toolpath.hatch");
    require(c.toolpath.base_power_w > 0, "toolpath.base_power_w");
    require(c.toolpath.power_gain >= 0, "toolpath.power_gain");
    require(c.toolpath.deposit_feed > 0 && c.toolpath.machine_feed > 0, "toolpath feed");
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
    static const std::set<std::string> sections = {"meltpool", "acoustic", "thermal", "fusion", "twin",
                                                   "rules",    "knn",      "surface", "toolpath"};
    for (const auto& [k, v] : root.items())
        if (!sections.count(k)) throw std::invalid_argument("config: unknown section '" + k + "'");

    PipelineConfig c;
    {
        Section s(root, "meltpool");
        s.get("min_threshold", c.meltpool.min_threshold);
        s.get("min_pixels", c.meltpool.min_pixels);
    }
    {
        Section s(root, "acoustic");
        s.get("frame_size", c.acoustic.frame_size);
        s.get("hop", c.acoustic.hop);
        s.get("rolloff", c.acoustic.rolloff_pct);
        s.get("raw_audio", c.raw_audio);
        s.get("gate_k_sigma", c.gate.k_sigma);
        s.get("gate_attenuation_db", c.gate.attenuation_db);
        c.gate.frame_size = c.acoustic.frame_size;
        c.gate.hop = c.acoustic.hop;
    }
    {
        Section s(root, "thermal");
        s.get("melt_threshold_k", c.melt_threshold_k);
        s.get("haz_threshold_k", c.haz_threshold_k);
    }
    {
        Section s(root, "fusion");
        std::string mode = "linear";
        double gap = c.fusion.meltpool.max_gap;
        s.get("mode", mode);
        s.get("max_gap", gap);
        const auto m = fusion::parse_resample_mode(mode);
        for (auto* r : {&c.fusion.meltpool, &c.fusion.acoustic, &c.fusion.thermal}) {
            r->mode = m;
            r->max_gap = gap;
        }
        s.get("meltpool_offset", c.fusion.meltpool.time_offset);
        s.get("acoustic_offset", c.fusion.acoustic.time_offset);
        s.get("thermal_offset", c.fusion.thermal.time_offset);
    }
    {
        Section s(root, "twin");
        s.get("voxel_size", c.voxel_size);
    }
    {
        Section s(root, "rules");
        s.get("width_spike_z", c.rules.width_spike_z);
        s.get("area_high_z", c.rules.area_high_z);
        s.get("baseline_window", c.rules.baseline_window);
        s.get("isolated_fraction", c.rules.isolated_fraction);
    }
    {
        Section s(root, "knn");
        s.get("k", c.knn_k);
    }
    {
        Section s(root, "surface");
        s.get("k", c.surface.filter.k);
        s.get("sigma_mult", c.surface.filter.sigma_mult);
        s.get("substrate_margin", c.surface.filter.substrate_margin);
        s.get("cell", c.surface.cell);
        s.get("tau_fraction", c.surface.tau_fraction);
        s.get("min_cells", c.surface.min_cells);
    }
    {
        Section s(root, "toolpath");
        s.get("hatch", c.toolpath.hatch);
        s.get("base_power_w", c.toolpath.base_power_w);
        s.get("power_gain", c.toolpath.power_gain);
        s.get("deposit_feed", c.toolpath.deposit_feed);
        s.get("machine_feed", c.toolpath.machine_feed);
    }
    check_config(c);
    return c;
}

// ---- stages -----------------------------------------------------------------

std::vector<double> noise_profile(const session::Session& s) {
    std::size_t best_begin = 0, best_end = 0;
    for (std::size_t i = 0; i < s.robot.size();) {
        if (s.robot[i].laser_on) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < s.robot.size() && !s.robot[j + 1].laser_on) ++j;
        if (s.robot[j].t - s.robot[i].t > s.robot[best_end].t - s.robot[best_begin].t) best_begin = i, best_end = j;
        i = j + 1;
    }
    if (s.robot.empty() || s.robot[best_end].t - s.robot[best_begin].t < acoustic::kMinNoiseProfileSeconds) return {};
    const auto& a = s.audio;
    const auto lo = static_cast<std::size_t>(std::ceil(s.robot[best_begin].t * a.rate));
    const auto hi = std::min(a.samples.size(), static_cast<std::size_t>(std::floor(s.robot[best_end].t * a.rate)) + 1);
    if (hi <= lo || double(hi - lo) < acoustic::kMinNoiseProfileSeconds * a.rate) return {};
    return {a.samples.begin() + static_cast<std::ptrdiff_t>(lo), a.samples.begin() + static_cast<std::ptrdiff_t>(hi)};
}

FeatureSet compute_features(const session::Session& s, const PipelineConfig& c) {
    FeatureSet f;
    for (const auto& fr : s.meltpool) f.meltpool.push_back(meltpool::extract_meltpool_features(fr.t, fr.image, c.meltpool));

    thermal::ThermalConfig tc;
    tc.melt_threshold_k = c.melt_threshold_k.value_or(s.manifest.melt_threshold_k);
    tc.haz_threshold_k = c.haz_threshold_k.value_or(s.manifest.haz_threshold_k);
    tc.levels.molten = s.manifest.emissivity_melt;
    tc.levels.haz = s.manifest.emissivity_haz;
    for (const auto& fr : s.thermal) f.thermal.push_back(thermal::extract_thermal_features(fr, tc));

    const auto& audio = s.audio.samples;
    if (c.raw_audio) {
        f.acoustic = acoustic::extract_acoustic_features(audio, s.audio.rate, c.acoustic);
    } else {
        const auto profile = noise_profile(s);
        if (profile.empty()) {
            f.warnings.push_back("no laser-off interval of at least 0.5 s; acoustic features use the raw signal");
            f.acoustic = acoustic::extract_acoustic_features(audio, s.audio.rate, c.acoustic);
        } else {
            const auto clean = acoustic::denoise_spectral_gate(audio, profile, s.audio.rate, c.gate);
            f.acoustic = acoustic::extract_acoustic_features(clean, s.audio.rate, c.acoustic);
        }
    }
    return f;
}

fusion::VoxelGrid twin_grid(const session::Manifest& m, const PipelineConfig& c) {
    return fusion::grid_for_box(m.build_box, c.voxel_size);
}

std::vector<surface::SurfaceRegion> surface_regions(const session::Session& s, const PipelineConfig& c) {
    std::vector<surface::SurfaceRegion> out;
    for (const auto& scan : s.scans) {
        auto r = surface::analyze_scan(scan, s.manifest, c.surface);
        out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return out;
}

// ---- tool -------------------------------------------------------------------

namespace {

struct ValidationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string session, out, config, spec = "default", classifier, save_classifier;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<double> voxel_size, width_spike_z, area_high_z, isolated_fraction, hatch, tau_fraction;
    std::optional<int> baseline_window;
    std::optional<std::size_t> knn_k;
    bool raw_audio = false;
};

PipelineConfig effective_config(const Options& o) {
    PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_config(o.config);
    if (o.mode) {
        const auto m = fusion::parse_resample_mode(*o.mode);
        for (auto* r : {&c.fusion.meltpool, &c.fusion.acoustic, &c.fusion.thermal}) r->mode = m;
    }
    if (o.voxel_size) c.voxel_size = *o.voxel_size;
    if (o.width_spike_z) c.rules.width_spike_z = *o.width_spike_z;
    if (o.area_high_z) c.rules.area_high_z = *o.area_high_z;
    if (o.isolated_fraction) c.rules.isolated_fraction = *o.isolated_fraction;
    if (o.baseline_window) c.rules.baseline_window = *o.baseline_window;
    if (o.knn_k) c.knn_k = *o.knn_k;
    if (o.hatch) c.toolpath.hatch = *o.hatch;
    if (o.tau_fraction) c.surface.tau_fraction = *o.tau_fraction;
    if (o.raw_audio) c.raw_audio = true;
    check_config(c);
    return c;
}

fs::path out_dir(const Options& o) {
    const fs::path d = o.out.empty() ? fs::path(o.session) : fs::path(o.out);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
    return d;
}

session::Session checked_session(const fs::path& dir) {
    auto s = session::load_session(dir);
    const auto rep = session::validate_session(s);
    if (!rep.ok()) throw ValidationFailure(rep.to_string());
    return s;
}

void warn(const std::vector<std::string>& w) {
    for (const auto& m : w) std::cerr << "warning: " << m << "\n";
}

void cmd_simulate(const Options& o) {
    if (o.out.empty()) throw std::invalid_argument("simulate needs --out");
    sim::BuildSpec spec;
    if (o.spec == "default") spec = sim::default_spec();
    else if (o.spec == "clean") spec = sim::clean_spec();
    else spec = sim::spec_from_json_file(o.spec);
    if (o.seed) spec.seed = *o.seed;
    sim::check_spec(spec);
    sim::write_simulation(sim::simulate_build(spec), out_dir(o));
}

void cmd_features(const Options& o, const PipelineConfig& c) {
    const auto s = checked_session(o.session);
    const auto f = compute_features(s, c);
    warn(f.warnings);
    const auto out = out_dir(o);
    meltpool::write_features(f.meltpool, out / "features_meltpool.csv");
    acoustic::write_features(f.acoustic, out / "features_acoustic.csv");
    thermal::write_features(f.thermal, out / "features_thermal.csv");
}

void cmd_fuse(const Options& o, const PipelineConfig& c) {
    const auto s = checked_session(o.session);
    const auto out = out_dir(o);
    const auto d = fusion::fuse_streams(s.robot, meltpool::read_features(out / "features_meltpool.csv"),
                                        acoustic::read_features(out / "features_acoustic.csv"),
                                        thermal::read_features(out / "features_thermal.csv"), c.fusion);
    session::write_fused(d, out / "fused.csv");
}

void cmd_twin(const Options& o, const PipelineConfig& c) {
    const auto m = session::read_manifest(fs::path(o.session) / "manifest.json");
    const auto out = out_dir(o);
    const auto twin = fusion::voxelize(session::read_fused(out / "fused.csv"), twin_grid(m, c));
    fusion::export_twin(twin, out / "twin.csv");
    fusion::export_twin_meta(twin, out / "twin_meta.json");
}

void cmd_detect(const Options& o, const PipelineConfig& c) {
    const auto s = checked_session(o.session);
    const auto out = out_dir(o);
    auto twin = fusion::import_twin(out / "twin.csv", out / "twin_meta.json");
    if (twin.voxels.empty()) throw DataError("twin", 0, "no occupied voxels");
    if (!o.classifier.empty()) quality::predict_twin(quality::load_classifier(o.classifier), twin);
    else quality::label_rules(twin, c.rules);
    fusion::export_twin(twin, out / "twin_labeled.csv");
    quality::write_regions(quality::extract_regions_3d(twin), out / "regions.csv");
    surface::write_regions(surface_regions(s, c), out / "surface_regions.csv");

    std::map<std::int64_t, fusion::QualityLabel> truth;
    const fs::path gt_path = fs::path(o.session) / "ground_truth.json";
    const bool have_truth = fs::exists(gt_path);
    if (have_truth) {
        truth = sim::ground_truth_twin(sim::read_ground_truth(gt_path), s.robot, twin.grid);
        const auto scores = quality::score_labels(quality::twin_labels(twin), truth);
        quality::write_scores(scores, out / "metrics.csv");
        for (const auto& sc : scores) {
            if (sc.label == fusion::QualityLabel::ok) continue;
            std::printf("%s precision=%s recall=%s tp=%zu fp=%zu fn=%zu\n", fusion::to_string(sc.label),
                        format_real(sc.precision()).c_str(), format_real(sc.recall()).c_str(), sc.tp, sc.fp, sc.fn);
        }
    }
    if (!o.save_classifier.empty()) {
        std::vector<std::vector<double>> rows;
        std::vector<fusion::QualityLabel> labels;
        for (const auto& [k, v] : twin.voxels) {
            rows.push_back(quality::voxel_features(v));
            const auto it = truth.find(k);
            labels.push_back(have_truth ? (it == truth.end() ? fusion::QualityLabel::ok : it->second) : v.label);
        }
        const auto clf = quality::fit_knn(rows, labels, std::min(c.knn_k, rows.size()), quality::voxel_feature_names());
        warn(clf.warnings);
        quality::save_classifier(clf, o.save_classifier);
    }
}

void cmd_correct(const Options& o, const PipelineConfig& c) {
    const auto s = checked_session(o.session);
    const auto out = out_dir(o);
    const auto twin = fusion::import_twin(out / "twin_labeled.csv", out / "twin_meta.json");
    const auto plan =
        quality::plan_correction(quality::extract_regions_3d(twin), surface_regions(s, c), quality::plan_context(twin));
    quality::write_plan(plan, out / "plan.csv");
    auto params = c.toolpath;
    params.layer_height = s.manifest.layer_height_mm;
    write_toolpath(plan.actions.empty() ? Toolpath{} : quality::generate_toolpath(plan, params), out / "toolpath.csv");
}

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : v[n / 2 - 1] + (v[n / 2] - v[n / 2 - 1]) / 2.0;
}

void cmd_report(const Options& o) {
    const auto out = out_dir(o);
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& f : meltpool::read_features(out / "features_meltpool.csv")) {
            if (!f.valid) continue;
            const std::pair<const char*, double> series[] = {
                {"area", f.area_m00}, {"mu20", f.mu20},      {"mu02", f.mu02},        {"mu11", f.mu11},
                {"hull_area", f.hull_area}, {"width", f.width_a}, {"length", f.length_b}};
            for (const auto& [name, v] : series) rows.push_back({format_real(f.t), name, format_real(v)});
        }
        csv::write(out / "report_meltpool.csv", {"t", "feature", "value"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& f : acoustic::read_features(out / "features_acoustic.csv")) {
            if (!f.valid) continue;
            const std::string t = format_real(f.t);
            rows.push_back({t, "acoustic", "ae", format_real(f.ae)});
            rows.push_back({t, "acoustic", "sc", format_real(f.sc)});
            rows.push_back({t, "acoustic", "sbw", format_real(f.sbw)});
            rows.push_back({t, "acoustic", "sr", format_real(f.sr)});
            for (std::size_t i = 0; i < f.mfcc.size(); ++i) {
                char name[16];
                std::snprintf(name, sizeof name, "mfcc%02zu", i);
                rows.push_back({t, "acoustic", name, format_real(f.mfcc[i])});
            }
        }
        for (const auto& f : thermal::read_features(out / "features_thermal.csv")) {
            if (!f.valid) continue;
            const std::string t = format_real(f.t);
            rows.push_back({t, "thermal", "peak", format_real(f.peak)});
            rows.push_back({t, "thermal", "mean", format_real(f.mean)});
            rows.push_back({t, "thermal", "variance", format_real(f.variance)});
            rows.push_back({t, "thermal", "kurtosis", format_real(f.kurtosis)});
        }
        csv::write(out / "report_features.csv", {"t", "modality", "feature", "value"}, rows);
    }
    {
        const auto twin = fusion::import_twin(out / "twin_labeled.csv", out / "twin_meta.json");
        struct Layer {
            std::size_t n = 0, ok = 0, keyhole = 0, crack = 0;
            std::vector<double> width, area;
        };
        std::map<int, Layer> layers;
        for (const auto& [k, v] : twin.voxels) {
            auto& l = layers[v.layer()];
            ++l.n;
            l.ok += v.label == fusion::QualityLabel::ok;
            l.keyhole += v.label == fusion::QualityLabel::keyhole_pore;
            l.crack += v.label == fusion::QualityLabel::crack;
            if (!std::isnan(v.mean(kChannelMpWidth))) l.width.push_back(v.mean(kChannelMpWidth));
            if (!std::isnan(v.mean(kChannelMpArea))) l.area.push_back(v.mean(kChannelMpArea));
        }
        std::vector<std::vector<std::string>> rows;
        for (const auto& [z, l] : layers) {
            rows.push_back({std::to_string(z), std::to_string(l.n), std::to_string(l.ok), std::to_string(l.keyhole),
                            std::to_string(l.crack), format_real(median(l.width)), format_real(median(l.area))});
        }
        csv::write(out / "report_layers.csv",
                   {"layer", "voxels", "ok", "keyhole_pore", "crack", "median_mp_width", "median_mp_area"}, rows);
    }
}

void add_common(CLI::App* app, Options& o, bool session_required) {
    auto* s = app->add_option("--session", o.session, "session directory");
    if (session_required) s->required();
    app->add_option("--out", o.out, "output directory (default: the session directory)");
    app->add_option("--config", o.config, "JSON pipeline config");
    app->add_option("--mode", o.mode, "resampling mode: linear | hold");
    app->add_option("--voxel-size", o.voxel_size, "voxel edge, mm");
    app->add_option("--width-spike-z", o.width_spike_z, "crack rule z-score threshold");
    app->add_option("--area-high-z", o.area_high_z, "keyhole rule z-score threshold");
    app->add_option("--baseline-window", o.baseline_window, "layers pooled on each side for the width baseline");
    app->add_option("--isolated-fraction", o.isolated_fraction, "max share of spiking voxels in a crack layer");
    app->add_option("--knn-k", o.knn_k, "neighbours for the kNN classifier");
    app->add_option("--hatch", o.hatch, "toolpath hatch spacing, mm");
    app->add_option("--tau-fraction", o.tau_fraction, "surface tolerance as a fraction of the layer height");
    app->add_flag("--raw-audio", o.raw_audio, "skip spectral gating before acoustic features");
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Multisensor LDED digital twin pipeline", "ldedtwin"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "write a synthetic session and its ground truth");
    simulate->add_option("--out", o.out, "session directory to create")->required();
    simulate->add_option("--spec", o.spec, "default | clean | path to a JSON build spec");
    simulate->add_option("--seed", o.seed, "random seed");
    simulate->add_option("--config", o.config, "JSON pipeline config (unused by simulate)");

    auto* features = app.add_subcommand("features", "per-modality feature CSVs");
    auto* fuse = app.add_subcommand("fuse", "fused.csv on the 250 Hz robot grid");
    auto* twin = app.add_subcommand("twin", "voxel twin");
    auto* detect = app.add_subcommand("detect", "label voxels, extract regions, score against ground truth");
    auto* correct = app.add_subcommand("correct", "correction plan and toolpath");
    auto* report = app.add_subcommand("report", "plot-ready long-format CSVs");
    auto* all = app.add_subcommand("all", "features, fuse, twin, detect, correct, report");
    for (auto* sc : {features, fuse, twin, detect, correct, report, all}) add_common(sc, o, true);
    for (auto* sc : {detect, all}) {
        sc->add_option("--classifier", o.classifier, "label with a saved kNN classifier instead of the rules");
        sc->add_option("--save-classifier", o.save_classifier, "fit a kNN classifier on this twin and save it");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            cmd_simulate(o);
            return kExitOk;
        }
        const auto c = effective_config(o);
        if (features->parsed() || all->parsed()) cmd_features(o, c);
        if (fuse->parsed() || all->parsed()) cmd_fuse(o, c);
        if (twin->parsed() || all->parsed()) cmd_twin(o, c);
        if (detect->parsed() || all->parsed()) cmd_detect(o, c);
        if (correct->parsed() || all->parsed()) cmd_correct(o, c);
        if (report->parsed() || all->parsed()) cmd_report(o);
        return kExitOk;
    } catch (const ValidationFailure& e) {
        std::cerr << "session validation failed:\n" << e.what();
        return kExitData;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const DataError& e) {
        std::cerr << "invalid data: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

}  // namespace lded::cli
