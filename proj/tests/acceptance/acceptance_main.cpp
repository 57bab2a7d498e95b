// End-to-end acceptance run: one PASS/FAIL line per criterion. Exit status is
// the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lded/acoustic.hpp"
#include "lded/cli.hpp"
#include "lded/csv.hpp"
#include "lded/fusion.hpp"
#include "lded/meltpool.hpp"
#include "lded/quality.hpp"
#include "lded/session.hpp"
#include "lded/sim.hpp"
#include "lded/surface.hpp"
#include "lded/thermal.hpp"
#include "oracles.hpp"

using namespace lded;
namespace fs = std::filesystem;

namespace {

// ---- harness ----------------------------------------------------------------

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
    template <class T>
    Outcome& operator<<(const T& v) {
        detail << v;
        return *this;
    }
};

int run_criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << "[exception: " << e.what() << "] ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s -- %s(%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> m;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) m[fs::relative(e.path(), root).string()] = slurp(e.path());
    return m;
}

int tool(std::vector<std::string> args) {
    args.insert(args.begin(), "ldedtwin");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Shared workspace: the default build simulated once and run through `all`.
struct Workspace {
    fs::path root = fs::temp_directory_path() / "lded_acceptance";
    fs::path session = root / "s1";
    fs::path out = root / "all";
    bool pipeline_ok = false;

    Workspace() {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }

    void prepare() {
        if (tool({"simulate", "--spec", "default", "--seed", "7", "--out", session.string()}) != 0)
            throw std::runtime_error("simulate failed");
        pipeline_ok = tool({"all", "--session", session.string(), "--out", out.string()}) == 0;
    }
};

// ---- criteria ---------------------------------------------------------------

void constants(Outcome& o) {
    o.check(kFusionRateHz == 250.0, "fusion rate");
    FusedDataset d;
    o.check(d.rate == 250.0, "dataset rate");
    std::vector<session::RobotSample> robot;
    for (int k = 0; k <= 250; ++k) robot.push_back({k / 250.0, {}, false, 0});
    const auto ticks = fusion::robot_ticks(robot);
    o.check(ticks[250] == 1.0 && ticks[1] == 1.0 / 250.0, "tick grid k/250");

    o.check(acoustic::kMfccCount == 20, "mfcc count");
    o.check(acoustic::mfcc(std::vector<double>(2048, 0.1), 44100.0).size() == 20, "mfcc vector length");
    o.check(acoustic::kDefaultRolloff == 0.85 && acoustic::AcousticConfig{}.rolloff_pct == 0.85, "rolloff default");

    o.check(thermal::kEmissivityMolten == 0.3 && thermal::kEmissivityHaz == 0.5, "emissivity constants");
    Grid<float> frame(5, 1, 300.0f);
    frame.at(1, 0) = 900.0f;
    frame.at(2, 0) = 2000.0f;
    frame.at(3, 0) = 900.0f;
    const auto eps = thermal::build_emissivity_map(frame, 1400.0, 600.0, {});
    o.check(eps.at(0, 0) == 1.0 && eps.at(1, 0) == 0.5 && eps.at(2, 0) == 0.3 && eps.at(3, 0) == 0.5,
            "emissivity map levels");

    const session::SensorRates r;
    o.check(r.audio_hz == 44100 && r.thermal_hz == 120 && r.meltpool_hz == 30 && r.robot_hz == 250, "session rates");
    const session::Manifest m;
    o.check(m.emissivity_melt == 0.3 && m.emissivity_haz == 0.5, "manifest emissivities");
    o << "250 Hz grid, 20 MFCCs, roll-off 0.85, emissivity 0.3/0.5, rates 44100/120/30/250 ";
}

void moments(Outcome& o) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> px(0, 255), bit(0, 2), shift(1, 20);
    double worst = 0;
    double centroid_dev = 0;
    int shifted_equal = 0, cases = 0;
    for (int trial = 0; trial < 100; ++trial) {
        GrayImage img(16, 16);
        BinaryMask mask(16, 16);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                img.at(x, y) = static_cast<std::uint8_t>(px(rng));
                mask.at(x, y) = bit(rng) != 0;
            }
        mask.at(7, 7) = 1;
        img.at(7, 7) = std::max<std::uint8_t>(img.at(7, 7), 1);
        worst = std::max(worst, rel(meltpool::contour_area_moment(img, mask), oracle::m00(img, mask)));
        const auto lib = *meltpool::central_moments(img, mask);
        const auto ref = oracle::central(img, mask);
        for (auto [a, b] : {std::pair{lib.mu20, ref.mu20}, {lib.mu02, ref.mu02}, {lib.mu11, ref.mu11},
                            {lib.cx, ref.cx}, {lib.cy, ref.cy}}) {
            worst = std::max(worst, std::abs(a - b) / std::max({std::abs(b), std::abs(ref.mu20), 1.0}));
        }
        // Integer shift inside a larger canvas.
        const int dx = shift(rng), dy = shift(rng);
        GrayImage big(48, 48);
        BinaryMask bigm(48, 48);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                big.at(x + dx, y + dy) = img.at(x, y);
                bigm.at(x + dx, y + dy) = mask.at(x, y);
            }
        const auto moved = *meltpool::central_moments(big, bigm);
        ++cases;
        shifted_equal += moved.mu20 == lib.mu20 && moved.mu02 == lib.mu02 && moved.mu11 == lib.mu11 &&
                         moved.m00 == lib.m00;
        centroid_dev = std::max({centroid_dev, std::abs(moved.cx - lib.cx - dx), std::abs(moved.cy - lib.cy - dy)});
    }
    o.check(worst <= 1e-9, "oracle agreement within 1e-9");
    o.check(shifted_equal == cases, "exact translation invariance");
    o.check(centroid_dev <= 1e-12, "centroid follows the shift");
    o << "worst relative error " << worst << ", " << shifted_equal << "/" << cases
      << " shifted central moments bit-identical, centroid shift error " << centroid_dev << " ";
}

std::vector<Vec2> ellipse_points(double a, double b, double angle, Vec2 c, int n) {
    std::vector<Vec2> p;
    for (int i = 0; i < n; ++i) {
        const double t = 2 * std::numbers::pi * i / n;
        const double x = a * std::cos(t), y = b * std::sin(t);
        p.push_back({c.x + x * std::cos(angle) - y * std::sin(angle), c.y + x * std::sin(angle) + y * std::cos(angle)});
    }
    return p;
}

void ellipses(Outcome& o) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> axis(2.0, 20.0), ang(0.0, std::numbers::pi), ctr(-50.0, 50.0);
    double exact_worst = 0, noisy_worst = 0;
    for (int i = 0; i < 50; ++i) {
        double a = axis(rng), b = axis(rng);
        if (a > b) std::swap(a, b);
        const double th = ang(rng);
        const Vec2 c{ctr(rng), ctr(rng)};
        const auto pts = ellipse_points(a, b, th, c, 200);
        const auto e = meltpool::fit_ellipse(std::span<const Vec2>(pts));
        exact_worst = std::max({exact_worst, rel(e.width_a, a), rel(e.length_b, b)});

        // Gaussian noise with sigma = 1% of the minor semi-axis on each coordinate.
        std::normal_distribution<double> n(0.0, 0.01 * a);
        auto noisy = pts;
        for (auto& p : noisy) p.x += n(rng), p.y += n(rng);
        const auto f = meltpool::fit_ellipse(std::span<const Vec2>(noisy));
        noisy_worst = std::max({noisy_worst, rel(f.width_a, a), rel(f.length_b, b)});
    }
    o.check(exact_worst <= 1e-6, "exact points within 1e-6");
    o.check(noisy_worst <= 0.02, "noisy points within 2%");
    o << "exact worst " << exact_worst << ", 1% noise worst " << noisy_worst << " ";
}

void spectra(Outcome& o) {
    const double rate = 44100.0, bin = rate / 2048.0;
    double worst_bins = 0;
    for (int k : {20, 116, 232, 500}) {
        const double f0 = k * bin;
        std::vector<double> sig(2048 * 8);
        for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = 0.5 * std::sin(2 * std::numbers::pi * f0 * double(i) / rate);
        for (const auto& fr : acoustic::extract_acoustic_features(sig, rate)) {
            if (fr.t > double(sig.size() - 2048) / rate) break;  // frames padded past the end
            worst_bins = std::max({worst_bins, std::abs(fr.sc - f0) / bin, std::abs(fr.sr - f0) / bin});
        }
    }
    o.check(worst_bins <= 1.0, "SC and SR within one bin");

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    double parseval = 0, fft_dev = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(2048);
        for (auto& v : x) v = u(rng);
        const auto X = acoustic::dft(x);
        double te = 0, fe = 0;
        for (double v : x) te += v * v;
        for (const auto& v : X) fe += std::norm(v);
        parseval = std::max(parseval, rel(fe / 2048.0, te));
    }
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(64);
        for (auto& v : x) v = u(rng);
        const auto fast = acoustic::dft(x);
        const auto slow = oracle::dft(x);
        double scale = 0;
        for (const auto& v : slow) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < 64; ++k) fft_dev = std::max(fft_dev, std::abs(fast[k] - slow[k]) / scale);
    }
    o.check(parseval <= 1e-9, "Parseval within 1e-9");
    o.check(fft_dev <= 1e-9, "FFT matches DFT within 1e-9");
    o << "tone error " << worst_bins << " bins, Parseval " << parseval << ", FFT vs DFT " << fft_dev << " ";
}

void mfcc_gain(Outcome& o) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 0.05);
    double hi = 0, c0 = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(2048);
        for (auto& v : x) v = n(rng);
        auto y = x;
        for (auto& v : y) v *= 10.0;
        const auto a = acoustic::mfcc(x, 44100.0), b = acoustic::mfcc(y, 44100.0);
        for (std::size_t i = 1; i < 20; ++i) hi = std::max(hi, std::abs(a[i] - b[i]));
        c0 = std::max(c0, std::abs((b[0] - a[0]) - std::sqrt(20.0) * std::log(100.0)));
    }
    o.check(hi <= 1e-9, "coefficients 1-19 unchanged");
    o.check(c0 <= 1e-6, "c0 shift");
    o << "max |dc1..19| " << hi << ", c0 shift error " << c0 << " ";
}

void thermal_stats(Outcome& o) {
    const auto s = thermal::sample_stats({1, 2, 3, 4});
    o.check(s.variance == 1.25, "variance 1.25");
    o.check(s.kurtosis == 1.64, "kurtosis 1.64");
    std::mt19937_64 rng(66);
    std::normal_distribution<double> n(1500.0, 40.0);
    std::vector<double> v(100000);
    for (auto& x : v) x = n(rng);
    const double k = thermal::sample_stats(v).kurtosis;
    o.check(std::abs(k - 3.0) <= 0.1, "gaussian kurtosis 3 +- 0.1");
    Grid<float> frame(24, 24);
    std::uniform_real_distribution<float> u(300.0f, 2500.0f);
    for (auto& x : frame.data()) x = u(rng);
    const auto same = thermal::correct_emissivity(frame, thermal::EmissivityMap(24, 24, 1.0));
    bool identical = true;
    for (std::size_t i = 0; i < frame.data().size(); ++i) identical &= same.data()[i] == double(frame.data()[i]);
    o.check(identical, "unit emissivity is the identity");
    o << "var " << s.variance << ", kurt " << s.kurtosis << ", gaussian kurt " << k << " ";
}

void conservation(Outcome& o, const Workspace& w) {
    o.check(w.pipeline_ok, "pipeline ran");
    const auto fused = session::read_fused(w.out / "fused.csv");
    o.check(fused.records.size() == 15001, "15001 fused records");
    std::uint64_t on = 0;
    for (const auto& r : fused.records) on += r.laser_on;
    const auto twin = fusion::voxelize(fused, fusion::grid_for_box(session::Manifest{}.build_box, 0.5));
    o.check(twin.total_count() + twin.out_of_bounds == on, "voxel counts + out of bounds == laser-on records");

    fusion::Series ramp;
    for (int i = 0; i <= 300; ++i) {
        const double t = i / 29.97;
        ramp.push_back({t, {3.0 * t - 1.0, -0.5 * t}, true});
    }
    std::vector<double> ticks;
    for (int k = 0; k <= 2500; ++k) ticks.push_back(k / 250.0);
    const auto r = fusion::resample_features(ramp, ticks);
    double dev = 0;
    for (std::size_t k = 0; k < ticks.size(); ++k) {
        if (!r.valid[k]) continue;
        dev = std::max({dev, std::abs(r.row(k)[0] - (3.0 * ticks[k] - 1.0)), std::abs(r.row(k)[1] + 0.5 * ticks[k])});
    }
    o.check(dev <= 1e-12, "ramp exact");
    o << fused.records.size() << " records, " << twin.total_count() << " + " << twin.out_of_bounds << " == " << on
      << " laser-on, ramp error " << dev << " ";
}

void detection(Outcome& o, const Workspace& w) {
    o.check(w.pipeline_ok, "pipeline ran");
    const auto twin = fusion::import_twin(w.out / "twin_labeled.csv", w.out / "twin_meta.json");
    const auto s = session::load_session(w.session);
    const auto gt = sim::read_ground_truth(w.session / "ground_truth.json");
    const auto truth = sim::ground_truth_twin(gt, s.robot, twin.grid);

    int lo = 1 << 30, hi = -1;
    for (const auto& [k, v] : twin.voxels) lo = std::min(lo, v.iz), hi = std::max(hi, v.iz);
    const int third = lo + (hi - lo + 1) / 3;
    std::size_t low_keyhole = 0;
    std::map<fusion::QualityLabel, std::array<std::size_t, 3>> c;  // tp, fp, fn
    for (const auto& [k, v] : twin.voxels) {
        const auto it = truth.find(k);
        const auto t = it == truth.end() ? fusion::QualityLabel::ok : it->second;
        for (auto l : {fusion::QualityLabel::crack, fusion::QualityLabel::keyhole_pore}) {
            if (v.label == l && t == l) ++c[l][0];
            else if (v.label == l) ++c[l][1];
            else if (t == l) ++c[l][2];
        }
        if (v.label == fusion::QualityLabel::keyhole_pore && v.iz < third) ++low_keyhole;
    }
    for (auto l : {fusion::QualityLabel::crack, fusion::QualityLabel::keyhole_pore}) {
        const auto [tp, fp, fn] = c[l];
        const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0, r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
        o.check(r >= 0.8, std::string(fusion::to_string(l)) + " recall");
        o.check(p >= 0.7, std::string(fusion::to_string(l)) + " precision");
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s P=%.3f R=%.3f (tp %zu fp %zu fn %zu), ", fusion::to_string(l), p, r, tp, fp, fn);
        o << buf;
    }
    o.check(low_keyhole == 0, "no keyhole labels in the bottom third");
    o << "keyhole labels below layer " << third << ": " << low_keyhole << " ";
}

std::vector<double> keep(const std::vector<double>& row, const std::vector<std::size_t>& used) {
    std::vector<double> out;
    for (auto u : used) out.push_back(row[u]);
    return out;
}

void knn_oracle(Outcome& o) {
    std::mt19937_64 rng(909);
    std::uniform_int_distribution<int> coarse(0, 2);
    std::normal_distribution<double> fine(0.0, 1.0);
    const fusion::QualityLabel ls[] = {fusion::QualityLabel::ok, fusion::QualityLabel::keyhole_pore,
                                       fusion::QualityLabel::crack};
    // Voxel feature rows (35 channel means). Odd channels are coarse so that
    // distance ties occur; some even channels are constant and get dropped.
    std::vector<std::vector<double>> train;
    std::vector<fusion::QualityLabel> labels;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> r(kFeatureChannels);
        for (std::size_t c = 0; c < r.size(); ++c) r[c] = c % 2 ? double(coarse(rng)) : (c < 8 ? fine(rng) : 1.0 + c % 3);
        // Every row appears twice with independent labels: exact distance ties.
        for (int dup = 0; dup < 2; ++dup) {
            train.push_back(r);
            labels.push_back(ls[coarse(rng)]);
        }
    }
    std::size_t agree = 0, total = 0, ties = 0;
    for (std::size_t k : {1u, 3u, 4u, 7u}) {
        const auto c = quality::fit_knn(train, labels, k, quality::voxel_feature_names());
        // The oracle sees only the non-constant columns the classifier kept.
        std::vector<std::vector<double>> kept_train;
        for (const auto& r : train) kept_train.push_back(keep(r, c.used));
        for (int i = 0; i < 200; ++i) {
            std::vector<double> q(kFeatureChannels);
            for (std::size_t ch = 0; ch < q.size(); ++ch) q[ch] = ch % 2 ? double(coarse(rng)) : train[(2 * i) % 120][ch];
            const auto p = quality::predict(c, q);
            const auto ref = oracle::knn(kept_train, labels, keep(q, c.used), k);
            agree += p == ref;
            ++total;
            // Count queries whose k-th and (k+1)-th neighbours are equidistant.
            std::vector<double> d2;
            for (const auto& pt : c.points) {
                double s = 0;
                for (std::size_t u = 0; u < c.used.size(); ++u) {
                    const double z = (q[c.used[u]] - c.mean[u]) / c.sd[u] - pt[u];
                    s += z * z;
                }
                d2.push_back(s);
            }
            std::sort(d2.begin(), d2.end());
            ties += d2[k - 1] == d2[k];
        }
    }
    o.check(agree == total, "all predictions match the brute-force scan");
    o.check(ties > 0, "tie cases exercised");
    o << agree << "/" << total << " agree, " << ties << " queries with a distance tie at the k-th neighbour ";
}

void surface_dent(Outcome& o, const Workspace& w) {
    const auto s = session::load_session(w.session);
    const auto gt = sim::read_ground_truth(w.session / "ground_truth.json");
    o.check(gt.spec.dents.size() == 1, "one dent in the default spec");
    const auto& dent = gt.spec.dents.front();
    const auto scan = std::find_if(s.scans.begin(), s.scans.end(), [&](const session::Scan& sc) { return sc.layer == dent.layer; });
    o.check(scan != s.scans.end(), "dent layer scanned");
    const auto regions = surface::analyze_scan(*scan, s.manifest);
    std::size_t under = 0;
    for (const auto& r : regions) under += r.kind == surface::CellClass::under_built;
    o.check(under == 1, "exactly one under_built region");
    const auto& r = *std::find_if(regions.begin(), regions.end(),
                                  [](const surface::SurfaceRegion& x) { return x.kind == surface::CellClass::under_built; });
    const Vec2 origin{s.manifest.build_box.min.x, s.manifest.build_box.min.y};
    const auto truth = sim::dent_cells(gt, dent.layer, origin, r.cell);
    std::size_t inter = 0;
    for (const auto& c : r.cells) inter += truth.count(c);
    const double iou = double(inter) / double(r.cells.size() + truth.size() - inter);
    o.check(iou >= 0.7, "IoU >= 0.7");

    const double hatch = 0.5;
    const auto path = surface::fill_toolpath(r, hatch, 10.0, 400.0);
    const auto fp = r.footprint();
    std::size_t on = 0, inside = 0;
    std::set<double> pass_y;
    for (const auto& seg : path) {
        if (seg.start.y == seg.end.y) pass_y.insert(seg.start.y);
        if (!seg.laser_on) continue;
        ++on;
        inside += fp.contains((seg.start.x + seg.end.x) / 2, (seg.start.y + seg.end.y) / 2);
    }
    const auto b = r.bounds();
    const auto expect = static_cast<std::size_t>(std::ceil((b.max.y - b.min.y) / hatch - 1e-9));
    o.check(on > 0 && inside == on, "laser-on midpoints inside the region");
    o.check(pass_y.size() == expect, "pass count = ceil(extent / hatch)");
    o << "IoU " << iou << " (" << r.cells.size() << " cells vs " << truth.size() << "), " << inside << "/" << on
      << " laser-on midpoints inside, " << pass_y.size() << " passes (expected " << expect << ") ";
}

void determinism(Outcome& o, const Workspace& w) {
    const auto again = w.root / "s2";
    o.check(tool({"simulate", "--spec", "default", "--seed", "7", "--out", again.string()}) == 0, "second simulate");
    o.check(tree(w.session) == tree(again), "same-seed sessions byte-identical");

    const auto fused = session::read_fused(w.out / "fused.csv");
    session::write_fused(fused, w.root / "fused_rt.csv");
    o.check(slurp(w.out / "fused.csv") == slurp(w.root / "fused_rt.csv"), "fused.csv round-trip");
    const auto twin = fusion::import_twin(w.out / "twin.csv", w.out / "twin_meta.json");
    fusion::export_twin(twin, w.root / "twin_rt.csv");
    o.check(slurp(w.out / "twin.csv") == slurp(w.root / "twin_rt.csv"), "twin.csv round-trip");

    const auto composed = w.root / "composed";
    for (const char* cmd : {"features", "fuse", "twin", "detect", "correct", "report"})
        o.check(tool({cmd, "--session", w.session.string(), "--out", composed.string()}) == 0, cmd);
    const auto a = tree(w.out), b = tree(composed);
    o.check(!a.empty() && a == b, "all == composed subcommands");
    o << a.size() << " artifacts byte-identical between `all` and the composed run ";
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    Workspace w;
    int failed = 0;
    failed += run_criterion(1, "process constants", constants);
    failed += run_criterion(2, "moment oracles", moments);
    failed += run_criterion(3, "ellipse recovery", ellipses);
    failed += run_criterion(4, "spectral correctness", spectra);
    failed += run_criterion(5, "MFCC gain invariance", mfcc_gain);
    failed += run_criterion(6, "thermal statistics", thermal_stats);
    try {
        w.prepare();
    } catch (const std::exception& e) {
        std::printf("workspace setup failed: %s\n", e.what());
    }
    failed += run_criterion(7, "fusion conservation", [&](Outcome& o) { conservation(o, w); });
    failed += run_criterion(8, "end-to-end defect detection", [&](Outcome& o) { detection(o, w); });
    failed += run_criterion(9, "kNN oracle equivalence", knn_oracle);
    failed += run_criterion(10, "surface dent pipeline", [&](Outcome& o) { surface_dent(o, w); });
    failed += run_criterion(11, "determinism and round-trips", [&](Outcome& o) { determinism(o, w); });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 11 criteria failed; total %.1f s\n", failed, secs);
    return failed;
}
