#include "lded/quality.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "lded/csv.hpp"

namespace lded::quality {

// ---- rules ------------------------------------------------------------------

namespace {

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size(), mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return lo + (hi - lo) / 2.0;
}

}  // namespace

RobustStats robust_stats(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("robust_stats of an empty sample");
    RobustStats s;
    s.median = median_of(v);
    for (auto& x : v) x = std::abs(x - s.median);
    const double mad = median_of(v);
    s.scale = std::max({1.4826 * mad, 0.01 * std::abs(s.median), 1e-12});
    return s;
}

void label_rules(DigitalTwin& twin, const RuleThresholds& th) {
    if (twin.voxels.empty()) throw std::invalid_argument("cannot label an empty twin");
    if (!(th.width_spike_z > 0) || !(th.area_high_z > 0) || th.baseline_window < 0)
        throw std::invalid_argument("rule thresholds must be positive");

    std::map<int, std::vector<fusion::Voxel*>> layers;
    std::vector<double> areas;
    for (auto& [k, v] : twin.voxels) {
        layers[v.layer()].push_back(&v);
        if (!std::isnan(v.mean(kChannelMpArea))) areas.push_back(v.mean(kChannelMpArea));
    }
    const int lo = layers.begin()->first, hi = layers.rbegin()->first;
    const double upper_from = lo + (hi - lo + 1) / 2.0;
    const bool have_area = !areas.empty();
    const RobustStats area_base = have_area ? robust_stats(areas) : RobustStats{};

    for (auto& [layer, voxels] : layers) {
        std::vector<double> widths;
        for (int l = layer - th.baseline_window; l <= layer + th.baseline_window; ++l) {
            const auto it = layers.find(l);
            if (it == layers.end()) continue;
            for (const auto* v : it->second)
                if (!std::isnan(v->mean(kChannelMpWidth))) widths.push_back(v->mean(kChannelMpWidth));
        }
        std::vector<bool> spike(voxels.size(), false);
        std::size_t flagged = 0, measured = 0;
        if (!widths.empty()) {
            const auto base = robust_stats(widths);
            for (std::size_t i = 0; i < voxels.size(); ++i) {
                const double w = voxels[i]->mean(kChannelMpWidth);
                if (std::isnan(w)) continue;
                ++measured;
                if ((w - base.median) / base.scale > th.width_spike_z) {
                    spike[i] = true;
                    ++flagged;
                }
            }
        }
        const bool isolated = static_cast<double>(flagged) < th.isolated_fraction * static_cast<double>(measured);
        for (std::size_t i = 0; i < voxels.size(); ++i) {
            auto& v = *voxels[i];
            v.label = QualityLabel::ok;
            if (spike[i] && isolated) {
                v.label = QualityLabel::crack;
                continue;
            }
            const double a = v.mean(kChannelMpArea);
            if (have_area && !std::isnan(a) && layer >= upper_from &&
                (a - area_base.median) / area_base.scale > th.area_high_z)
                v.label = QualityLabel::keyhole_pore;
        }
    }
}

// ---- kNN --------------------------------------------------------------------

Classifier fit_knn(const std::vector<std::vector<double>>& rows, const std::vector<QualityLabel>& labels,
                   std::size_t k, std::vector<std::string> schema) {
    if (rows.size() != labels.size()) throw std::invalid_argument("row / label count mismatch");
    if (k == 0 || k > rows.size()) throw std::invalid_argument("k must be in [1, training rows]");
    const std::size_t d = rows.front().size();
    if (schema.empty())
        for (std::size_t j = 0; j < d; ++j) schema.push_back("f" + std::to_string(j));
    if (schema.size() != d) throw std::invalid_argument("schema width mismatch");
    for (const auto& r : rows)
        if (r.size() != d) throw std::invalid_argument("ragged training rows");

    Classifier c;
    c.k = k;
    c.schema = std::move(schema);
    for (std::size_t j = 0; j < d; ++j) {
        double n = 0, s = 0;
        for (const auto& r : rows)
            if (!std::isnan(r[j])) n += 1, s += r[j];
        const double mean = n > 0 ? s / n : kNaN;
        double ss = 0;
        for (const auto& r : rows)
            if (!std::isnan(r[j])) ss += (r[j] - mean) * (r[j] - mean);
        const double sd = n > 0 ? std::sqrt(ss / n) : 0.0;
        if (!(sd > 0)) {
            c.warnings.push_back("feature '" + c.schema[j] + "' has zero variance; dropped");
            continue;
        }
        c.used.push_back(j);
        c.mean.push_back(mean);
        c.sd.push_back(sd);
    }
    for (const auto& r : rows) {
        std::vector<double> p(c.used.size());
        for (std::size_t u = 0; u < c.used.size(); ++u) {
            const double x = r[c.used[u]];
            p[u] = std::isnan(x) ? 0.0 : (x - c.mean[u]) / c.sd[u];
        }
        c.points.push_back(std::move(p));
    }
    c.labels = labels;
    return c;
}

QualityLabel predict(const Classifier& c, const std::vector<double>& row) {
    if (row.size() != c.schema.size()) throw std::invalid_argument("feature row does not match classifier schema");
    std::vector<double> q(c.used.size());
    for (std::size_t u = 0; u < c.used.size(); ++u) {
        const double x = row[c.used[u]];
        q[u] = std::isnan(x) ? 0.0 : (x - c.mean[u]) / c.sd[u];
    }
    // Max-heap of the k best (distance^2, index) pairs.
    std::priority_queue<std::pair<double, std::size_t>> best;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        double d2 = 0;
        for (std::size_t u = 0; u < q.size(); ++u) {
            const double diff = q[u] - c.points[i][u];
            d2 += diff * diff;
        }
        const std::pair<double, std::size_t> cand{d2, i};
        if (best.size() < c.k) best.push(cand);
        else if (cand < best.top()) {
            best.pop();
            best.push(cand);
        }
    }
    std::map<QualityLabel, std::pair<std::size_t, double>> votes;  // count, summed distance
    while (!best.empty()) {
        auto& v = votes[c.labels[best.top().second]];
        ++v.first;
        v.second += std::sqrt(best.top().first);
        best.pop();
    }
    QualityLabel pick = votes.begin()->first;
    auto top = votes.begin()->second;
    for (const auto& [label, v] : votes) {
        if (v.first > top.first || (v.first == top.first && v.second < top.second)) {
            pick = label;
            top = v;
        }
    }
    return pick;
}

std::vector<std::string> voxel_feature_names() {
    std::vector<std::string> n;
    for (const auto& c : feature_channel_names()) n.push_back("mean_" + c);
    return n;
}

std::vector<double> voxel_features(const fusion::Voxel& v) {
    std::vector<double> f(kFeatureChannels);
    for (std::size_t c = 0; c < kFeatureChannels; ++c) f[c] = v.mean(c);
    return f;
}

void predict_twin(const Classifier& c, DigitalTwin& twin) {
    if (c.schema != voxel_feature_names()) throw std::invalid_argument("classifier schema does not match the twin");
    for (auto& [k, v] : twin.voxels) v.label = predict(c, voxel_features(v));
}

void save_classifier(const Classifier& c, const std::filesystem::path& path) {
    std::vector<std::string> header = {"row", "label"};
    header.insert(header.end(), c.schema.begin(), c.schema.end());
    const std::size_t d = c.schema.size();
    auto expand = [&](const std::vector<double>& used_vals, double fill) {
        std::vector<double> full(d, fill);
        for (std::size_t u = 0; u < c.used.size(); ++u) full[c.used[u]] = used_vals[u];
        return full;
    };
    std::vector<std::vector<std::string>> rows;
    auto add = [&](const std::string& kind, const std::string& label, const std::vector<double>& vals) {
        std::vector<std::string> r = {kind, label};
        for (double v : vals) r.push_back(format_real(v));
        rows.push_back(std::move(r));
    };
    add("k", std::to_string(c.k), std::vector<double>(d, 0.0));
    add("mean", "-", expand(c.mean, kNaN));
    add("sd", "-", expand(c.sd, 0.0));
    for (std::size_t i = 0; i < c.points.size(); ++i) add("train", fusion::to_string(c.labels[i]), expand(c.points[i], kNaN));
    csv::write(path, header, rows);
}

Classifier load_classifier(const std::filesystem::path& path) {
    const auto t = csv::read(path, "classifier");
    if (t.header.size() < 3 || t.rows.size() < 4 || t.rows[0][0] != "k" || t.rows[1][0] != "mean" ||
        t.rows[2][0] != "sd")
        throw DataError("classifier", 0, "not a classifier file");
    Classifier c;
    c.schema.assign(t.header.begin() + 2, t.header.end());
    try {
        c.k = std::stoul(t.rows[0][1]);
        for (std::size_t j = 0; j < c.schema.size(); ++j) {
            const double sd = parse_real(t.rows[2][j + 2]);
            if (!(sd > 0)) continue;
            c.used.push_back(j);
            c.mean.push_back(parse_real(t.rows[1][j + 2]));
            c.sd.push_back(sd);
        }
        for (std::size_t i = 3; i < t.rows.size(); ++i) {
            if (t.rows[i][0] != "train") throw DataError("classifier", i, "expected a training row");
            c.labels.push_back(fusion::parse_label(t.rows[i][1]));
            std::vector<double> p;
            for (std::size_t j : c.used) p.push_back(parse_real(t.rows[i][j + 2]));
            c.points.push_back(std::move(p));
        }
    } catch (const std::invalid_argument& e) {
        throw DataError("classifier", 0, e.what());
    }
    if (c.k == 0 || c.k > c.points.size()) throw DataError("classifier", 0, "k out of range");
    return c;
}

// ---- regions ----------------------------------------------------------------

std::vector<DefectRegion3D> extract_regions_3d(const DigitalTwin& twin) {
    using Key = std::array<int, 3>;
    auto less = [](const Key& a, const Key& b) {
        return std::tie(a[2], a[1], a[0]) < std::tie(b[2], b[1], b[0]);
    };
    std::map<Key, QualityLabel, decltype(less)> defects(less);
    for (const auto& [k, v] : twin.voxels)
        if (v.label != QualityLabel::ok) defects[{v.ix, v.iy, v.iz}] = v.label;

    static constexpr int kFaces[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    std::set<Key, decltype(less)> seen(less);
    std::vector<DefectRegion3D> out;
    for (const auto& [start, label] : defects) {
        if (seen.count(start)) continue;
        DefectRegion3D r;
        r.label = label;
        std::vector<Key> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            const Key cur = stack.back();
            stack.pop_back();
            r.voxels.push_back(cur);
            for (const auto& f : kFaces) {
                const Key nb{cur[0] + f[0], cur[1] + f[1], cur[2] + f[2]};
                const auto it = defects.find(nb);
                if (it != defects.end() && it->second == label && !seen.count(nb)) {
                    seen.insert(nb);
                    stack.push_back(nb);
                }
            }
        }
        std::sort(r.voxels.begin(), r.voxels.end(), less);
        const std::set<Key, decltype(less)> members(r.voxels.begin(), r.voxels.end(), less);
        r.min = r.max = r.voxels.front();
        Vec3 sum;
        for (const auto& v : r.voxels) {
            for (int a = 0; a < 3; ++a) {
                r.min[a] = std::min(r.min[a], v[a]);
                r.max[a] = std::max(r.max[a], v[a]);
            }
            const Vec3 c = twin.grid.center(v[0], v[1], v[2]);
            sum.x += c.x;
            sum.y += c.y;
            sum.z += c.z;
            for (const auto& f : kFaces) {
                if (!members.count({v[0] + f[0], v[1] + f[1], v[2] + f[2]})) {
                    r.boundary.push_back(v);
                    break;
                }
            }
        }
        const double n = static_cast<double>(r.voxels.size());
        r.centroid = {sum.x / n, sum.y / n, sum.z / n};
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const DefectRegion3D& a, const DefectRegion3D& b) {
        return a.voxels.size() > b.voxels.size();
    });
    return out;
}

void write_regions(const std::vector<DefectRegion3D>& regions, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& r = regions[i];
        rows.push_back({std::to_string(i), fusion::to_string(r.label), std::to_string(r.voxels.size()),
                        format_real(r.centroid.x), format_real(r.centroid.y), format_real(r.centroid.z),
                        std::to_string(r.min_layer()), std::to_string(r.max_layer())});
    }
    csv::write(path, {"region_id", "label", "voxels", "cx", "cy", "cz", "min_layer", "max_layer"}, rows);
}

std::map<std::int64_t, QualityLabel> twin_labels(const DigitalTwin& twin) {
    std::map<std::int64_t, QualityLabel> m;
    for (const auto& [k, v] : twin.voxels) m[k] = v.label;
    return m;
}

std::vector<LabelScore> score_labels(const std::map<std::int64_t, QualityLabel>& predicted,
                                     const std::map<std::int64_t, QualityLabel>& truth) {
    std::vector<LabelScore> out;
    for (auto label : {QualityLabel::ok, QualityLabel::keyhole_pore, QualityLabel::crack}) {
        LabelScore s;
        s.label = label;
        for (const auto& [k, p] : predicted) {
            const auto it = truth.find(k);
            const QualityLabel t = it == truth.end() ? QualityLabel::ok : it->second;
            if (p == label && t == label) ++s.tp;
            else if (p == label) ++s.fp;
            else if (t == label) ++s.fn;
        }
        out.push_back(s);
    }
    return out;
}

void write_scores(const std::vector<LabelScore>& scores, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : scores) {
        rows.push_back({fusion::to_string(s.label), std::to_string(s.tp), std::to_string(s.fp), std::to_string(s.fn),
                        format_real(s.precision()), format_real(s.recall())});
    }
    csv::write(path, {"label", "tp", "fp", "fn", "precision", "recall"}, rows);
}

// ---- correction -------------------------------------------------------------

const char* to_string(ActionKind a) { return a == ActionKind::machine_remove ? "machine_remove" : "deposit_restore"; }

PlanContext plan_context(const DigitalTwin& twin) {
    PlanContext ctx{twin.grid, twin.grid.origin.z};
    for (const auto& [k, v] : twin.voxels)
        ctx.top_z = std::max(ctx.top_z, twin.grid.origin.z + (v.iz + 1) * twin.grid.voxel_size);
    return ctx;
}

CorrectionPlan plan_correction(const std::vector<DefectRegion3D>& regions,
                               const std::vector<surface::SurfaceRegion>& surface_regions, const PlanContext& ctx) {
    struct Volume {
        QualityLabel label;
        double z_floor, z_top;
        Footprint fp;
        bool remove, restore;
    };
    std::vector<Volume> volumes;
    const auto& g = ctx.grid;
    for (const auto& r : regions) {
        if (r.label == QualityLabel::ok) continue;
        Footprint fp{{g.origin.x, g.origin.y}, g.voxel_size, {}};
        for (const auto& v : r.voxels) fp.cells.insert({v[0], v[1]});
        volumes.push_back({r.label, g.origin.z + r.min_layer() * g.voxel_size, ctx.top_z, std::move(fp), true, true});
    }
    for (const auto& s : surface_regions) {
        if (s.kind == surface::CellClass::over_built)
            volumes.push_back({QualityLabel::over_built, s.nominal, s.nominal + s.mean_deviation, s.footprint(), true, false});
        else if (s.kind == surface::CellClass::under_built)
            volumes.push_back(
                {QualityLabel::under_built, s.nominal - std::abs(s.mean_deviation), s.nominal, s.footprint(), false, true});
    }
    std::stable_sort(volumes.begin(), volumes.end(),
                     [](const Volume& a, const Volume& b) { return a.z_floor < b.z_floor; });
    CorrectionPlan plan;
    for (std::size_t i = 0; i < volumes.size(); ++i) {
        const auto& v = volumes[i];
        if (v.remove) plan.actions.push_back({ActionKind::machine_remove, i, v.label, v.z_floor, v.z_top, v.fp});
        if (v.restore) plan.actions.push_back({ActionKind::deposit_restore, i, v.label, v.z_floor, v.z_top, v.fp});
    }
    return plan;
}

double deposit_power(const ToolpathParams& p, double depth) {
    return p.base_power_w * std::clamp(1.0 + p.power_gain * (depth / p.layer_height - 1.0), 0.8, 1.2);
}

Toolpath generate_toolpath(const CorrectionPlan& plan, const ToolpathParams& p) {
    if (plan.actions.empty()) throw std::invalid_argument("empty correction plan");
    Toolpath out;
    for (const auto& a : plan.actions) {
        const double depth = a.depth();
        const int n = std::max(1, static_cast<int>(std::ceil(depth / p.layer_height - 1e-9)));
        for (int i = 0; i < n; ++i) {
            Toolpath part;
            switch (a.kind) {
                case ActionKind::machine_remove:
                    part = raster_fill(a.footprint, {p.hatch, a.z_top - (i + 1) * depth / n, ToolMode::machine, 0.0,
                                                     p.machine_feed});
                    break;
                case ActionKind::deposit_restore:
                    part = raster_fill(a.footprint, {p.hatch, a.z_floor + (i + 1) * depth / n, ToolMode::deposit,
                                                     deposit_power(p, depth), p.deposit_feed});
                    break;
                default: throw std::invalid_argument("unknown action kind");
            }
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    return out;
}

void write_plan(const CorrectionPlan& plan, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const auto& a = plan.actions[i];
        rows.push_back({std::to_string(i), std::to_string(a.volume), to_string(a.kind), fusion::to_string(a.label),
                        format_real(a.z_floor), format_real(a.z_top), format_real(a.depth()),
                        std::to_string(a.footprint.cells.size())});
    }
    csv::write(path, {"action_id", "volume", "action", "label", "z_floor", "z_top", "depth_mm", "cells"}, rows);
}

}  // namespace lded::quality
