// Independent brute-force reference computations used by the unit and
// acceptance tests. Nothing here calls into the library's algorithms; only
// plain data types are shared.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "lded/common.hpp"
#include "lded/fusion.hpp"
#include "lded/image.hpp"

namespace oracle {

// ---- images -----------------------------------------------------------------

/// Exhaustive Otsu: evaluates every threshold with direct pixel loops.
inline int otsu(const lded::GrayImage& img) {
    double best = -1.0;
    int best_t = -1;
    for (int t = 0; t < 256; ++t) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                const int v = img.at(x, y);
                if (v < t) {
                    n0 += 1;
                    s0 += v;
                } else {
                    n1 += 1;
                    s1 += v;
                }
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        const double m0 = s0 / n0, m1 = s1 / n1;
        const double between = n0 * n1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

inline double m00(const lded::Grid<std::uint8_t>& img, const lded::BinaryMask& mask) {
    double s = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) s += img.at(x, y) * mask.at(x, y) * 1.0;
    return s;
}

struct Moments {
    double cx, cy, mu00, mu10, mu01, mu20, mu02, mu11;
};

/// Two-pass double-loop central moments.
inline Moments central(const lded::Grid<std::uint8_t>& img, const lded::BinaryMask& mask) {
    double s = 0, sx = 0, sy = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            if (!mask.at(x, y)) continue;
            s += img.at(x, y);
            sx += img.at(x, y) * static_cast<double>(x);
            sy += img.at(x, y) * static_cast<double>(y);
        }
    Moments m{sx / s, sy / s, 0, 0, 0, 0, 0, 0};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const double i = img.at(x, y), dx = x - m.cx, dy = y - m.cy;
            m.mu00 += i;
            m.mu10 += i * dx;
            m.mu01 += i * dy;
            m.mu20 += i * dx * dx;
            m.mu02 += i * dy * dy;
            m.mu11 += i * dx * dy;
        }
    return m;
}

/// O(n^3) hull: an ordered pair (i, j) is a hull edge when every other point
/// lies to its left or on the segment. Area from the vertices sorted by angle.
inline double hull_area(const std::vector<lded::Vec2>& raw) {
    std::vector<lded::Vec2> p;
    for (const auto& q : raw) {
        if (std::none_of(p.begin(), p.end(), [&](const lded::Vec2& r) { return r.x == q.x && r.y == q.y; }))
            p.push_back(q);
    }
    const std::size_t n = p.size();
    if (n < 3) return 0.0;
    std::vector<lded::Vec2> verts;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            bool edge = true;
            for (std::size_t k = 0; k < n && edge; ++k) {
                if (k == i || k == j) continue;
                const double c = (p[j].x - p[i].x) * (p[k].y - p[i].y) - (p[j].y - p[i].y) * (p[k].x - p[i].x);
                if (c < 0) edge = false;
                if (c == 0) {
                    const double d = (p[k].x - p[i].x) * (p[j].x - p[i].x) + (p[k].y - p[i].y) * (p[j].y - p[i].y);
                    const double l2 = (p[j].x - p[i].x) * (p[j].x - p[i].x) + (p[j].y - p[i].y) * (p[j].y - p[i].y);
                    if (d < 0 || d > l2) edge = false;  // collinear beyond the segment
                }
            }
            if (edge) verts.push_back(p[i]);
        }
    if (verts.size() < 3) return 0.0;
    double cx = 0, cy = 0;
    for (const auto& v : verts) {
        cx += v.x;
        cy += v.y;
    }
    cx /= static_cast<double>(verts.size());
    cy /= static_cast<double>(verts.size());
    std::sort(verts.begin(), verts.end(), [&](const lded::Vec2& a, const lded::Vec2& b) {
        return std::atan2(a.y - cy, a.x - cx) < std::atan2(b.y - cy, b.x - cx);
    });
    double twice = 0;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const auto& a = verts[i];
        const auto& b = verts[(i + 1) % verts.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

// ---- spectra ----------------------------------------------------------------

inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
            acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

inline double centroid(const std::vector<double>& f, const std::vector<double>& m) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        num += f[k] * m[k];
        den += m[k];
    }
    return num / den;
}

inline double bandwidth(const std::vector<double>& f, const std::vector<double>& m) {
    const double c = centroid(f, m);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        num += m[k] * (f[k] - c) * (f[k] - c);
        den += m[k];
    }
    return std::sqrt(num / den);
}

inline double rolloff(const std::vector<double>& f, const std::vector<double>& m, double pct) {
    double total = 0;
    for (double v : m) total += v * v;
    for (std::size_t k = 0; k < f.size(); ++k) {
        double cum = 0;
        for (std::size_t j = 0; j <= k; ++j) cum += m[j] * m[j];
        if (cum >= pct * total) return f[k];
    }
    return f.back();
}

// ---- statistics -------------------------------------------------------------

struct Stats {
    double mean, var, max;
};

/// Two-pass population mean/variance.
inline Stats two_pass(const std::vector<double>& v) {
    double s = 0, mx = -INFINITY;
    for (double x : v) {
        s += x;
        mx = std::max(mx, x);
    }
    const double mean = s / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, ss / static_cast<double>(v.size()), mx};
}

// ---- flood fill -------------------------------------------------------------

/// Canonical partition of cells into components: returns sets of cell keys.
template <class Key, class Neighbors>
std::set<std::set<Key>> flood_partition(const std::set<Key>& cells, Neighbors neighbors) {
    std::set<std::set<Key>> parts;
    std::set<Key> seen;
    for (const auto& c : cells) {
        if (seen.count(c)) continue;
        std::set<Key> comp;
        std::vector<Key> queue{c};
        seen.insert(c);
        while (!queue.empty()) {
            Key cur = queue.back();
            queue.pop_back();
            comp.insert(cur);
            for (const Key& nb : neighbors(cur)) {
                if (cells.count(nb) && !seen.count(nb)) {
                    seen.insert(nb);
                    queue.push_back(nb);
                }
            }
        }
        parts.insert(comp);
    }
    return parts;
}

// ---- nearest neighbours -----------------------------------------------------

/// Brute-force kNN: standardize, fully sort (distance^2, index), vote with
/// ties to the smaller summed distance, then the earlier label.
inline lded::fusion::QualityLabel knn(const std::vector<std::vector<double>>& train,
                                      const std::vector<lded::fusion::QualityLabel>& labels,
                                      const std::vector<double>& q, std::size_t k) {
    const std::size_t n = train.size(), d = q.size();
    std::vector<double> mean(d, 0), sd(d, 0);
    for (std::size_t j = 0; j < d; ++j) {
        for (const auto& r : train) mean[j] += r[j];
        mean[j] /= double(n);
        for (const auto& r : train) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
        sd[j] = std::sqrt(sd[j] / double(n));
    }
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = 0;
        for (std::size_t j = 0; j < d; ++j) {
            const double a = (q[j] - mean[j]) / sd[j], b = (train[i][j] - mean[j]) / sd[j];
            d2 += (a - b) * (a - b);
        }
        all.push_back({d2, i});
    }
    std::sort(all.begin(), all.end());
    using L = lded::fusion::QualityLabel;
    const std::vector<L> order = {L::ok, L::keyhole_pore, L::crack};
    std::vector<std::size_t> count(3, 0);
    std::vector<double> dist(3, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto pos = std::find(order.begin(), order.end(), labels[all[i].second]) - order.begin();
        ++count[pos];
        dist[pos] += std::sqrt(all[i].first);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c) {
        if (count[c] > count[best] || (count[c] == count[best] && dist[c] < dist[best])) best = c;
    }
    return order[best];
}

}  // namespace oracle
