#include "lded/meltpool.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "lded/csv.hpp"

namespace lded::meltpool {

using Int = __int128;

int otsu_threshold(const GrayImage& img) {
    std::array<double, 256> hist{};
    for (auto v : img.data()) hist[v] += 1.0;
    const double total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += v * hist[v];

    double w0 = 0.0, sum0 = 0.0;
    double best = -1.0;
    int best_t = -1;
    for (int t = 1; t < 256; ++t) {
        w0 += hist[t - 1];
        sum0 += (t - 1) * hist[t - 1];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    if (best_t < 0) return static_cast<int>(img.data().front()) + 1;
    return best_t;
}

BinaryMask binarize(const GrayImage& img, Binarization method) {
    int t = method.threshold;
    if (method.use_otsu) {
        t = otsu_threshold(img);
    } else if (t < 0 || t > 255) {
        throw std::invalid_argument("fixed threshold must lie in [0, 255]");
    }
    BinaryMask mask(img.width(), img.height(), 0);
    for (std::size_t i = 0; i < img.size(); ++i) mask.data()[i] = img.data()[i] >= t ? 1 : 0;
    return mask;
}

namespace {

void require_same_shape(const Grid<std::uint8_t>& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("image and mask dimensions differ");
}

struct RawMoments {
    Int m00 = 0, m10 = 0, m01 = 0, m20 = 0, m02 = 0, m11 = 0;
};

RawMoments raw_moments(const Grid<std::uint8_t>& intensity, const BinaryMask& mask) {
    RawMoments r;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const Int i = intensity.at(x, y);
            r.m00 += i;
            r.m10 += i * x;
            r.m01 += i * y;
            r.m20 += i * x * x;
            r.m02 += i * y * y;
            r.m11 += i * x * y;
        }
    }
    return r;
}

double to_double(Int v) { return static_cast<double>(v); }

}  // namespace

double contour_area_moment(const Grid<std::uint8_t>& intensity, const BinaryMask& mask) {
    require_same_shape(intensity, mask);
    Int sum = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.data()[i]) sum += intensity.data()[i];
    }
    return to_double(sum);
}

std::optional<CentralMoments> central_moments(const Grid<std::uint8_t>& intensity, const BinaryMask& mask) {
    require_same_shape(intensity, mask);
    const auto r = raw_moments(intensity, mask);
    if (r.m00 == 0) return std::nullopt;
    CentralMoments c;
    const double m00 = to_double(r.m00);
    c.m00 = m00;
    c.cx = to_double(r.m10) / m00;
    c.cy = to_double(r.m01) / m00;
    // m00 * mu_ji is an integer that does not change under translation.
    c.mu20 = to_double(r.m00 * r.m20 - r.m10 * r.m10) / m00;
    c.mu02 = to_double(r.m00 * r.m02 - r.m01 * r.m01) / m00;
    c.mu11 = to_double(r.m00 * r.m11 - r.m10 * r.m01) / m00;
    return c;
}

Hull convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    Hull h;
    if (pts.size() < 3) {
        h.polygon = pts;
        return h;
    }
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    double twice = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    h.polygon = std::move(hull);
    h.area = std::abs(twice) / 2.0;
    return h;
}

Hull convex_hull(const BinaryMask& mask) {
    std::vector<Vec2> pts;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
        }
    }
    if (pts.empty()) throw std::invalid_argument("convex hull of an empty mask");
    return convex_hull(std::move(pts));
}

Ellipse fit_ellipse(std::span<const Vec2> points) {
    const std::size_t n = points.size();
    if (n < 5) throw EllipseFitError("ellipse fit needs at least 5 points");

    // Normalize for conditioning: zero mean, unit RMS radius.
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double rms = 0.0;
    for (const auto& p : points) rms += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    rms = std::sqrt(rms / static_cast<double>(n));
    if (!(rms > 0.0)) throw EllipseFitError("degenerate point set");

    Eigen::MatrixXd d1(n, 3), d2(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (points[i].x - mx) / rms;
        const double y = (points[i].y - my) / rms;
        const auto r = static_cast<Eigen::Index>(i);
        d1(r, 0) = x * x;
        d1(r, 1) = x * y;
        d1(r, 2) = y * y;
        d2(r, 0) = x;
        d2(r, 1) = y;
        d2(r, 2) = 1.0;
    }
    const Eigen::Matrix3d s1 = d1.transpose() * d1;
    const Eigen::Matrix3d s2 = d1.transpose() * d2;
    const Eigen::Matrix3d s3 = d2.transpose() * d2;
    const Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
    if (!s3_lu.isInvertible()) throw EllipseFitError("collinear points");
    const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
    const Eigen::Matrix3d m = s1 + s2 * t;
    // Premultiply by the inverse of the constraint matrix.
    Eigen::Matrix3d reduced;
    reduced.row(0) = m.row(2) / 2.0;
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / 2.0;

    const Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
    const Eigen::Matrix3d vecs = es.eigenvectors().real();
    int pick = -1;
    double best_cond = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d v = vecs.col(i);
        const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (cond > best_cond) {
            best_cond = cond;
            pick = i;
        }
    }
    if (pick < 0) throw EllipseFitError("no elliptical solution");
    const Eigen::Vector3d quad = vecs.col(pick);
    const Eigen::Vector3d lin = t * quad;

    const double A = quad(0), B = quad(1), C = quad(2);
    const double D = lin(0), E = lin(1), F = lin(2);
    const double det = 4.0 * A * C - B * B;
    if (!(det > 0.0)) throw EllipseFitError("conic is not an ellipse");
    const double x0 = (B * E - 2.0 * C * D) / det;
    const double y0 = (B * D - 2.0 * A * E) / det;
    const double f0 = A * x0 * x0 + B * x0 * y0 + C * y0 * y0 + D * x0 + E * y0 + F;

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> q(
        (Eigen::Matrix2d() << A, B / 2.0, B / 2.0, C).finished());
    const Eigen::Vector2d lam = q.eigenvalues();  // ascending
    const double r_major = -f0 / lam(0);
    const double r_minor = -f0 / lam(1);
    if (!(r_major > 0.0 && r_minor > 0.0) || !std::isfinite(r_major) || !std::isfinite(r_minor)) {
        throw EllipseFitError("imaginary ellipse");
    }
    // Same sign for both eigenvalues guaranteed by det > 0; the smaller
    // |lambda| gives the longer axis.
    const bool first_is_major = std::abs(lam(0)) <= std::abs(lam(1));
    const double semi0 = std::sqrt(r_major);
    const double semi1 = std::sqrt(r_minor);
    const Eigen::Vector2d major_dir = q.eigenvectors().col(first_is_major ? 0 : 1);

    Ellipse e;
    e.length_b = std::max(semi0, semi1) * rms;
    e.width_a = std::min(semi0, semi1) * rms;
    double ang = std::atan2(major_dir(1), major_dir(0));
    if (ang < 0) ang += std::numbers::pi;
    if (ang >= std::numbers::pi) ang -= std::numbers::pi;
    e.angle = ang;
    e.center = {x0 * rms + mx, y0 * rms + my};
    return e;
}

std::vector<Vec2> boundary_points(const BinaryMask& mask) {
    std::vector<Vec2> pts;
    auto outside = [&](int x, int y) { return !mask.in_bounds(x, y) || !mask.at(x, y); };
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const double fx = x, fy = y;
            if (outside(x + 1, y)) pts.push_back({fx + 0.5, fy});
            if (outside(x - 1, y)) pts.push_back({fx - 0.5, fy});
            if (outside(x, y + 1)) pts.push_back({fx, fy + 0.5});
            if (outside(x, y - 1)) pts.push_back({fx, fy - 0.5});
        }
    }
    return pts;
}

Ellipse fit_ellipse(const BinaryMask& mask) {
    const auto pts = boundary_points(mask);
    return fit_ellipse(std::span<const Vec2>(pts));
}

MeltPoolFeatures extract_meltpool_features(double t, const GrayImage& img, const MeltPoolConfig& cfg) {
    MeltPoolFeatures f;
    f.t = t;
    Binarization method = cfg.binarization;
    if (method.use_otsu) method = Binarization::fixed(std::clamp(otsu_threshold(img), cfg.min_threshold, 255));
    const BinaryMask pool = largest_component(binarize(img, method), Connectivity::eight);
    if (pool.count() < std::max<std::size_t>(cfg.min_pixels, 1)) return f;

    const auto moments = central_moments(pool, pool);
    Ellipse ellipse;
    try {
        ellipse = fit_ellipse(pool);
    } catch (const EllipseFitError&) {
        return f;
    }
    f.area_m00 = moments->m00;
    f.cx = moments->cx;
    f.cy = moments->cy;
    f.mu20 = moments->mu20;
    f.mu02 = moments->mu02;
    f.mu11 = moments->mu11;
    f.hull_area = convex_hull(pool).area;
    f.width_a = ellipse.width_a;
    f.length_b = ellipse.length_b;
    f.valid = true;
    return f;
}

void write_features(const std::vector<MeltPoolFeatures>& feats, const std::filesystem::path& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(feats.size());
    for (const auto& f : feats) {
        rows.push_back({format_real(f.t), format_real(f.area_m00), format_real(f.cx), format_real(f.cy),
                        format_real(f.mu20), format_real(f.mu02), format_real(f.mu11),
                        format_real(f.hull_area), format_real(f.width_a), format_real(f.length_b),
                        f.valid ? "1" : "0"});
    }
    csv::write(path, {"t", "area", "cx", "cy", "mu20", "mu02", "mu11", "hull_area", "width", "length", "valid"},
               rows);
}

std::vector<MeltPoolFeatures> read_features(const std::filesystem::path& path) {
    const auto table = csv::read(path, "meltpool_features");
    std::vector<MeltPoolFeatures> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        if (r.size() != 11) throw DataError("meltpool_features", i, "expected 11 columns");
        MeltPoolFeatures f;
        try {
            f.t = parse_real(r[0]);
            f.area_m00 = parse_real(r[1]);
            f.cx = parse_real(r[2]);
            f.cy = parse_real(r[3]);
            f.mu20 = parse_real(r[4]);
            f.mu02 = parse_real(r[5]);
            f.mu11 = parse_real(r[6]);
            f.hull_area = parse_real(r[7]);
            f.width_a = parse_real(r[8]);
            f.length_b = parse_real(r[9]);
        } catch (const std::invalid_argument& e) {
            throw DataError("meltpool_features", i, e.what());
        }
        f.valid = r[10] == "1";
        out.push_back(f);
    }
    return out;
}

}  // namespace lded::meltpool
