// Melt-pool morphology from coaxial camera frames: binarization, image
// moments, convex hull and least-squares ellipse fitting.
//
// Coordinates follow the pixel-centre convention: pixel (x, y) is the point
// (x, y) and every pixel has unit area.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lded/common.hpp"
#include "lded/image.hpp"

namespace lded::meltpool {

class EllipseFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Binarization {
    bool use_otsu = true;
    int threshold = 128;  // used when !use_otsu

    static Binarization otsu() { return {true, 0}; }
    static Binarization fixed(int t) { return {false, t}; }
};

/// Threshold t maximizing the between-class variance of {v < t} and {v >= t}.
/// The smallest maximizer wins; a constant image yields (value + 1), i.e. no
/// foreground.
int otsu_threshold(const GrayImage& img);

/// mask = img >= threshold. Throws std::invalid_argument for a fixed
/// threshold outside [0, 255].
BinaryMask binarize(const GrayImage& img, Binarization method);

/// Intensity-weighted area sum of I * mask (unit pixel area).
/// Pass the mask itself as `intensity` for the binary convention.
double contour_area_moment(const Grid<std::uint8_t>& intensity, const BinaryMask& mask);

struct CentralMoments {
    double m00 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double mu20 = 0.0;
    double mu02 = 0.0;
    double mu11 = 0.0;
};

/// Centroid and second-order central moments over masked pixels. Computed
/// from exact integer raw moments, so results are translation invariant
/// bit-for-bit. Returns nullopt when m00 == 0 (no melt pool).
std::optional<CentralMoments> central_moments(const Grid<std::uint8_t>& intensity, const BinaryMask& mask);

struct Hull {
    std::vector<Vec2> polygon;  // counter-clockwise, no repeated closing vertex
    double area = 0.0;
};

/// Convex hull of arbitrary points (Andrew's monotone chain) with shoelace area.
Hull convex_hull(std::vector<Vec2> points);

/// Convex hull of the masked pixel centres. Throws std::invalid_argument on an
/// empty mask.
Hull convex_hull(const BinaryMask& mask);

struct Ellipse {
    double width_a = 0.0;   // minor semi-axis
    double length_b = 0.0;  // major semi-axis, always >= width_a
    double angle = 0.0;     // major-axis direction in [0, pi)
    Vec2 center;
};

/// Direct least-squares ellipse fit (ellipse-specific constraint 4AC - B^2 = 1)
/// to algebraic distance. Throws EllipseFitError for fewer than 5 points,
/// collinear sets, or a best conic that is not a real ellipse.
Ellipse fit_ellipse(std::span<const Vec2> points);

/// Contour points of a mask: every masked pixel with an unmasked 4-neighbour
/// (or touching the frame edge) contributes the midpoints of its exposed
/// edges, which lie on the pixelated outline.
std::vector<Vec2> boundary_points(const BinaryMask& mask);

/// fit_ellipse over boundary_points(mask).
Ellipse fit_ellipse(const BinaryMask& mask);

struct MeltPoolFeatures {
    double t = 0.0;
    double area_m00 = kNaN;
    double cx = kNaN;
    double cy = kNaN;
    double mu20 = kNaN;
    double mu02 = kNaN;
    double mu11 = kNaN;
    double hull_area = kNaN;
    double width_a = kNaN;
    double length_b = kNaN;
    bool valid = false;
};

struct MeltPoolConfig {
    Binarization binarization = Binarization::otsu();
    /// Lower bound applied to the Otsu threshold so that frames without a melt
    /// pool do not split sensor noise into foreground.
    int min_threshold = 50;
    std::size_t min_pixels = 5;
};

/// binarize -> largest 8-connected component -> moments, hull, ellipse.
/// Degenerate frames give valid == false with all features NaN.
MeltPoolFeatures extract_meltpool_features(double t, const GrayImage& img, const MeltPoolConfig& cfg = {});

/// Per-frame CSV: t,area,cx,cy,mu20,mu02,mu11,hull_area,width,length,valid
void write_features(const std::vector<MeltPoolFeatures>& f, const std::filesystem::path& path);
std::vector<MeltPoolFeatures> read_features(const std::filesystem::path& path);

}  // namespace lded::meltpool
