#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmc/color.hpp"
#include "bmc/image.hpp"
#include "bmc/morphology.hpp"

namespace bmc {

struct SegmentationParams {
    HsgParams hsg;
    double gamma = 0.5;  ///< weight of the stepwise-averaging level in both nucleus thresholds
    long long min_nucleus_area = 30;

    std::optional<double> lambda;  ///< BSG blend; empty = chosen from the particle count
    long long nwig_min_area = 200;
    long long particle_min_area = 4;
    int consistency_count = 5;
    int grow_tolerance = 12;
    int circle_seeds = 64;

    int smoothing_window = 7;
    double pole_prominence = 0.10;   ///< fraction of the largest radial distance
    double defect_min_depth = 4.0;   ///< px
    double defect_rel_depth = 0.10;  ///< fraction of the largest radial distance
    bool split_descending = true;    ///< pole pairs tried longest first
};

struct NucleusResult {
    Mask mask;
    bool fallback = false;  ///< stepwise averaging degenerated; coarse mask returned
    double t_initial = 0.0;
    double t_final = 0.0;
};

/// Refines the coarse nucleus of one patch. Thresholds come from the HSG
/// image with the coarse nucleus zeroed (HSG-M): T = gamma*cT + (1-gamma)*Otsu,
/// then T' = (1-gamma)*cT' + gamma*kT' from a second averaging pass over the
/// HSG pixels at or above T plus the coarse nucleus. The result is the coarse mask plus every HSG-M >= T'
/// component touching it, hole-filled, without specks below the minimum area.
NucleusResult segment_nucleus(const RgbImage& patch, const Mask& coarse, const SegmentationParams& p = {});

/// Union over seeds of a 4-connected flood admitting pixels within
/// `tolerance` of the region's running mean. Breadth first, neighbours
/// visited east, south, west, north; the mean updates on every admission.
Mask region_grow(const GrayImage& img, const std::vector<Point>& seeds, int tolerance);

/// `count` points on the circle of radius `radius`, rounded and kept when
/// inside the image; duplicates removed, order preserved.
std::vector<Point> circle_points(PointF center, double radius, int count, int width, int height);

struct NonBmcResult {
    Mask mask;  ///< union of the four sources minus the nucleus
    Mask low;   ///< BSG (nucleus removed) at or below the Otsu level
    Mask nwig;
    Mask zero;  ///< BSG == 0; empty when colors are inconsistent
    Mask grown;
    int otsu_level = 0;
};

/// Non-cell mask of one patch. `nwig` is the uniform-texture mask and
/// `particles` decides whether zero-BSG pixels count as background.
NonBmcResult non_bmc_mask(const GrayImage& bsg, const Mask& nucleus, const ParticleReport& particles,
                          const Mask& nwig, PointF center, double radius, const SegmentationParams& p = {});

/// BSG with the nucleus zeroed and everything at or below its Otsu level
/// zeroed, the input of the texture image. `level` receives the Otsu level.
GrayImage remove_low_background(const GrayImage& bsg, const Mask& nucleus, int* level = nullptr);

struct KMeansResult {
    LabelImage labels;  ///< 0..2 by ascending mean; -1 on excluded pixels
    std::array<double, 3> means{};
    int iterations = 0;
};

/// 1-D k-means with k = 3 over the pixels outside `exclude` (an empty mask
/// excludes nothing). Seeds at the 10th/50th/90th percentiles; a seed equal
/// to the one below it is redrawn at the same percentile from the pixels
/// above that seed. DegenerateError with fewer than three distinct values.
KMeansResult kmeans3(const GrayImage& img, const Mask& exclude);

/// Labels >= 1, reduced to the component holding `anchor` (or the largest
/// component when no anchor is given or it is background), hole-filled.
/// DegenerateError when nothing remains.
Mask initial_bmc_mask(const LabelImage& labels, std::optional<Point> anchor = std::nullopt);

/// Proper crossings between the line through `a` and `b` and the closed
/// polygon of contour points.
int line_crossings(const Contour& contour, PointF a, PointF b);

/// Index of the contour point used to start the radial profile: the point
/// nearest the center when the line through it and the center crosses the
/// contour exactly twice, else the first index 2^s mod L that passes, else
/// the nearest point.
std::size_t contour_start_point(const Contour& contour, PointF center);

struct Pole {
    std::size_t contour_index = 0;
    Point point;
    double radial_distance = 0.0;
};

/// Poles of a cell-body contour: prominent maxima of the smoothed radial
/// distance profile plus the deepest point of every deep concavity.
std::vector<Pole> detect_poles(const Contour& contour, PointF center, std::size_t start,
                               const SegmentationParams& p = {});

struct PolePair {
    Pole a;
    Pole b;
    double distance() const;
};

/// Erases the cut ellipse of a pair (major axis the pair distance, minor axis
/// a third of it) and the 4-connected segment joining the poles.
Mask apply_cut(const Mask& mask, const PolePair& pair);
Mask cut_region(int width, int height, const PolePair& pair);

/// Circularity of the 8-connected component of `mask` holding `anchor`; 0
/// when the anchor is background.
double component_circularity(const Mask& mask, Point anchor);

/// Pairs whose cut raises the circularity of the anchor's component, applied
/// cumulatively in pair-distance order.
std::vector<PolePair> split_plan(const Mask& pdg, const std::vector<Pole>& poles, Point anchor,
                                 const SegmentationParams& p = {});

/// Rounded central-difference gradient magnitude, edges replicated.
GrayImage gradient_magnitude(const GrayImage& img);

/// Priority flood from the nonzero marker labels; ties resolved first in
/// first out. Every pixel connected to a marker receives its label.
LabelImage watershed(const GrayImage& terrain, const LabelImage& markers);

struct WatershedResult {
    LabelImage markers;  ///< 0 unknown, 1 non-cell seed, 2 cell seed
    LabelImage labels;
    Mask cell;
};

/// Applies the planned cuts, seeds the anchor's component as the cell and
/// everything else as background, and floods the BSG gradient.
WatershedResult build_markers_and_watershed(const Mask& pdg, const std::vector<PolePair>& plan, Point anchor,
                                            const GrayImage& bsg);

/// Nucleus pixel closest to `c` (first in raster order on ties).
Point nearest_pixel(const Mask& m, PointF c);

struct CellSegmentation {
    Mask nucleus;
    Mask cell;
    Mask non_bmc;
    Mask pdg;
    double lambda = 1.0;
    int particle_count = 0;
    bool nucleus_fallback = false;
    std::vector<Pole> poles;
    std::vector<PolePair> cuts;
    std::vector<std::string> flags;
};

/// Called with (stage, image) for every intermediate plane.
using DebugSink = std::function<void(const std::string&, const GrayImage&)>;

/// Full segmentation of one combined-ROI patch. `coarse` is the coarse
/// nucleus in patch coordinates, `radius` the equivalent radius from
/// localization.
CellSegmentation segment_cell(const RgbImage& patch, const Mask& coarse, double radius,
                              const SegmentationParams& p = {}, const DebugSink& sink = {});

}  // namespace bmc
