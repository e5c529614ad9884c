#pragma once

#include <vector>

#include "bmc/image.hpp"

namespace bmc {

enum class Connectivity { Four = 4, Eight = 8 };

struct Region {
    int id = 0;                 ///< label in the companion LabelImage, 1-based
    long long pixel_count = 0;  ///< area in px^2
    Roi bounding_box;
    Point seed_pixel;  ///< first pixel of the region in raster order
};

struct Components {
    std::vector<Region> regions;  ///< ordered by seed pixel raster position
    LabelImage labels;            ///< 0 = background
};

Components connected_components(const Mask& mask, Connectivity connectivity);

/// Foreground of one labelled region.
Mask region_mask(const Components& cc, int id);

/// Closed outer boundary, counterclockwise as displayed (y axis pointing
/// down), so the shoelace sum over the points is negative. Point 0 is the
/// region's seed pixel.
struct Contour {
    std::vector<Point> points;
    std::size_t size() const { return points.size(); }
};

/// Moore-neighbour tracing of the 8-connected region containing
/// `region.seed_pixel`. Holes are never visited.
Contour trace_outer_contour(const Mask& mask, const Region& region);

/// Radius-fold application of the 3x3 square. Pixels outside the image
/// count as background.
Mask erode(const Mask& mask, int radius);
Mask dilate(const Mask& mask, int radius);

/// Zhang-Suen thinning.
Mask skeletonize(const Mask& mask);

/// Foreground plus every background pixel not 4-reachable from the border.
Mask fill_holes(const Mask& mask);

struct ContourMetrics {
    double area = 0.0;       ///< enclosed pixel count, holes filled
    double perimeter = 0.0;  ///< chain-code length, 1 per axis step and sqrt(2) per diagonal
};

/// A single-pixel contour has perimeter 0.
ContourMetrics contour_metrics(const Contour& contour, const Mask& mask);

double chain_length(const Contour& contour);

/// 4*pi*S/L^2; 0 when the perimeter is 0.
double circularity(double area, double perimeter);

/// Largest 8-connected component; ties go to the earliest seed in raster order.
Mask largest_component(const Mask& mask);

/// Components (8-connected) touching `anchor` pixels.
Mask components_touching(const Mask& mask, const Mask& anchor);

/// Drop 8-connected components smaller than `min_area`.
Mask remove_small_components(const Mask& mask, long long min_area);

/// Sum of areas and perimeters over every 8-connected component's outer
/// contour, the shape summary used for multi-part nuclei.
ContourMetrics mask_metrics(const Mask& mask);

/// Convex hull (counterclockwise in x-right/y-up terms, collinear points
/// dropped) of a point set.
std::vector<Point> convex_hull(std::vector<Point> points);

/// Distance from q to the line through a and b (to a itself when a == b).
double line_distance(Point q, Point a, Point b);

struct ConvexityDefect {
    std::size_t start = 0;    ///< contour index of the hull vertex opening the defect
    std::size_t end = 0;      ///< contour index of the hull vertex closing it
    std::size_t deepest = 0;  ///< middle of the run of deepest points
    double depth = 0.0;       ///< px from the hull edge
};

/// One entry per pair of consecutive hull vertices (in contour order) that
/// encloses at least one contour point, deepest point first found by depth.
std::vector<ConvexityDefect> convexity_defects(const Contour& contour);

}  // namespace bmc
