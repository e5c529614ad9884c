#pragma once

#include <string>
#include <vector>

#include "bmc/image.hpp"

namespace bmc {

struct LocalizationParams {
    double t1 = 0.46;  ///< circularity below which the cell is assumed widest
    double t2 = 0.85;  ///< circularity from which the nucleus counts as round
    long long min_nucleus_area = 30;
};

/// Shape summary of one nucleus (possibly several mask components after a
/// merge) driving the cytoplasm search radius.
struct NucleusShape {
    double area = 0.0;
    double perimeter = 0.0;
    double circularity = 0.0;
    double reference_radius = 0.0;   ///< L / (2*pi)
    double equivalent_radius = 0.0;  ///< 2.6R, 2.3R or 1.6R
    PointF center;
};

/// Merges rectangles that overlap with both centers inside the overlap,
/// iterating to a fixpoint; the scan is sorted by (y0, x0) so the result does
/// not depend on input order.
std::vector<Roi> merge_nucleus_rois(std::vector<Roi> rois);

/// One circumscribed rectangle per outer contour (components smaller than
/// `min_nucleus_area` are dropped), merged as above.
std::vector<Roi> nucleus_rois(const Mask& mask, const LocalizationParams& p = {});

/// Equivalent-radius multiplier for a circularity value. CirR == t1 falls
/// in the middle band and CirR == t2 in the top band.
double equivalent_radius_factor(double circularity, const LocalizationParams& p = {});

NucleusShape nucleus_shape(double area, double perimeter, PointF center, const LocalizationParams& p = {});

/// Components of `sam_mask` (>= min area) whose bounding boxes lie inside
/// `nucleus_roi`, i.e. the nucleus a merged ROI stands for.
Mask coarse_nucleus_mask(const Mask& sam_mask, const Roi& nucleus_roi, const LocalizationParams& p = {});

/// Shape of the nucleus inside `nucleus_roi`, recomputed on all of its
/// components. DegenerateError when the perimeter is zero.
NucleusShape measure_nucleus(const Mask& sam_mask, const Roi& nucleus_roi, const LocalizationParams& p = {});

/// Square circumscribing the circle of radius Re at the nucleus center,
/// clipped to the image.
Roi cytoplasm_roi(const NucleusShape& shape, int image_width, int image_height);

Roi combine_rois(const Roi& nucleus_roi, const Roi& cytoplasm_roi);

struct CellCandidate {
    Roi nucleus;
    Roi cytoplasm;
    Roi combined;
    NucleusShape shape;
};

/// Both localization stages for every nucleus in the mask, sorted by
/// combined ROI position (y0, x0).
std::vector<CellCandidate> locate_cells(const Mask& sam_mask, const LocalizationParams& p = {});

/// CSV lines `x0,y0,x1,y1,kind`, three per candidate (nucleus, cytoplasm,
/// combined), preceded by a header line.
std::string write_roi_csv(const std::vector<CellCandidate>& cells);
/// Inverse of write_roi_csv; shapes are not stored and come back empty.
std::vector<CellCandidate> read_roi_csv(const std::string& text);

}  // namespace bmc
