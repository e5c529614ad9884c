#include "bmc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <tuple>

#include "bmc/error.hpp"
#include "bmc/morphology.hpp"

namespace bmc {

namespace {

bool roi_less(const Roi& a, const Roi& b) {
    return std::tie(a.y0, a.x0, a.y1, a.x1) < std::tie(b.y0, b.x0, b.y1, b.x1);
}

bool should_merge(const Roi& a, const Roi& b) {
    const auto overlap = intersect(a, b);
    return overlap && overlap->contains(a.center()) && overlap->contains(b.center());
}

}  // namespace

std::vector<Roi> merge_nucleus_rois(std::vector<Roi> rois) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(rois.begin(), rois.end(), roi_less);
        for (std::size_t i = 0; i < rois.size() && !changed; ++i) {
            for (std::size_t j = i + 1; j < rois.size(); ++j) {
                if (!should_merge(rois[i], rois[j])) continue;
                rois[i] = bounding_union(rois[i], rois[j]);
                rois.erase(rois.begin() + static_cast<std::ptrdiff_t>(j));
                changed = true;
                break;
            }
        }
    }
    rois.erase(std::unique(rois.begin(), rois.end()), rois.end());
    return rois;
}

std::vector<Roi> nucleus_rois(const Mask& mask, const LocalizationParams& p) {
    const Components cc = connected_components(mask, Connectivity::Eight);
    std::vector<Roi> rois;
    for (const Region& r : cc.regions)
        if (r.pixel_count >= p.min_nucleus_area) rois.push_back(r.bounding_box);
    return merge_nucleus_rois(std::move(rois));
}

double equivalent_radius_factor(double circularity, const LocalizationParams& p) {
    if (circularity < p.t1) return 2.6;
    if (circularity < p.t2) return 2.3;
    return 1.6;
}

NucleusShape nucleus_shape(double area, double perimeter, PointF center, const LocalizationParams& p) {
    if (perimeter <= 0.0 || area <= 0.0) throw DegenerateError("nucleus shape: zero perimeter or area");
    NucleusShape s;
    s.area = area;
    s.perimeter = perimeter;
    s.circularity = circularity(area, perimeter);
    s.reference_radius = perimeter / (2.0 * std::numbers::pi);
    s.equivalent_radius = equivalent_radius_factor(s.circularity, p) * s.reference_radius;
    s.center = center;
    return s;
}

Mask coarse_nucleus_mask(const Mask& sam_mask, const Roi& nucleus_roi, const LocalizationParams& p) {
    const Components cc = connected_components(sam_mask, Connectivity::Eight);
    std::vector<char> keep(cc.regions.size() + 1, 0);
    for (const Region& r : cc.regions)
        keep[r.id] = r.pixel_count >= p.min_nucleus_area && nucleus_roi.contains(r.bounding_box);
    Mask out(sam_mask.width(), sam_mask.height());
    for (int y = nucleus_roi.y0; y <= nucleus_roi.y1; ++y)
        for (int x = nucleus_roi.x0; x <= nucleus_roi.x1; ++x)
            if (keep[cc.labels(x, y)] && cc.labels(x, y) > 0) out.set(x, y);
    return out;
}

NucleusShape measure_nucleus(const Mask& sam_mask, const Roi& nucleus_roi, const LocalizationParams& p) {
    const Mask nuc = coarse_nucleus_mask(sam_mask, nucleus_roi, p);
    const ContourMetrics m = mask_metrics(nuc);
    return nucleus_shape(m.area, m.perimeter, centroid(nuc), p);
}

Roi cytoplasm_roi(const NucleusShape& shape, int image_width, int image_height) {
    if (shape.perimeter <= 0.0) throw DegenerateError("cytoplasm roi: zero-perimeter nucleus");
    const double re = shape.equivalent_radius;
    const Roi square{static_cast<int>(std::floor(shape.center.x - re)), static_cast<int>(std::floor(shape.center.y - re)),
                     static_cast<int>(std::ceil(shape.center.x + re)), static_cast<int>(std::ceil(shape.center.y + re))};
    return clip_roi(square, image_width, image_height);
}

Roi combine_rois(const Roi& nucleus_roi, const Roi& cytoplasm_roi) { return bounding_union(nucleus_roi, cytoplasm_roi); }

std::vector<CellCandidate> locate_cells(const Mask& sam_mask, const LocalizationParams& p) {
    std::vector<CellCandidate> out;
    for (const Roi& n : nucleus_rois(sam_mask, p)) {
        CellCandidate c;
        c.nucleus = n;
        c.shape = measure_nucleus(sam_mask, n, p);
        c.cytoplasm = cytoplasm_roi(c.shape, sam_mask.width(), sam_mask.height());
        c.combined = combine_rois(c.nucleus, c.cytoplasm);
        out.push_back(c);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const CellCandidate& a, const CellCandidate& b) { return roi_less(a.combined, b.combined); });
    return out;
}

std::string write_roi_csv(const std::vector<CellCandidate>& cells) {
    std::ostringstream os;
    os << "x0,y0,x1,y1,kind\n";
    const auto line = [&](const Roi& r, const char* kind) {
        os << r.x0 << ',' << r.y0 << ',' << r.x1 << ',' << r.y1 << ',' << kind << '\n';
    };
    for (const CellCandidate& c : cells) {
        line(c.nucleus, "nucleus");
        line(c.cytoplasm, "cytoplasm");
        line(c.combined, "combined");
    }
    return os.str();
}

std::vector<CellCandidate> read_roi_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<CellCandidate> out;
    CellCandidate cur;
    int have = 0;
    std::size_t offset = 0;
    bool header = true;
    while (std::getline(is, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "x0,y0,x1,y1,kind") throw FormatError("roi csv: unexpected header", line_start);
            continue;
        }
        Roi r;
        char kind[32] = {};
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%31s", &r.x0, &r.y0, &r.x1, &r.y1, kind) != 5 || r.x1 < r.x0 ||
            r.y1 < r.y0)
            throw FormatError("roi csv: malformed row", line_start);
        const std::string k = kind;
        static const char* const order[] = {"nucleus", "cytoplasm", "combined"};
        if (k != order[have]) throw FormatError("roi csv: expected kind " + std::string(order[have]), line_start);
        if (have == 0) cur.nucleus = r;
        if (have == 1) cur.cytoplasm = r;
        if (have == 2) cur.combined = r;
        if (++have == 3) {
            out.push_back(cur);
            cur = {};
            have = 0;
        }
    }
    if (have != 0) throw FormatError("roi csv: incomplete candidate", offset);
    return out;
}

}  // namespace bmc
