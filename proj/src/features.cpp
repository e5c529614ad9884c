#include "bmc/features.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "bmc/color.hpp"
#include "bmc/error.hpp"
#include "bmc/threshold.hpp"

namespace bmc {

const std::array<std::string_view, kFeatureCount> kFeatureNames{
    "n_area",          "n_perimeter",         "n_kextr",          "n_rectr",          "nc_area_ratio",
    "nb_perimeter_ratio", "b_perimeter",      "c_area",           "ycr",              "ctrv",
    "yag",             "bnag",                "bcnag",            "sfdi",             "rn_glcm_contrast",
    "rn_glcm_energy",  "rn_glcm_homogeneity", "yc_glcm_contrast", "yc_glcm_energy",   "yc_glcm_homogeneity",
    "niv",             "hu1",                 "hu2",              "hu3",              "n_circularity",
    "b_circularity",   "nd1",                 "nd2",              "nd3",              "cd1",
    "cd2",             "cd3",                 "connected_region_count", "eccentricity", "er_two",
    "kad",             "sanv",                "lk",               "rl",
};

namespace {

constexpr std::array<std::string_view, kClassCount> kClassNames{"NSTG", "NSBG", "MBE", "MLS", "OCS"};

int component_count(const Mask& m) {
    return static_cast<int>(connected_components(m, Connectivity::Eight).regions.size());
}

// Pads by one pixel so erosion and hole filling see a background frame.
Roi padded_bounds(const Mask& m) {
    const Roi b = *m.bounds();
    return {b.x0 - 1, b.y0 - 1, b.x1 + 1, b.y1 + 1};
}

Mask crop_padded(const Mask& m, const Roi& r) {
    Mask out(r.width(), r.height());
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x)
            if (m.test(x, y)) out.set(x - r.x0, y - r.y0);
    return out;
}

double masked_mean(const GrayImage& g, const Mask& m) {
    long long s = 0, n = 0;
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (m(x, y)) {
                s += g(x, y);
                ++n;
            }
    return n ? static_cast<double>(s) / static_cast<double>(n) : 0.0;
}

using i128 = __int128;

// Central moments scaled by m00^(p+q), exact.
struct ExactMoments {
    long long m00 = 0;
    i128 c20 = 0, c02 = 0, c11 = 0, c30 = 0, c03 = 0, c21 = 0, c12 = 0;
};

ExactMoments exact_moments(const Mask& m) {
    ExactMoments e;
    long long m10 = 0, m01 = 0;
    const auto b = m.bounds();
    if (!b) return e;
    for (int y = b->y0; y <= b->y1; ++y)
        for (int x = b->x0; x <= b->x1; ++x)
            if (m(x, y)) {
                ++e.m00;
                m10 += x - b->x0;
                m01 += y - b->y0;
            }
    for (int y = b->y0; y <= b->y1; ++y)
        for (int x = b->x0; x <= b->x1; ++x) {
            if (!m(x, y)) continue;
            const i128 dx = static_cast<i128>(e.m00) * (x - b->x0) - m10;
            const i128 dy = static_cast<i128>(e.m00) * (y - b->y0) - m01;
            e.c20 += dx * dx;
            e.c02 += dy * dy;
            e.c11 += dx * dy;
            e.c30 += dx * dx * dx;
            e.c03 += dy * dy * dy;
            e.c21 += dx * dx * dy;
            e.c12 += dx * dy * dy;
        }
    return e;
}

}  // namespace

std::string_view to_string(CellClass c) { return kClassNames[static_cast<int>(c)]; }

CellClass parse_class(std::string_view s) {
    for (int i = 0; i < kClassCount; ++i)
        if (kClassNames[i] == s) return static_cast<CellClass>(i);
    throw SpecError("unknown cell class '" + std::string(s) + "'");
}

int feature_index(std::string_view name) {
    for (int i = 0; i < kFeatureCount; ++i)
        if (kFeatureNames[i] == name) return i;
    throw std::out_of_range("unknown feature " + std::string(name));
}

double FeatureVector::get(std::string_view name) const { return values[feature_index(name)]; }

GlcmStats glcm_features(const GrayImage& channel, const Mask& mask) {
    std::array<std::array<long long, 32>, 32> co{};
    long long pairs = 0;
    for (int y = 0; y < channel.height(); ++y)
        for (int x = 0; x + 1 < channel.width(); ++x) {
            if (!mask(x, y) || !mask(x + 1, y)) continue;
            const int i = channel(x, y) >> 3, j = channel(x + 1, y) >> 3;
            ++co[i][j];
            ++co[j][i];
            ++pairs;
        }
    GlcmStats s;
    if (pairs == 0) return s;
    s.valid = true;
    const double total = 2.0 * static_cast<double>(pairs);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            if (!co[i][j]) continue;
            const double p = static_cast<double>(co[i][j]) / total;
            s.contrast += p * (i - j) * (i - j);
            s.energy += p * p;
            s.homogeneity += p / (1.0 + std::abs(i - j));
        }
    return s;
}

double box_count_dimension(const Mask& set, const Roi& frame) {
    if (set.none()) return 0.0;
    constexpr int sizes[4] = {2, 4, 8, 16};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int s : sizes) {
        const int gw = (frame.width() + s - 1) / s, gh = (frame.height() + s - 1) / s;
        std::vector<char> hit(static_cast<std::size_t>(gw) * gh, 0);
        long long count = 0;
        for (int y = frame.y0; y <= frame.y1; ++y)
            for (int x = frame.x0; x <= frame.x1; ++x) {
                if (!set.test(x, y)) continue;
                char& h = hit[static_cast<std::size_t>((y - frame.y0) / s) * gw + (x - frame.x0) / s];
                if (!h) {
                    h = 1;
                    ++count;
                }
            }
        const double lx = std::log(1.0 / s), ly = std::log(static_cast<double>(count));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = 4.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::optional<double> fractal_dimension(const GrayImage& s_channel, const Mask& cell) {
    const auto frame = cell.bounds();
    if (!frame) return std::nullopt;
    int t = 0;
    try {
        t = otsu_threshold(histogram(s_channel, cell));
    } catch (const DegenerateError&) {
        return std::nullopt;
    }
    Mask set(cell.width(), cell.height());
    for (int y = frame->y0; y <= frame->y1; ++y)
        for (int x = frame->x0; x <= frame->x1; ++x)
            if (cell(x, y) && s_channel(x, y) > t) set.set(x, y);
    if (set.none()) return std::nullopt;
    return box_count_dimension(set, *frame);
}

OpticalDensity optical_density(const GrayImage& channel, const Mask& mask) {
    OpticalDensity od;
    std::vector<double> v;
    for (int y = 0; y < channel.height(); ++y)
        for (int x = 0; x < channel.width(); ++x)
            if (mask(x, y)) v.push_back(std::log10(255.0 / std::max<int>(channel(x, y), 1)));
    if (v.empty()) return od;
    for (double d : v) od.integrated += d;
    od.mean = od.integrated / static_cast<double>(v.size());
    for (double d : v) od.variance += (d - od.mean) * (d - od.mean);
    od.variance /= static_cast<double>(v.size());
    return od;
}

ErosionProfile erosion_profile(const Mask& nucleus) {
    ErosionProfile p;
    if (nucleus.none()) return p;
    Mask m = crop_padded(nucleus, padded_bounds(nucleus));
    p.niv = component_count(m);
    for (int step = 1;; ++step) {
        m = erode(m, 1);
        if (m.none()) {
            p.er_zero = step;
            break;
        }
        const int c = component_count(m);
        p.niv = std::max(p.niv, c);
        if (c >= 2 && p.er_two == 0) p.er_two = step;
    }
    p.kad = p.er_two > 0 ? static_cast<double>(p.er_two) / p.er_zero : 0.0;
    return p;
}

int concavity_count(const Contour& contour) {
    int n = 0;
    for (const ConvexityDefect& d : convexity_defects(contour))
        if (d.depth >= 2.0) ++n;
    return n;
}

int concavity_count(const Mask& nucleus) {
    const Components cc = connected_components(nucleus, Connectivity::Eight);
    int n = 0;
    for (const Region& r : cc.regions) n += concavity_count(trace_outer_contour(nucleus, r));
    return n;
}

SkeletonStats skeleton_features(const Mask& nucleus) {
    SkeletonStats s;
    if (nucleus.none()) return s;
    s.lk = skeletonize(crop_padded(nucleus, padded_bounds(nucleus))).count();
    s.rl = static_cast<double>(s.lk) / static_cast<double>(nucleus.count());
    return s;
}

std::array<double, 3> hu_moments(const Mask& m) {
    const ExactMoments e = exact_moments(m);
    if (e.m00 == 0) return {0.0, 0.0, 0.0};
    using ld = long double;
    const ld n = static_cast<ld>(e.m00);
    // eta_pq = c_pq / m00^(p+q) / m00^(1 + (p+q)/2)
    const ld hu1 = static_cast<ld>(e.c20 + e.c02) / std::pow(n, 4.0L);
    const i128 d = e.c20 - e.c02;
    const ld hu2 = (static_cast<ld>(d) * static_cast<ld>(d) + 4.0L * static_cast<ld>(e.c11) * static_cast<ld>(e.c11)) /
                   std::pow(n, 8.0L);
    const ld a = static_cast<ld>(e.c30 - 3 * e.c12), b = static_cast<ld>(3 * e.c21 - e.c03);
    const ld hu3 = (a * a + b * b) / std::pow(n, 11.0L);
    return {static_cast<double>(hu1), static_cast<double>(hu2), static_cast<double>(hu3)};
}

double compress_hu(double h) {
    const double s = h < 0 ? -1.0 : 1.0;
    return s * std::log10(std::abs(h) + 1e-30);
}

double eccentricity(const Mask& m) {
    const ExactMoments e = exact_moments(m);
    if (e.m00 < 2) return 0.0;
    using ld = long double;
    const ld a = static_cast<ld>(e.c20), b = static_cast<ld>(e.c11), c = static_cast<ld>(e.c02);
    const ld root = std::sqrt((a - c) * (a - c) + 4 * b * b);
    const ld l1 = (a + c + root) / 2, l2 = (a + c - root) / 2;
    if (l1 <= 0) return 0.0;
    return static_cast<double>(std::sqrt(std::max<ld>(0, 1 - l2 / l1)));
}

FeatureResult extract_features(const RgbImage& patch_in, const Mask& nucleus_in, const Mask& cell_in) {
    if (nucleus_in.none()) throw DegenerateError("extract_features: empty nucleus");
    FeatureResult out;
    auto flag = [&](const char* f) { out.quality_flags.emplace_back(f); };

    // Work on a frame anchored at the cell bounds so every value is
    // independent of where the cell sits in the patch.
    const Mask body_in = cell_in | nucleus_in;
    const Roi frame = padded_bounds(body_in);
    const Mask nucleus = crop_padded(nucleus_in, frame);
    const Mask cell = crop_padded(body_in, frame);
    const Mask cyto = cell.minus(nucleus);
    RgbImage patch(frame.width(), frame.height());
    for (int y = frame.y0; y <= frame.y1; ++y)
        for (int x = frame.x0; x <= frame.x1; ++x)
            if (patch_in.in_bounds(x, y)) patch.set(x - frame.x0, y - frame.y0, patch_in(x, y));

    const RgbPlanes rgb = channels(patch);
    const GrayImage yc = y_component(patch);
    const GrayImage sc = hsv_s_component(patch);

    const double n_area = static_cast<double>(nucleus.count());
    const double c_area = static_cast<double>(cyto.count());
    const double cyto_den = c_area > 0 ? c_area : 1.0;
    if (c_area == 0) flag("empty_cytoplasm");

    const ContourMetrics nm = mask_metrics(nucleus);
    const ContourMetrics bm = mask_metrics(cell);
    const Roi nb = *nucleus.bounds();

    FeatureVector& f = out.features;
    auto set = [&](std::string_view name, double v) { f[feature_index(name)] = v; };

    set("n_area", n_area);
    set("n_perimeter", nm.perimeter);
    set("n_kextr", static_cast<double>(std::min(nb.width(), nb.height())) / std::max(nb.width(), nb.height()));
    set("n_rectr", n_area / static_cast<double>(nb.area()));
    set("nc_area_ratio", n_area / cyto_den);
    if (bm.perimeter > 0) {
        set("nb_perimeter_ratio", nm.perimeter / bm.perimeter);
    } else {
        flag("zero_body_perimeter");
    }
    set("b_perimeter", bm.perimeter);
    set("c_area", c_area);
    long long y_nonzero = 0;
    for (int y = 0; y < cyto.height(); ++y)
        for (int x = 0; x < cyto.width(); ++x)
            if (cyto(x, y) && yc(x, y) != 0) ++y_nonzero;
    set("ycr", static_cast<double>(y_nonzero) / cyto_den);
    const Mask filled = fill_holes(nucleus);
    set("ctrv", static_cast<double>(filled.count() - nucleus.count()) / static_cast<double>(filled.count()));

    set("yag", masked_mean(yc, cell));
    const double bn = masked_mean(rgb.b, nucleus);
    set("bnag", bn);
    set("bcnag", c_area > 0 ? masked_mean(rgb.b, cyto) - bn : 0.0);

    if (const auto fd = fractal_dimension(sc, cell)) {
        set("sfdi", *fd);
    } else {
        flag("empty_fractal_set");
    }
    const GlcmStats rn = glcm_features(rgb.r, nucleus);
    if (!rn.valid) flag("nucleus_glcm_empty");
    set("rn_glcm_contrast", rn.contrast);
    set("rn_glcm_energy", rn.energy);
    set("rn_glcm_homogeneity", rn.homogeneity);
    const GlcmStats ycg = glcm_features(yc, cyto);
    if (!ycg.valid) flag("cytoplasm_glcm_empty");
    set("yc_glcm_contrast", ycg.contrast);
    set("yc_glcm_energy", ycg.energy);
    set("yc_glcm_homogeneity", ycg.homogeneity);

    const ErosionProfile ep = erosion_profile(nucleus);
    set("niv", ep.niv);
    const auto hu = hu_moments(nucleus);
    set("hu1", compress_hu(hu[0]));
    set("hu2", compress_hu(hu[1]));
    set("hu3", compress_hu(hu[2]));
    set("n_circularity", circularity(nm.area, nm.perimeter));
    set("b_circularity", circularity(bm.area, bm.perimeter));
    const OpticalDensity nd = optical_density(rgb.r, nucleus);
    set("nd1", nd.integrated);
    set("nd2", nd.mean);
    set("nd3", nd.variance);
    const OpticalDensity cd = optical_density(yc, cyto);
    set("cd1", cd.integrated);
    set("cd2", cd.mean);
    set("cd3", cd.variance);
    set("connected_region_count", component_count(nucleus));
    set("eccentricity", eccentricity(cell));

    set("er_two", ep.er_two);
    set("kad", ep.kad);
    set("sanv", concavity_count(nucleus));
    const SkeletonStats sk = skeleton_features(nucleus);
    set("lk", static_cast<double>(sk.lk));
    set("rl", sk.rl);
    return out;
}

std::string write_feature_csv(const std::vector<FeatureRow>& rows) {
    std::string s = "# schema=" + std::string(kFeatureSchema) + "\n";
    for (std::string_view n : kFeatureNames) {
        s += n;
        s += ',';
    }
    s += "label\n";
    char buf[64];
    for (const FeatureRow& r : rows) {
        for (double v : r.features.values) {
            std::snprintf(buf, sizeof buf, "%.6f,", v);
            s += buf;
        }
        s += r.label ? std::string(to_string(*r.label)) : "?";
        s += '\n';
    }
    return s;
}

std::vector<FeatureRow> read_feature_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t offset = 0;
    auto next = [&](std::string& out) {
        while (std::getline(is, out)) {
            offset += out.size() + 1;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            if (!out.empty()) return true;
        }
        return false;
    };
    const std::string schema_line = "# schema=" + std::string(kFeatureSchema);
    if (!next(line) || line.rfind("# schema=", 0) != 0) throw VersionError("feature csv: missing schema line");
    if (line != schema_line) throw VersionError("feature csv: schema " + line.substr(9) + ", expected " +
                                                std::string(kFeatureSchema));
    std::string header;
    for (std::string_view n : kFeatureNames) {
        header += n;
        header += ',';
    }
    header += "label";
    if (!next(line) || line != header) throw VersionError("feature csv: header does not match the feature schema");

    std::vector<FeatureRow> rows;
    while (true) {
        const std::size_t line_start = offset;
        if (!next(line)) break;
        FeatureRow r;
        std::size_t pos = 0;
        for (int i = 0; i < kFeatureCount; ++i) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) throw FormatError("feature csv: too few fields", line_start);
            const std::string field = line.substr(pos, comma - pos);
            char* end = nullptr;
            r.features[i] = std::strtod(field.c_str(), &end);
            if (field.empty() || *end != '\0' || !std::isfinite(r.features[i]))
                throw FormatError("feature csv: bad value '" + field + "'", line_start + pos);
            pos = comma + 1;
        }
        const std::string label = line.substr(pos);
        if (label != "?") {
            try {
                r.label = parse_class(label);
            } catch (const SpecError&) {
                throw FormatError("feature csv: unknown label '" + label + "'", line_start + pos);
            }
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace bmc
