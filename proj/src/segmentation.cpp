#include "bmc/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

#include "bmc/error.hpp"
#include "bmc/threshold.hpp"

namespace bmc {

namespace {

constexpr int kDx4[4] = {1, 0, -1, 0};
constexpr int kDy4[4] = {0, 1, 0, -1};

Mask threshold_at_least(const GrayImage& img, int t) {
    Mask m(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img(x, y) > 0 && img(x, y) >= t) m.set(x, y);
    return m;
}

double dist(PointF a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

}  // namespace

NucleusResult segment_nucleus(const RgbImage& patch, const Mask& coarse, const SegmentationParams& p) {
    NucleusResult r;
    r.mask = coarse;
    const GrayImage hsg = hsg_transform(patch, p.hsg);
    const GrayImage hsgm = fill_masked(hsg, coarse, 0);
    try {
        const GrayLevels lv = sam_levels(hsgm).final_levels;
        const int wt = otsu_threshold(hsgm);
        const int t = weighted_threshold(lv.cT, wt, p.gamma);
        const Mask initial = threshold_at_least(hsgm, t);
        // The second pass sees the coarse nucleus again; without it the
        // strata above T are cytoplasm only and T' lands inside it.
        const GrayLevels lv2 = sam_levels(histogram(hsg, initial | coarse)).final_levels;
        const int t2 = weighted_threshold(lv2.kT, lv2.cT, p.gamma);
        r.t_initial = t;
        r.t_final = t2;
        Mask out = components_touching(threshold_at_least(hsgm, t2) | coarse, coarse);
        out = remove_small_components(fill_holes(out), p.min_nucleus_area);
        if (out.none()) {
            r.fallback = true;
            return r;
        }
        r.mask = out;
    } catch (const DegenerateError&) {
        r.fallback = true;
    }
    return r;
}

Mask region_grow(const GrayImage& img, const std::vector<Point>& seeds, int tolerance) {
    const int w = img.width(), h = img.height();
    Mask out(w, h);
    Mask region(w, h);
    std::vector<Point> touched;
    std::deque<Point> queue;
    for (const Point s : seeds) {
        if (!img.in_bounds(s.x, s.y) || out(s.x, s.y)) continue;  // covered by an earlier seed
        long long sum = img(s.x, s.y), n = 1;
        region.set(s.x, s.y);
        touched.assign(1, s);
        queue.assign(1, s);
        while (!queue.empty()) {
            const Point q = queue.front();
            queue.pop_front();
            for (int d = 0; d < 4; ++d) {
                const int nx = q.x + kDx4[d], ny = q.y + kDy4[d];
                if (!region.in_bounds(nx, ny) || region(nx, ny)) continue;
                const long long v = img(nx, ny);
                // |v - sum/n| <= tolerance, kept in integers.
                if (std::llabs(v * n - sum) > static_cast<long long>(tolerance) * n) continue;
                region.set(nx, ny);
                sum += v;
                ++n;
                touched.push_back({nx, ny});
                queue.push_back({nx, ny});
            }
        }
        for (const Point t : touched) {
            out.set(t.x, t.y);
            region.set(t.x, t.y, false);
        }
    }
    return out;
}

std::vector<Point> circle_points(PointF center, double radius, int count, int width, int height) {
    std::vector<Point> pts;
    for (int k = 0; k < count; ++k) {
        const double a = 2.0 * std::numbers::pi * k / count;
        const Point q{static_cast<int>(round_half_up(center.x + radius * std::cos(a))),
                      static_cast<int>(round_half_up(center.y + radius * std::sin(a)))};
        if (q.x < 0 || q.y < 0 || q.x >= width || q.y >= height) continue;
        if (std::find(pts.begin(), pts.end(), q) == pts.end()) pts.push_back(q);
    }
    return pts;
}

GrayImage remove_low_background(const GrayImage& bsg, const Mask& nucleus, int* level) {
    GrayImage out = fill_masked(bsg, nucleus, 0);
    int tb = -1;
    try {
        tb = otsu_threshold(out);
    } catch (const DegenerateError&) {
        tb = -1;  // single-valued patch: nothing to separate
    }
    for (auto& v : out.pixels())
        if (static_cast<int>(v) <= tb) v = 0;
    if (level) *level = tb;
    return out;
}

NonBmcResult non_bmc_mask(const GrayImage& bsg, const Mask& nucleus, const ParticleReport& particles,
                          const Mask& nwig, PointF center, double radius, const SegmentationParams& p) {
    const int w = bsg.width(), h = bsg.height();
    NonBmcResult r;
    const GrayImage removed = fill_masked(bsg, nucleus, 0);
    const GrayImage kept = remove_low_background(bsg, nucleus, &r.otsu_level);
    r.low = Mask(w, h);
    r.zero = Mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (nucleus(x, y)) continue;
            if (kept(x, y) == 0) r.low.set(x, y);
            if (particles.colors_consistent && bsg(x, y) == 0) r.zero.set(x, y);
        }
    r.nwig = nwig.minus(nucleus);
    const Mask partial = r.low | r.nwig | r.zero;

    std::vector<Point> seeds;
    for (const Point q : circle_points(center, radius, p.circle_seeds, w, h))
        if (partial(q.x, q.y)) seeds.push_back(q);
    r.grown = region_grow(removed, seeds, p.grow_tolerance).minus(nucleus);
    r.mask = partial | r.grown;
    return r;
}

KMeansResult kmeans3(const GrayImage& img, const Mask& exclude) {
    const bool use_exclude = exclude.width() == img.width() && exclude.height() == img.height();
    Histogram hist{};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (!use_exclude || !exclude(x, y)) ++hist[img(x, y)];

    std::vector<int> distinct;
    std::uint64_t n = 0;
    for (int v = 0; v < 256; ++v)
        if (hist[v]) {
            distinct.push_back(v);
            n += hist[v];
        }
    if (distinct.size() < 3) throw DegenerateError("kmeans3: fewer than three distinct values");

    // q-th percentile of the pixels with value above `floor`.
    auto percentile = [&](double q, int floor) {
        std::uint64_t m = 0;
        for (int v = floor + 1; v < 256; ++v) m += hist[v];
        if (m == 0) return -1;
        const std::uint64_t rank = static_cast<std::uint64_t>(std::floor(q * static_cast<double>(m - 1)));
        std::uint64_t acc = 0;
        for (int v = floor + 1; v < 256; ++v) {
            acc += hist[v];
            if (acc > rank) return v;
        }
        return 255;
    };
    // A seed that repeats the one below it (a dominant value) is drawn again
    // from the pixels above that seed, at the same percentile.
    std::array<int, 3> seed{percentile(0.10, -1), 0, 0};
    const std::array<double, 3> q{0.10, 0.50, 0.90};
    for (int k = 1; k < 3; ++k) {
        seed[k] = percentile(q[k], -1);
        if (seed[k] <= seed[k - 1]) seed[k] = percentile(q[k], seed[k - 1]);
    }
    if (seed[2] < 0 || seed[1] < 0) {
        // Nothing above the lower seeds: the three largest distinct values.
        const std::size_t d = distinct.size();
        seed = {distinct[d - 3], distinct[d - 2], distinct[d - 1]};
    }
    std::array<double, 3> means{static_cast<double>(seed[0]), static_cast<double>(seed[1]),
                                static_cast<double>(seed[2])};

    std::array<int, 256> assign{};
    assign.fill(-1);
    KMeansResult r;
    for (int it = 1; it <= 100; ++it) {
        bool changed = false;
        for (int v : distinct) {
            int best = 0;
            for (int k = 1; k < 3; ++k)
                if (std::abs(v - means[k]) < std::abs(v - means[best])) best = k;
            if (assign[v] != best) {
                assign[v] = best;
                changed = true;
            }
        }
        r.iterations = it;
        if (!changed) break;
        std::array<double, 3> s{}, c{};
        for (int v : distinct) {
            s[assign[v]] += static_cast<double>(hist[v]) * v;
            c[assign[v]] += static_cast<double>(hist[v]);
        }
        for (int k = 0; k < 3; ++k)
            if (c[k] > 0) means[k] = s[k] / c[k];
    }

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return means[a] < means[b]; });
    std::array<int, 3> rank{};
    for (int k = 0; k < 3; ++k) {
        rank[order[k]] = k;
        r.means[k] = means[order[k]];
    }
    r.labels = LabelImage(img.width(), img.height(), -1);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (!use_exclude || !exclude(x, y)) r.labels(x, y) = rank[assign[img(x, y)]];
    return r;
}

Mask initial_bmc_mask(const LabelImage& labels, std::optional<Point> anchor) {
    Mask fg(labels.width(), labels.height());
    for (int y = 0; y < labels.height(); ++y)
        for (int x = 0; x < labels.width(); ++x)
            if (labels(x, y) >= 1) fg.set(x, y);
    Mask kept;
    if (anchor && fg.test(anchor->x, anchor->y)) {
        Mask a(fg.width(), fg.height());
        a.set(anchor->x, anchor->y);
        kept = components_touching(fg, a);
    } else {
        kept = largest_component(fg);
    }
    if (kept.none()) throw DegenerateError("initial cell mask is empty");
    return fill_holes(kept);
}

int line_crossings(const Contour& contour, PointF a, PointF b) {
    const std::size_t n = contour.size();
    if (n < 2) return 0;
    const double ux = b.x - a.x, uy = b.y - a.y;
    auto side = [&](Point q) { return ux * (q.y - a.y) - uy * (q.x - a.x) > 0.0; };
    int count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (side(contour.points[i]) != side(contour.points[(i + 1) % n])) ++count;
    return count;
}

std::size_t contour_start_point(const Contour& contour, PointF center) {
    const std::size_t n = contour.size();
    if (n <= 1) return 0;
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (dist(center, contour.points[i]) < dist(center, contour.points[nearest])) nearest = i;
    auto accepted = [&](std::size_t i) {
        const Point q = contour.points[i];
        if (q.x == center.x && q.y == center.y) return false;
        return line_crossings(contour, {static_cast<double>(q.x), static_cast<double>(q.y)}, center) == 2;
    };
    if (accepted(nearest)) return nearest;
    const int limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 4;
    std::size_t power = 1;
    for (int sp = 1; sp <= limit; ++sp) {
        power = (power * 2) % n;
        if (accepted(power)) return power;
    }
    return nearest;
}

namespace {

std::vector<double> smooth_circular(const std::vector<double>& v, int window) {
    const int n = static_cast<int>(v.size());
    const int half = std::min(window / 2, (n - 1) / 2);
    std::vector<double> out(v.size());
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = -half; k <= half; ++k) s += v[((i + k) % n + n) % n];
        out[i] = s / (2 * half + 1);
    }
    return out;
}

// Peaks of a circular profile with their prominence. Plateaus report their
// middle sample.
std::vector<std::pair<int, double>> circular_peaks(const std::vector<double>& s) {
    const int n = static_cast<int>(s.size());
    constexpr double eps = 1e-9;
    auto same = [&](int i, int j) { return std::abs(s[i] - s[j]) <= eps; };
    int start = -1;
    for (int i = 0; i < n; ++i)
        if (!same(i, (i + n - 1) % n)) {
            start = i;
            break;
        }
    std::vector<std::pair<int, double>> peaks;
    if (start < 0) return peaks;

    struct Run {
        int first, len;
        double value;
    };
    std::vector<Run> runs;
    for (int k = 0; k < n;) {
        const int i = (start + k) % n;
        int len = 1;
        while (k + len < n && same(i, (start + k + len) % n)) ++len;
        runs.push_back({i, len, s[i]});
        k += len;
    }
    const int m = static_cast<int>(runs.size());
    std::vector<int> run_of(static_cast<std::size_t>(n));
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < runs[j].len; ++k) run_of[(runs[j].first + k) % n] = j;
    for (int j = 0; j < m; ++j) {
        const Run& r = runs[j];
        if (runs[(j + m - 1) % m].value >= r.value || runs[(j + 1) % m].value >= r.value) continue;
        // Walk both ways to the first higher sample, tracking the lowest
        // point. Equal heights rank by run order, so of two twin peaks only
        // the first keeps the full prominence.
        auto higher = [&](int q) {
            if (s[q] > r.value + eps) return true;
            return s[q] >= r.value - eps && run_of[q] < j;
        };
        double left_min = r.value, right_min = r.value;
        for (int k = 1; k < n; ++k) {
            const int q = ((r.first - k) % n + n) % n;
            if (higher(q)) break;
            left_min = std::min(left_min, s[q]);
        }
        for (int k = r.len; k < n; ++k) {
            const int q = (r.first + k) % n;
            if (higher(q)) break;
            right_min = std::min(right_min, s[q]);
        }
        peaks.emplace_back((r.first + r.len / 2) % n, r.value - std::max(left_min, right_min));
    }
    return peaks;
}

}  // namespace

std::vector<Pole> detect_poles(const Contour& contour, PointF center, std::size_t start, const SegmentationParams& p) {
    const int n = static_cast<int>(contour.size());
    std::vector<Pole> poles;
    if (n < 3) return poles;
    auto at = [&](int i) { return contour.points[(start + static_cast<std::size_t>(i)) % n]; };

    std::vector<double> radial(n);
    for (int i = 0; i < n; ++i) radial[i] = dist(center, at(i));
    const double max_r = *std::max_element(radial.begin(), radial.end());

    std::vector<int> found;
    for (const auto& [i, prominence] : circular_peaks(smooth_circular(radial, p.smoothing_window)))
        if (prominence >= p.pole_prominence * max_r) found.push_back(i);

    // Concavities: the deepest point of every deep hull defect.
    const double min_depth = std::max(p.defect_min_depth, p.defect_rel_depth * max_r);
    for (const ConvexityDefect& d : convexity_defects(contour))
        if (d.depth >= min_depth) found.push_back(static_cast<int>((d.deepest + n - start % n) % n));

    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    for (int i : found)
        poles.push_back({(start + static_cast<std::size_t>(i)) % n, at(i), radial[i]});
    return poles;
}

double PolePair::distance() const { return std::hypot(b.point.x - a.point.x, b.point.y - a.point.y); }

Mask cut_region(int width, int height, const PolePair& pair) {
    Mask out(width, height);
    const double d = pair.distance();
    const double mx = (pair.a.point.x + pair.b.point.x) / 2.0, my = (pair.a.point.y + pair.b.point.y) / 2.0;
    if (d > 0.0) {
        const double semi_major = d / 2.0, semi_minor = d / 6.0;
        const double c = (pair.b.point.x - pair.a.point.x) / d, s = (pair.b.point.y - pair.a.point.y) / d;
        const int x0 = std::max(0, static_cast<int>(std::floor(mx - semi_major)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(mx + semi_major)));
        const int y0 = std::max(0, static_cast<int>(std::floor(my - semi_major)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(my + semi_major)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double u = ((x - mx) * c + (y - my) * s) / semi_major;
                const double v = (-(x - mx) * s + (y - my) * c) / semi_minor;
                if (u * u + v * v <= 1.0) out.set(x, y);
            }
    }
    // 4-connected digital segment between the poles so the cut always severs.
    int x = pair.a.point.x, y = pair.a.point.y;
    const int tx = pair.b.point.x, ty = pair.b.point.y;
    const int dx = std::abs(tx - x), dy = -std::abs(ty - y);
    const int sx = x < tx ? 1 : -1, sy = y < ty ? 1 : -1;
    int err = dx + dy;
    while (true) {
        if (out.in_bounds(x, y)) out.set(x, y);
        if (x == tx && y == ty) break;
        const int e2 = 2 * err;
        if (e2 - dy > dx - e2) {
            err += dy;
            x += sx;
        } else {
            err += dx;
            y += sy;
        }
    }
    return out;
}

Mask apply_cut(const Mask& mask, const PolePair& pair) {
    return mask.minus(cut_region(mask.width(), mask.height(), pair));
}

double component_circularity(const Mask& mask, Point anchor) {
    if (!mask.test(anchor.x, anchor.y)) return 0.0;
    const Components cc = connected_components(mask, Connectivity::Eight);
    const int id = cc.labels(anchor.x, anchor.y);
    const Mask comp = region_mask(cc, id);
    const ContourMetrics m = contour_metrics(trace_outer_contour(comp, cc.regions[id - 1]), comp);
    return circularity(m.area, m.perimeter);
}

std::vector<PolePair> split_plan(const Mask& pdg, const std::vector<Pole>& poles, Point anchor,
                                 const SegmentationParams& p) {
    std::vector<PolePair> accepted;
    if (poles.size() <= 2) return accepted;
    std::vector<PolePair> pairs;
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j) pairs.push_back({poles[i], poles[j]});
    std::stable_sort(pairs.begin(), pairs.end(), [&](const PolePair& a, const PolePair& b) {
        return p.split_descending ? a.distance() > b.distance() : a.distance() < b.distance();
    });

    Mask current = pdg;
    double base = component_circularity(current, anchor);
    for (const PolePair& pair : pairs) {
        const Mask candidate = apply_cut(current, pair);
        if (!candidate.test(anchor.x, anchor.y)) continue;
        const double c = component_circularity(candidate, anchor);
        if (c > base) {
            accepted.push_back(pair);
            current = candidate;
            base = c;
        }
    }
    return accepted;
}

GrayImage gradient_magnitude(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = (img(std::min(x + 1, w - 1), y) - img(std::max(x - 1, 0), y)) / 2.0;
            const double gy = (img(x, std::min(y + 1, h - 1)) - img(x, std::max(y - 1, 0))) / 2.0;
            out(x, y) = clamp_u8(round_half_up(std::sqrt(gx * gx + gy * gy)));
        }
    return out;
}

LabelImage watershed(const GrayImage& terrain, const LabelImage& markers) {
    const int w = terrain.width(), h = terrain.height();
    LabelImage out = markers;
    struct Item {
        int x, y, label;
    };
    std::array<std::deque<Item>, 256> buckets;
    auto push_neighbours = [&](int x, int y, int label, int level) {
        for (int d = 0; d < 4; ++d) {
            const int nx = x + kDx4[d], ny = y + kDy4[d];
            if (!terrain.in_bounds(nx, ny) || out(nx, ny) != 0) continue;
            buckets[std::max<int>(terrain(nx, ny), level)].push_back({nx, ny, label});
        }
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (out(x, y) != 0) push_neighbours(x, y, out(x, y), 0);
    for (int level = 0; level < 256; ++level) {
        auto& q = buckets[level];
        while (!q.empty()) {
            const Item it = q.front();
            q.pop_front();
            if (out(it.x, it.y) != 0) continue;
            out(it.x, it.y) = it.label;
            push_neighbours(it.x, it.y, it.label, level);
        }
    }
    return out;
}

WatershedResult build_markers_and_watershed(const Mask& pdg, const std::vector<PolePair>& plan, Point anchor,
                                            const GrayImage& bsg) {
    const int w = pdg.width(), h = pdg.height();
    Mask cut = pdg;
    Mask erased(w, h);
    for (const PolePair& pair : plan) {
        const Mask region = cut_region(w, h, pair) & pdg;
        cut = cut.minus(region);
        erased = erased | region;
    }
    if (!cut.test(anchor.x, anchor.y)) throw DegenerateError("watershed: nucleus center lies outside every component");
    Mask a(w, h);
    a.set(anchor.x, anchor.y);
    const Mask cell_seed = components_touching(cut, a);

    WatershedResult r;
    r.markers = LabelImage(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (cell_seed(x, y))
                r.markers(x, y) = 2;
            else if (erased(x, y))
                r.markers(x, y) = 0;
        }
    r.labels = plan.empty() ? r.markers : watershed(gradient_magnitude(bsg), r.markers);
    r.cell = Mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (r.labels(x, y) == 2) r.cell.set(x, y);
    return r;
}

Point nearest_pixel(const Mask& m, PointF c) {
    Point best{-1, -1};
    double bd = std::numeric_limits<double>::infinity();
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            const double d = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
            if (d < bd) {
                bd = d;
                best = {x, y};
            }
        }
    if (best.x < 0) throw DegenerateError("nearest_pixel: empty mask");
    return best;
}

namespace {

GrayImage labels_to_gray(const LabelImage& l, int scale) {
    GrayImage g(l.width(), l.height());
    for (int y = 0; y < l.height(); ++y)
        for (int x = 0; x < l.width(); ++x) g(x, y) = clamp_u8(std::max(0, l(x, y)) * scale);
    return g;
}

}  // namespace

CellSegmentation segment_cell(const RgbImage& patch, const Mask& coarse, double radius, const SegmentationParams& p,
                              const DebugSink& sink) {
    auto emit = [&](const char* stage, const GrayImage& g) {
        if (sink) sink(stage, g);
    };
    CellSegmentation out;
    if (sink) {
        const GrayImage hsg = hsg_transform(patch, p.hsg);
        emit("hsg", hsg);
        emit("hsgm", fill_masked(hsg, coarse, 0));
    }
    const NucleusResult nuc = segment_nucleus(patch, coarse, p);
    out.nucleus = nuc.mask;
    out.nucleus_fallback = nuc.fallback;
    if (nuc.fallback) out.flags.push_back("nucleus_fallback");
    if (out.nucleus.none()) throw DegenerateError("segment_cell: empty nucleus");
    emit("nucleus", out.nucleus.gray());

    const PointF center = centroid(out.nucleus);
    const Point anchor = nearest_pixel(out.nucleus, center);

    // The particle test runs on the lambda = 1 image and fixes lambda; the
    // texture products are then recomputed on the final image.
    auto texture_products = [&](const GrayImage& bsg, GrayImage& teig, Mask& nwig) {
        teig = texture_image(remove_low_background(bsg, out.nucleus), Mask());
        nwig = nwig_from_texture(teig, p.nwig_min_area);
    };
    GrayImage bsg = bsg_transform(patch, {1.0});
    GrayImage teig;
    Mask nwig;
    texture_products(bsg, teig, nwig);
    const ParticleReport particles = particle_report(bsg, nwig, p.particle_min_area, p.consistency_count);
    out.particle_count = particles.particle_count;
    out.lambda = p.lambda.value_or(particles.colors_consistent ? 1.0 : 0.5);
    if (out.lambda != 1.0) {
        bsg = bsg_transform(patch, {out.lambda});
        texture_products(bsg, teig, nwig);
    }
    emit("bsg", bsg);
    emit("teig", teig);
    emit("nwig", nwig.gray());
    emit("cwpig", particles.particle_mask.gray());

    const NonBmcResult non = non_bmc_mask(bsg, out.nucleus, particles, nwig, center, radius, p);
    out.non_bmc = non.mask;

    LabelImage labels;
    const GrayImage kin = fill_masked(bsg, non.mask, 0);
    try {
        labels = kmeans3(kin, Mask()).labels;
    } catch (const DegenerateError&) {
        out.flags.push_back("kmeans_degenerate");
        labels = LabelImage(kin.width(), kin.height(), 0);
        for (int y = 0; y < kin.height(); ++y)
            for (int x = 0; x < kin.width(); ++x)
                if (kin(x, y) > 0) labels(x, y) = 1;
    }
    for (int y = 0; y < labels.height(); ++y)
        for (int x = 0; x < labels.width(); ++x)
            if (out.nucleus(x, y)) labels(x, y) = 2;
    emit("kmimg", labels_to_gray(labels, 127));
    out.pdg = initial_bmc_mask(labels, anchor);
    emit("pdg", out.pdg.gray());

    const Components cc = connected_components(out.pdg, Connectivity::Eight);
    const Region& body = cc.regions[cc.labels(anchor.x, anchor.y) - 1];
    const Contour contour = trace_outer_contour(out.pdg, body);
    out.poles = detect_poles(contour, center, contour_start_point(contour, center), p);
    if (out.poles.size() > 2) out.cuts = split_plan(out.pdg, out.poles, anchor, p);

    const WatershedResult ws = build_markers_and_watershed(out.pdg, out.cuts, anchor, bsg);
    emit("markers", labels_to_gray(ws.markers, 127));
    out.cell = fill_holes(ws.cell | out.nucleus);
    emit("cell", out.cell.gray());
    return out;
}

}  // namespace bmc
