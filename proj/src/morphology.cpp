#include "bmc/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace bmc {

namespace {

// Screen-clockwise ring starting East (y grows downward).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(int dx, int dy) {
    for (int d = 0; d < 8; ++d)
        if (kDx[d] == dx && kDy[d] == dy) return d;
    throw std::logic_error("direction_of: not a unit neighbour offset");
}

// Component containing `seed` (8-connected).
Mask flood_component(const Mask& mask, Point seed) {
    Mask out(mask.width(), mask.height());
    if (!mask.test(seed.x, seed.y)) return out;
    std::deque<Point> queue{seed};
    out.set(seed.x, seed.y);
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        for (int d = 0; d < 8; ++d) {
            const int nx = p.x + kDx[d], ny = p.y + kDy[d];
            if (mask.test(nx, ny) && !out(nx, ny)) {
                out.set(nx, ny);
                queue.push_back({nx, ny});
            }
        }
    }
    return out;
}

}  // namespace

Components connected_components(const Mask& mask, Connectivity connectivity) {
    const int w = mask.width(), h = mask.height();
    Components cc;
    cc.labels = LabelImage(w, h, 0);
    const int nd = connectivity == Connectivity::Eight ? 8 : 4;
    // 4-connectivity uses the even entries of the ring (E, S, W, N).
    const int step = connectivity == Connectivity::Eight ? 1 : 2;
    std::deque<Point> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask(x, y) || cc.labels(x, y) != 0) continue;
            Region r;
            r.id = static_cast<int>(cc.regions.size()) + 1;
            r.seed_pixel = {x, y};
            r.bounding_box = {x, y, x, y};
            cc.labels(x, y) = r.id;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Point p = queue.front();
                queue.pop_front();
                ++r.pixel_count;
                r.bounding_box.x0 = std::min(r.bounding_box.x0, p.x);
                r.bounding_box.y0 = std::min(r.bounding_box.y0, p.y);
                r.bounding_box.x1 = std::max(r.bounding_box.x1, p.x);
                r.bounding_box.y1 = std::max(r.bounding_box.y1, p.y);
                for (int k = 0; k < nd; ++k) {
                    const int d = k * step;
                    const int nx = p.x + kDx[d], ny = p.y + kDy[d];
                    if (mask.test(nx, ny) && cc.labels(nx, ny) == 0) {
                        cc.labels(nx, ny) = r.id;
                        queue.push_back({nx, ny});
                    }
                }
            }
            cc.regions.push_back(r);
        }
    }
    return cc;
}

Mask region_mask(const Components& cc, int id) {
    Mask out(cc.labels.width(), cc.labels.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (cc.labels(x, y) == id) out.set(x, y);
    return out;
}

Contour trace_outer_contour(const Mask& mask, const Region& region) {
    const Point start = region.seed_pixel;
    Contour c;
    if (!mask.test(start.x, start.y)) return c;

    // One Moore step: scan clockwise from the backtrack direction, return the
    // first foreground neighbour and the new backtrack direction seen from it.
    auto step = [&](Point p, int back) -> std::pair<Point, int> {
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            const Point q{p.x + kDx[d], p.y + kDy[d]};
            if (mask.test(q.x, q.y)) {
                const int pd = (back + k + 7) % 8;
                const Point prev{p.x + kDx[pd], p.y + kDy[pd]};
                return {q, direction_of(prev.x - q.x, prev.y - q.y)};
            }
        }
        return {p, back};
    };

    c.points.push_back(start);
    auto [p, back] = step(start, 4);  // west of the seed is background
    if (p == start) return c;         // isolated pixel
    const Point second = p;
    const std::size_t guard = 4 * static_cast<std::size_t>(mask.width()) * mask.height() + 16;
    for (std::size_t i = 0; i < guard; ++i) {
        if (p == start) {
            if (step(p, back).first == second) break;
        }
        c.points.push_back(p);
        std::tie(p, back) = step(p, back);
    }
    // Moore tracing runs clockwise on screen; flip to counterclockwise while
    // keeping the seed at index 0.
    std::reverse(c.points.begin() + 1, c.points.end());
    return c;
}

namespace {

Mask erode_once(const Mask& m) {
    Mask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (!m(x, y)) continue;
            bool keep = true;
            for (int dy = -1; dy <= 1 && keep; ++dy)
                for (int dx = -1; dx <= 1 && keep; ++dx) keep = m.test(x + dx, y + dy);
            if (keep) out.set(x, y);
        }
    return out;
}

Mask dilate_once(const Mask& m) {
    Mask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool any = false;
            for (int dy = -1; dy <= 1 && !any; ++dy)
                for (int dx = -1; dx <= 1 && !any; ++dx) any = m.test(x + dx, y + dy);
            if (any) out.set(x, y);
        }
    return out;
}

}  // namespace

Mask erode(const Mask& mask, int radius) {
    if (radius < 1) throw std::invalid_argument("erode: radius must be >= 1");
    Mask out = mask;
    for (int i = 0; i < radius && !out.none(); ++i) out = erode_once(out);
    return out;
}

Mask dilate(const Mask& mask, int radius) {
    if (radius < 1) throw std::invalid_argument("dilate: radius must be >= 1");
    Mask out = mask;
    for (int i = 0; i < radius; ++i) out = dilate_once(out);
    return out;
}

Mask skeletonize(const Mask& mask) {
    const int w = mask.width(), h = mask.height();
    Mask img = mask;
    auto px = [&](int x, int y) -> int { return img.test(x, y) ? 1 : 0; };
    std::vector<Point> remove;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            remove.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (!img(x, y)) continue;
                    // P2..P9 clockwise from north.
                    const int p[8] = {px(x, y - 1), px(x + 1, y - 1), px(x + 1, y),     px(x + 1, y + 1),
                                      px(x, y + 1), px(x - 1, y + 1), px(x - 1, y),     px(x - 1, y - 1)};
                    int b = 0, a = 0;
                    for (int i = 0; i < 8; ++i) {
                        b += p[i];
                        if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
                    }
                    if (b < 2 || b > 6 || a != 1) continue;
                    const int p2 = p[0], p4 = p[2], p6 = p[4], p8 = p[6];
                    if (pass == 0) {
                        if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
                    } else {
                        if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
                    }
                    remove.push_back({x, y});
                }
            for (const Point& q : remove) img.set(q.x, q.y, false);
            if (!remove.empty()) changed = true;
        }
    }
    return img;
}

Mask fill_holes(const Mask& mask) {
    const int w = mask.width(), h = mask.height();
    Mask outside(w, h);
    std::deque<Point> queue;
    auto seed = [&](int x, int y) {
        if (!mask(x, y) && !outside(x, y)) {
            outside.set(x, y);
            queue.push_back({x, y});
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        for (int d = 0; d < 8; d += 2) {
            const int nx = p.x + kDx[d], ny = p.y + kDy[d];
            if (mask.in_bounds(nx, ny) && !mask(nx, ny) && !outside(nx, ny)) {
                outside.set(nx, ny);
                queue.push_back({nx, ny});
            }
        }
    }
    return ~outside;
}

double chain_length(const Contour& contour) {
    const auto& pts = contour.points;
    if (pts.size() < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point& a = pts[i];
        const Point& b = pts[(i + 1) % pts.size()];
        const bool diagonal = a.x != b.x && a.y != b.y;
        len += diagonal ? std::numbers::sqrt2 : 1.0;
    }
    return len;
}

ContourMetrics contour_metrics(const Contour& contour, const Mask& mask) {
    ContourMetrics m;
    if (contour.points.empty()) return m;
    m.area = static_cast<double>(fill_holes(flood_component(mask, contour.points.front())).count());
    m.perimeter = chain_length(contour);
    return m;
}

double circularity(double area, double perimeter) {
    if (perimeter <= 0.0) return 0.0;
    return 4.0 * std::numbers::pi * area / (perimeter * perimeter);
}

Mask largest_component(const Mask& mask) {
    const Components cc = connected_components(mask, Connectivity::Eight);
    if (cc.regions.empty()) return Mask(mask.width(), mask.height());
    const Region* best = &cc.regions.front();
    for (const Region& r : cc.regions)
        if (r.pixel_count > best->pixel_count) best = &r;
    return region_mask(cc, best->id);
}

Mask components_touching(const Mask& mask, const Mask& anchor) {
    const Components cc = connected_components(mask, Connectivity::Eight);
    std::vector<char> keep(cc.regions.size() + 1, 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (anchor(x, y) && cc.labels(x, y) > 0) keep[cc.labels(x, y)] = 1;
    Mask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (keep[cc.labels(x, y)] && cc.labels(x, y) > 0) out.set(x, y);
    return out;
}

Mask remove_small_components(const Mask& mask, long long min_area) {
    const Components cc = connected_components(mask, Connectivity::Eight);
    Mask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            const int id = cc.labels(x, y);
            if (id > 0 && cc.regions[id - 1].pixel_count >= min_area) out.set(x, y);
        }
    return out;
}

ContourMetrics mask_metrics(const Mask& mask) {
    const Components cc = connected_components(mask, Connectivity::Eight);
    ContourMetrics total;
    for (const Region& r : cc.regions) {
        const ContourMetrics m = contour_metrics(trace_outer_contour(mask, r), mask);
        total.area += m.area;
        total.perimeter += m.perimeter;
    }
    return total;
}

namespace {

double cross(Point o, Point a, Point b) {
    return static_cast<double>(a.x - o.x) * (b.y - o.y) - static_cast<double>(a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    // Andrew's monotone chain.
    std::vector<Point> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
        h[k++] = pts[i - 1];
    }
    h.resize(k - 1);
    return h;
}

double line_distance(Point q, Point a, Point b) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len == 0.0) return std::hypot(q.x - a.x, q.y - a.y);
    return std::abs(cross(a, b, q)) / len;
}

std::vector<ConvexityDefect> convexity_defects(const Contour& contour) {
    std::vector<ConvexityDefect> out;
    const std::size_t n = contour.size();
    const std::vector<Point> hull = convex_hull(contour.points);
    if (hull.size() < 3) return out;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
        if (std::find(hull.begin(), hull.end(), contour.points[i]) != hull.end()) idx.push_back(i);
    const std::size_t m = idx.size();
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t a = idx[j], b = idx[(j + 1) % m];
        const std::size_t span = (b + n - a) % n;
        if (span < 2) continue;
        double best = -1.0;
        std::vector<std::size_t> ties;
        for (std::size_t k = 1; k < span; ++k) {
            const std::size_t i = (a + k) % n;
            const double d = line_distance(contour.points[i], contour.points[a], contour.points[b]);
            if (d > best + 1e-9) {
                best = d;
                ties.assign(1, i);
            } else if (std::abs(d - best) <= 1e-9) {
                ties.push_back(i);
            }
        }
        out.push_back({a, b, ties[ties.size() / 2], best});
    }
    return out;
}

}  // namespace bmc
