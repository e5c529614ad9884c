#include "bmc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "bmc/error.hpp"

namespace bmc {

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) std::swap(lo, hi);
    const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    // Rejection keeps the mapping exact and independent of the library.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return static_cast<int>(lo + static_cast<std::int64_t>(v % span));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ b);
}

namespace {

using i64 = std::int64_t;

bool in_disk(int dx, int dy, int r) { return static_cast<i64>(dx) * dx + static_cast<i64>(dy) * dy <= static_cast<i64>(r) * r; }

bool in_ellipse(int dx, int dy, int rx, int ry) {
    const i64 a = static_cast<i64>(rx) * rx, b = static_cast<i64>(ry) * ry;
    return dx * static_cast<i64>(dx) * b + dy * static_cast<i64>(dy) * a <= a * b;
}

// Distance from p to segment ab at most width/2, in exact integers.
bool near_segment(Point p, Point a, Point b, int width) {
    const i64 vx = b.x - a.x, vy = b.y - a.y, wx = p.x - a.x, wy = p.y - a.y;
    const i64 w2 = static_cast<i64>(width) * width;
    const i64 len2 = vx * vx + vy * vy;
    const i64 t = wx * vx + wy * vy;
    if (len2 == 0 || t <= 0) return 4 * (wx * wx + wy * wy) <= w2;
    if (t >= len2) {
        const i64 ux = p.x - b.x, uy = p.y - b.y;
        return 4 * (ux * ux + uy * uy) <= w2;
    }
    const i64 cross = wx * vy - wy * vx;
    return 4 * cross * cross <= w2 * len2;
}

Point polar(Point c, double radius, double degrees) {
    const double a = degrees * std::numbers::pi / 180.0;
    return {c.x + static_cast<int>(round_half_up(radius * std::cos(a))),
            c.y + static_cast<int>(round_half_up(radius * std::sin(a)))};
}

struct Disk {
    Point c;
    int r = 0;
};
struct Capsule {
    Point a, b;
    int width = 1;
};

// Nucleus as primitives: union of disks and capsules minus `cutouts`.
struct NucleusGeometry {
    std::vector<Disk> disks;
    std::vector<Capsule> capsules;
    std::vector<Disk> cutouts;
    Roi bounds;
};

void add_arc(std::vector<Capsule>& out, Point c, int radius, double from, double span, int width) {
    const int steps = std::max(4, static_cast<int>(std::ceil(std::abs(span) / 10.0)));
    Point prev = polar(c, radius, from);
    for (int i = 1; i <= steps; ++i) {
        const Point cur = polar(c, radius, from + span * i / steps);
        out.push_back({prev, cur, width});
        prev = cur;
    }
}

NucleusGeometry nucleus_geometry(const CellSpec& s) {
    NucleusGeometry g;
    const Point c{s.center.x + s.nucleus_center.x, s.center.y + s.nucleus_center.y};
    const double ang = s.nucleus_angle;
    switch (s.nucleus) {
    case NucleusKind::Disk:
        g.disks.push_back({c, s.nucleus_radius});
        break;
    case NucleusKind::Kidney: {
        g.disks.push_back({c, s.nucleus_radius});
        const int notch = static_cast<int>(round_half_up(0.55 * s.nucleus_radius));
        g.cutouts.push_back({polar(c, 0.95 * s.nucleus_radius, ang), notch});
        break;
    }
    case NucleusKind::Band: {
        const int w = std::max(3, s.band_width);
        if (s.s_shaped) {
            // Two half circles of radius a stacked along the axis.
            const int a = s.nucleus_radius;
            const Point c1 = polar(c, a, ang), c2 = polar(c, a, ang + 180.0);
            add_arc(g.capsules, c1, a, ang + 180.0, 180.0, w);
            add_arc(g.capsules, c2, a, ang, -180.0, w);
        } else {
            // Arc opening along `ang`; its center sits behind the nucleus
            // center so the band's mass is roughly centred.
            const int r = s.nucleus_radius;
            const Point ac = polar(c, 0.45 * r, ang);
            add_arc(g.capsules, ac, r, ang + 180.0 - s.band_span / 2.0, s.band_span, w);
        }
        break;
    }
    case NucleusKind::Lobes: {
        const int r = s.nucleus_radius;
        const double step = 2.0 * r + s.lobe_gap;
        std::vector<Point> centers;
        if (s.lobes <= 2) {
            centers = {polar(c, step / 2.0, ang), polar(c, step / 2.0, ang + 180.0)};
        } else {
            // V chain: middle lobe plus two arms 120 degrees apart, shifted
            // so the mean of the lobe centers is `c`.
            const Point m{0, 0};
            std::vector<Point> raw = {m, polar(m, step, ang + 60.0), polar(m, step, ang - 60.0)};
            const int sx = (raw[1].x + raw[2].x) / 3, sy = (raw[1].y + raw[2].y) / 3;
            for (const Point& q : raw) centers.push_back({c.x + q.x - sx, c.y + q.y - sy});
            std::swap(centers[0], centers[1]);  // chain order: arm, middle, arm
        }
        for (const Point& q : centers) g.disks.push_back({q, r});
        for (std::size_t i = 0; i + 1 < centers.size(); ++i)
            g.capsules.push_back({centers[i], centers[i + 1], s.filament_width});
        break;
    }
    }
    int x0 = INT32_MAX, y0 = INT32_MAX, x1 = INT32_MIN, y1 = INT32_MIN;
    auto grow = [&](Point p, int r) {
        x0 = std::min(x0, p.x - r);
        y0 = std::min(y0, p.y - r);
        x1 = std::max(x1, p.x + r);
        y1 = std::max(y1, p.y + r);
    };
    for (const Disk& d : g.disks) grow(d.c, d.r);
    for (const Capsule& k : g.capsules) {
        grow(k.a, k.width / 2 + 1);
        grow(k.b, k.width / 2 + 1);
    }
    g.bounds = {x0, y0, x1, y1};
    return g;
}

bool in_nucleus(const NucleusGeometry& g, Point p) {
    for (const Disk& d : g.cutouts)
        if (in_disk(p.x - d.c.x, p.y - d.c.y, d.r)) return false;
    for (const Disk& d : g.disks)
        if (in_disk(p.x - d.c.x, p.y - d.c.y, d.r)) return true;
    for (const Capsule& k : g.capsules)
        if (near_segment(p, k.a, k.b, k.width)) return true;
    return false;
}

bool in_body(const CellSpec& c, Point p) { return in_ellipse(p.x - c.center.x, p.y - c.center.y, c.body_rx, c.body_ry); }

Rgb jitter(Rgb c, int d) {
    return {clamp_u8(c.r + d), clamp_u8(c.g + d), clamp_u8(c.b + d)};
}

Rgb vary(Rgb c, Rng& rng, int amount) {
    return {clamp_u8(c.r + rng.uniform_int(-amount, amount)), clamp_u8(c.g + rng.uniform_int(-amount, amount)),
            clamp_u8(c.b + rng.uniform_int(-amount, amount))};
}

// Irwin-Hall normal approximation in fixed point: the sum of twelve 16-bit
// uniforms has standard deviation 65536 around 393210.
int noise_sample(Rng& rng, i64 sigma256) {
    i64 sum = 0;
    for (int k = 0; k < 3; ++k) {
        const std::uint64_t v = rng.next();
        for (int j = 0; j < 4; ++j) sum += static_cast<i64>((v >> (16 * j)) & 0xffff);
    }
    const i64 z = 2 * sum - 786420;  // doubled to keep the center integral
    const i64 num = z * sigma256;     // units of 2^17 * 2^8 per gray level
    const i64 den = i64{1} << 25;
    return static_cast<int>(num >= 0 ? (num + den / 2) / den : -((-num + den / 2) / den));
}

void check_constraints(const CellSpec& c, const Mask& nucleus, const Mask& body) {
    const long long na = nucleus.count(), ba = body.count();
    if (na == 0) throw SpecError("cell has an empty nucleus");
    if (!nucleus.subset_of(body)) throw SpecError("nucleus leaves the cell body");
    switch (c.cls) {
    case CellClass::MBE:
        if (2 * na >= ba) throw SpecError("MBE nucleus must cover less than half the body");
        break;
    case CellClass::NSBG:
        if (c.nucleus != NucleusKind::Band) throw SpecError("NSBG nucleus must be a band");
        break;
    case CellClass::NSTG:
        if (c.nucleus != NucleusKind::Lobes || c.lobes < 2 || c.lobes > 3)
            throw SpecError("NSTG nucleus must have 2-3 lobes");
        break;
    default:
        break;
    }
}

}  // namespace

Mask render_nucleus_mask(const CellSpec& c, int width, int height) {
    const NucleusGeometry g = nucleus_geometry(c);
    Mask m(width, height);
    const Roi r = g.bounds;
    for (int y = std::max(0, r.y0); y <= std::min(height - 1, r.y1); ++y)
        for (int x = std::max(0, r.x0); x <= std::min(width - 1, r.x1); ++x)
            if (in_nucleus(g, {x, y})) m.set(x, y);
    return m;
}

Mask render_body_mask(const CellSpec& c, int width, int height) {
    Mask m(width, height);
    for (int y = std::max(0, c.center.y - c.body_ry); y <= std::min(height - 1, c.center.y + c.body_ry); ++y)
        for (int x = std::max(0, c.center.x - c.body_rx); x <= std::min(width - 1, c.center.x + c.body_rx); ++x)
            if (in_body(c, {x, y})) m.set(x, y);
    return m;
}

Scene generate_scene(const SceneSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) throw SpecError("scene size must be positive");
    const int W = spec.width, H = spec.height;
    Rng rng(spec.seed);
    Scene scene;
    scene.image = RgbImage(W, H, spec.background);
    scene.truth.rbc = Mask(W, H);

    std::vector<Mask> bodies, nuclei;
    for (const CellSpec& c : spec.cells) {
        if (c.body_rx <= 0 || c.body_ry <= 0) throw SpecError("cell body radius must be positive");
        if (c.center.x - c.body_rx < 0 || c.center.y - c.body_ry < 0 || c.center.x + c.body_rx >= W ||
            c.center.y + c.body_ry >= H)
            throw SpecError("cell does not fit in the frame");
        bodies.push_back(render_body_mask(c, W, H));
        nuclei.push_back(render_nucleus_mask(c, W, H));
        check_constraints(c, nuclei.back(), bodies.back());
    }
    if (!spec.allow_adhesion)
        for (std::size_t i = 0; i < bodies.size(); ++i)
            for (std::size_t j = i + 1; j < bodies.size(); ++j)
                if (!(bodies[i] & bodies[j]).none()) throw SpecError("cell bodies overlap");

    // Red cells: the explicit ones, then random placements clear of cells.
    std::vector<RedCell> reds = spec.red_cells;
    for (int k = 0; k < spec.rbc_count; ++k) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            RedCell rc;
            rc.radius = rng.uniform_int(30, 38);
            rc.center = {rng.uniform_int(0, W - 1), rng.uniform_int(0, H - 1)};
            rc.color = vary({235, 195, 195}, rng, 4);
            bool ok = true;
            for (const CellSpec& c : spec.cells) {
                const i64 dx = rc.center.x - c.center.x, dy = rc.center.y - c.center.y;
                const i64 lim = std::max(c.body_rx, c.body_ry) + rc.radius + 8;
                if (dx * dx + dy * dy < lim * lim) ok = false;
            }
            for (const RedCell& o : reds) {
                const i64 dx = rc.center.x - o.center.x, dy = rc.center.y - o.center.y;
                const i64 lim = rc.radius + o.radius + 2;
                if (dx * dx + dy * dy < lim * lim) ok = false;
            }
            if (ok) {
                reds.push_back(rc);
                break;
            }
        }
    }
    for (const RedCell& rc : reds)
        for (int y = std::max(0, rc.center.y - rc.radius); y <= std::min(H - 1, rc.center.y + rc.radius); ++y)
            for (int x = std::max(0, rc.center.x - rc.radius); x <= std::min(W - 1, rc.center.x + rc.radius); ++x)
                if (in_disk(x - rc.center.x, y - rc.center.y, rc.radius)) {
                    scene.image.set(x, y, rc.color);
                    scene.truth.rbc.set(x, y);
                }

    // Impurities: specks below the nucleus area floor, away from cells.
    for (int k = 0; k < spec.impurity_count; ++k) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const int r = rng.uniform_int(1, 3);
            const Point p{rng.uniform_int(r, W - 1 - r), rng.uniform_int(r, H - 1 - r)};
            bool ok = true;
            for (const CellSpec& c : spec.cells) {
                const i64 dx = p.x - c.center.x, dy = p.y - c.center.y;
                const i64 lim = std::max(c.body_rx, c.body_ry) + r + 10;
                if (dx * dx + dy * dy < lim * lim) ok = false;
            }
            if (!ok) continue;
            const Rgb col = vary({95, 60, 110}, rng, 10);
            for (int y = p.y - r; y <= p.y + r; ++y)
                for (int x = p.x - r; x <= p.x + r; ++x)
                    if (in_disk(x - p.x, y - p.y, r)) scene.image.set(x, y, col);
            break;
        }
    }

    // Bridges first so the cell bodies draw over their ends.
    std::vector<Mask> owned(spec.cells.size(), Mask(W, H));
    for (const Bridge& b : spec.bridges) {
        const int pad = b.width / 2 + 1;
        for (int y = std::max(0, std::min(b.a.y, b.b.y) - pad); y <= std::min(H - 1, std::max(b.a.y, b.b.y) + pad); ++y)
            for (int x = std::max(0, std::min(b.a.x, b.b.x) - pad); x <= std::min(W - 1, std::max(b.a.x, b.b.x) + pad);
                 ++x) {
                if (!near_segment({x, y}, b.a, b.b, b.width)) continue;
                scene.image.set(x, y, b.color);
                auto center_of = [&](int owner, Point end) {
                    return owner >= 0 ? spec.cells[static_cast<std::size_t>(owner)].center : end;
                };
                const Point ca = center_of(b.owner_a, b.a), cb = center_of(b.owner_b, b.b);
                const i64 da = i64{x - ca.x} * (x - ca.x) + i64{y - ca.y} * (y - ca.y);
                const i64 db = i64{x - cb.x} * (x - cb.x) + i64{y - cb.y} * (y - cb.y);
                const int owner = da <= db ? b.owner_a : b.owner_b;
                if (owner >= 0)
                    owned[static_cast<std::size_t>(owner)].set(x, y);
                else
                    scene.truth.rbc.set(x, y);
            }
    }

    for (std::size_t i = 0; i < spec.cells.size(); ++i) {
        const CellSpec& c = spec.cells[i];
        const Mask& body = bodies[i];
        const Mask& nuc = nuclei[i];
        // Cytoplasm with a faint mottle.
        for (int y = c.center.y - c.body_ry; y <= c.center.y + c.body_ry; ++y)
            for (int x = c.center.x - c.body_rx; x <= c.center.x + c.body_rx; ++x)
                if (body(x, y)) scene.image.set(x, y, jitter(c.cytoplasm_color, rng.uniform_int(-3, 3)));
        // Granules in the cytoplasm, clear of the nucleus and the rim.
        const Mask keep_out = dilate(nuc, c.granule_radius + 1);
        for (int k = 0; k < c.granule_count; ++k) {
            for (int attempt = 0; attempt < 100; ++attempt) {
                const Point p{c.center.x + rng.uniform_int(-c.body_rx, c.body_rx),
                              c.center.y + rng.uniform_int(-c.body_ry, c.body_ry)};
                const int gr = c.granule_radius;
                CellSpec inner = c;
                inner.body_rx -= gr + 1;
                inner.body_ry -= gr + 1;
                if (inner.body_rx <= 0 || inner.body_ry <= 0 || !in_body(inner, p) || keep_out(p.x, p.y)) continue;
                const Rgb col = jitter(c.granule_color, rng.uniform_int(-6, 6));
                for (int y = p.y - gr; y <= p.y + gr; ++y)
                    for (int x = p.x - gr; x <= p.x + gr; ++x)
                        if (in_disk(x - p.x, y - p.y, gr)) scene.image.set(x, y, col);
                break;
            }
        }
        // Nucleus with chromatin texture.
        const Roi nb = *nuc.bounds();
        for (int y = nb.y0; y <= nb.y1; ++y)
            for (int x = nb.x0; x <= nb.x1; ++x)
                if (nuc(x, y)) scene.image.set(x, y, jitter(c.nucleus_color, rng.uniform_int(-10, 10)));

        TruthCell t;
        t.cls = c.cls;
        t.nucleus = nuc;
        t.cell = body | owned[i];
        t.box = *t.cell.bounds();
        scene.truth.cells.push_back(std::move(t));
    }

    // Additive noise on every channel.
    const i64 sigma256 = round_half_up(spec.noise_sigma * 256.0);
    if (sigma256 > 0)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const Rgb v = scene.image(x, y);
                const int dr = noise_sample(rng, sigma256), dg = noise_sample(rng, sigma256),
                          db = noise_sample(rng, sigma256);
                scene.image.set(x, y, {clamp_u8(v.r + dr), clamp_u8(v.g + dg), clamp_u8(v.b + db)});
            }
    return scene;
}

CellSpec random_cell(CellClass cls, Rng& rng, Point center) {
    CellSpec c;
    c.cls = cls;
    c.center = center;
    auto body = [&](int dmin, int dmax) {
        const int r = rng.uniform_int(dmin * kPxPerMicron / 2, dmax * kPxPerMicron / 2);
        c.body_rx = r;
        c.body_ry = r - rng.uniform_int(0, std::max(1, r / 15));
        if (rng.uniform_int(0, 1)) std::swap(c.body_rx, c.body_ry);
    };
    auto angle = [&] { return static_cast<double>(rng.uniform_int(0, 359)); };
    const Rgb neutral{200, 172, 150};  // neutral granules: B below G
    switch (cls) {
    case CellClass::MBE:
        body(7, 10);
        c.nucleus = NucleusKind::Disk;
        c.nucleus_radius = static_cast<int>(round_half_up(std::min(c.body_rx, c.body_ry) * rng.uniform(0.62, 0.68)));
        c.nucleus_center = {rng.uniform_int(-2, 2), rng.uniform_int(-2, 2)};
        c.nucleus_color = vary({55, 30, 75}, rng, 5);
        c.cytoplasm_color = vary({215, 150, 182}, rng, 6);
        break;
    case CellClass::MLS: {
        body(12, 15);
        const int rb = std::min(c.body_rx, c.body_ry);
        c.nucleus = NucleusKind::Disk;
        c.nucleus_radius = static_cast<int>(round_half_up(rb * rng.uniform(0.66, 0.72)));
        const Point off = polar({0, 0}, rb * rng.uniform(0.05, 0.10), angle());
        c.nucleus_center = off;
        c.nucleus_color = vary({85, 50, 130}, rng, 6);
        c.cytoplasm_color = vary({165, 185, 230}, rng, 6);
        c.granule_color = {130, 90, 170};
        c.granule_count = rng.uniform_int(0, 3);
        c.granule_radius = 1;
        break;
    }
    case CellClass::NSBG: {
        body(10, 15);
        const int rb = std::min(c.body_rx, c.body_ry);
        c.nucleus = NucleusKind::Band;
        c.s_shaped = rng.uniform_int(0, 1) == 1;
        c.band_width = static_cast<int>(round_half_up(rb * rng.uniform(0.20, 0.26)));
        c.nucleus_radius = static_cast<int>(round_half_up(rb * (c.s_shaped ? rng.uniform(0.28, 0.32) : rng.uniform(0.44, 0.50))));
        c.band_span = rng.uniform_int(200, 240);
        c.nucleus_angle = angle();
        c.nucleus_color = vary({105, 60, 145}, rng, 6);
        c.cytoplasm_color = vary({215, 170, 205}, rng, 5);
        c.granule_color = neutral;
        c.granule_count = rng.uniform_int(15, 30);
        c.granule_radius = rng.uniform_int(2, 3);
        break;
    }
    case CellClass::NSTG: {
        body(10, 13);
        const int rb = std::min(c.body_rx, c.body_ry);
        c.nucleus = NucleusKind::Lobes;
        c.lobes = rng.uniform_int(2, 3);
        c.nucleus_radius = static_cast<int>(round_half_up(rb * rng.uniform(0.25, 0.29)));
        c.lobe_gap = rng.uniform_int(4, 7);
        c.filament_width = rng.uniform_int(3, 4);
        c.nucleus_angle = angle();
        c.nucleus_color = vary({105, 60, 145}, rng, 6);
        c.cytoplasm_color = vary({215, 170, 205}, rng, 5);
        c.granule_color = neutral;
        c.granule_count = rng.uniform_int(15, 30);
        c.granule_radius = rng.uniform_int(2, 3);
        break;
    }
    case CellClass::OCS:
        if (rng.uniform_int(0, 1) == 0) {
            // Monocyte-like: kidney nucleus, gray-blue cytoplasm.
            body(12, 20);
            const int rb = std::min(c.body_rx, c.body_ry);
            c.nucleus = NucleusKind::Kidney;
            c.nucleus_radius = static_cast<int>(round_half_up(rb * rng.uniform(0.52, 0.58)));
            c.nucleus_angle = angle();
            c.nucleus_color = vary({120, 80, 150}, rng, 6);
            c.cytoplasm_color = vary({185, 185, 205}, rng, 4);
        } else {
            // Eosinophil-like: two lobes, orange granules.
            body(10, 16);
            const int rb = std::min(c.body_rx, c.body_ry);
            c.nucleus = NucleusKind::Lobes;
            c.lobes = 2;
            c.nucleus_radius = static_cast<int>(round_half_up(rb * rng.uniform(0.27, 0.31)));
            c.lobe_gap = rng.uniform_int(4, 7);
            c.filament_width = rng.uniform_int(3, 4);
            c.nucleus_angle = angle();
            c.nucleus_color = vary({100, 60, 140}, rng, 6);
            c.cytoplasm_color = vary({222, 182, 200}, rng, 4);
            c.granule_color = {230, 150, 90};
            c.granule_count = rng.uniform_int(40, 70);
            c.granule_radius = rng.uniform_int(2, 3);
        }
        break;
    }
    return c;
}

SceneSpec single_cell_scene(CellClass cls, std::uint64_t seed) {
    Rng rng(seed);
    CellSpec cell = random_cell(cls, rng, {0, 0});
    const int half = std::max(cell.body_rx, cell.body_ry);
    // Room for the widest cytoplasm search square around the nucleus.
    const int side = 3 * half + 70;
    SceneSpec s;
    s.seed = derive_seed(seed, 0x5ce7e);
    s.width = s.height = side;
    cell.center = {side / 2 + rng.uniform_int(-8, 8), side / 2 + rng.uniform_int(-8, 8)};
    s.cells.push_back(cell);
    s.rbc_count = rng.uniform_int(2, 5);
    s.impurity_count = rng.uniform_int(1, 4);
    return s;
}

SceneSpec multi_cell_scene(const std::vector<CellClass>& classes, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CellSpec> cells;
    int reach = 0;
    for (CellClass c : classes) {
        cells.push_back(random_cell(c, rng, {0, 0}));
        reach = std::max({reach, cells.back().body_rx, cells.back().body_ry});
    }
    const int n = static_cast<int>(cells.size());
    const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    const int rows = (n + cols - 1) / cols;
    const int pitch = 2 * reach + 60;
    SceneSpec s;
    s.seed = derive_seed(seed, 0x6e1d);
    s.width = std::max(1, cols) * pitch + 40;
    s.height = std::max(1, rows) * pitch + 40;
    for (int i = 0; i < n; ++i) {
        CellSpec c = cells[static_cast<std::size_t>(i)];
        c.center = {20 + pitch / 2 + (i % cols) * pitch + rng.uniform_int(-6, 6),
                    20 + pitch / 2 + (i / cols) * pitch + rng.uniform_int(-6, 6)};
        s.cells.push_back(c);
    }
    s.rbc_count = std::max(3, 2 * n);
    s.impurity_count = n + 1;
    return s;
}

std::optional<FixtureKind> parse_fixture(const std::string& name) {
    if (name == "two_disks") return FixtureKind::TwoDisks;
    if (name == "three_chain") return FixtureKind::ThreeChain;
    if (name == "cell_rbc") return FixtureKind::CellRbc;
    return std::nullopt;
}

std::string to_string(FixtureKind k) {
    switch (k) {
    case FixtureKind::TwoDisks: return "two_disks";
    case FixtureKind::ThreeChain: return "three_chain";
    case FixtureKind::CellRbc: return "cell_rbc";
    }
    return "?";
}

Scene adhesion_fixture(FixtureKind kind, std::uint64_t seed) {
    // Monocyte-like disks: kidney nuclei give a search square wide enough
    // to reach the neighbour, so the fused body has to be split.
    constexpr int R = 45, neck = 6, gap = 6, margin = 70;
    auto cell_at = [&](Point p, double notch) {
        CellSpec c;
        c.cls = CellClass::OCS;
        c.center = p;
        c.body_rx = c.body_ry = R;
        c.nucleus = NucleusKind::Kidney;
        c.nucleus_radius = 25;
        c.nucleus_angle = notch;
        c.nucleus_color = {100, 60, 140};
        c.cytoplasm_color = {185, 185, 205};
        return c;
    };
    SceneSpec s;
    s.seed = derive_seed(seed, static_cast<std::uint64_t>(kind) + 1);
    s.allow_adhesion = true;
    const int pitch = 2 * R + gap + 1;
    const int n = kind == FixtureKind::ThreeChain ? 3 : (kind == FixtureKind::TwoDisks ? 2 : 1);
    const int cy = margin + R;
    for (int i = 0; i < n; ++i) s.cells.push_back(cell_at({margin + R + i * pitch, cy}, 90.0));
    for (int i = 0; i + 1 < n; ++i)
        s.bridges.push_back({{s.cells[i].center.x + R - 1, cy}, {s.cells[i + 1].center.x - R + 1, cy}, neck,
                             s.cells[i].cytoplasm_color, i, i + 1});
    int right = s.cells.back().center.x + R;
    if (kind == FixtureKind::CellRbc) {
        RedCell rc;
        rc.radius = 34;
        rc.center = {right + gap + 1 + rc.radius, cy};
        s.red_cells.push_back(rc);
        s.bridges.push_back({{right - 1, cy}, {rc.center.x - rc.radius + 1, cy}, neck, rc.color, 0, -1});
        right = rc.center.x + rc.radius;
    }
    s.width = right + margin + 1;
    s.height = cy + R + margin + 1;
    s.rbc_count = 4;  // the stepwise averaging expects a red-cell stratum
    return generate_scene(s);
}

std::string ground_truth_json(const GroundTruth& gt, std::uint64_t seed, const std::string& stem) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["width"] = gt.rbc.width();
    j["height"] = gt.rbc.height();
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < gt.cells.size(); ++i) {
        const TruthCell& c = gt.cells[i];
        nlohmann::ordered_json e;
        e["class"] = std::string(to_string(c.cls));
        e["box"] = {c.box.x0, c.box.y0, c.box.x1, c.box.y1};
        e["nucleus_mask"] = stem + ".cell" + std::to_string(i) + ".nucleus.pgm";
        e["cell_mask"] = stem + ".cell" + std::to_string(i) + ".cell.pgm";
        cells.push_back(e);
    }
    j["cells"] = cells;
    return j.dump(2) + "\n";
}

double dice(const Mask& a, const Mask& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("dice: size mismatch");
    const long long sa = a.count(), sb = b.count();
    if (sa + sb == 0) return 1.0;
    return 2.0 * static_cast<double>((a & b).count()) / static_cast<double>(sa + sb);
}

}  // namespace bmc
