#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance runner. They favour the obvious loop over anything clever.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bmc/color.hpp"
#include "bmc/commands.hpp"
#include "bmc/image.hpp"
#include "bmc/synth.hpp"
#include "bmc/threshold.hpp"

namespace oracle {

using bmc::GrayImage;
using bmc::Mask;
using bmc::Rgb;

using i128 = __int128;

/// Exhaustive Otsu over cuts 0..254 with exact rational comparison of
/// n0*n1*(mu0-mu1)^2 = (N*S0 - n0*S)^2 / (n0*n1). Smallest cut wins ties.
/// Returns -1 when no cut splits the histogram.
inline int otsu(const bmc::Histogram& h) {
    i128 N = 0, S = 0;
    for (int v = 0; v < 256; ++v) {
        N += h[v];
        S += static_cast<i128>(h[v]) * v;
    }
    int best = -1;
    i128 best_num = 0, best_den = 1;
    for (int t = 0; t < 255; ++t) {
        i128 n0 = 0, s0 = 0;
        for (int v = 0; v <= t; ++v) {
            n0 += h[v];
            s0 += static_cast<i128>(h[v]) * v;
        }
        const i128 n1 = N - n0;
        if (n0 == 0 || n1 == 0) continue;
        const i128 d = N * s0 - n0 * S;
        const i128 num = d * d, den = n0 * n1;
        if (best < 0 || num * best_den > best_num * den) {
            best = t;
            best_num = num;
            best_den = den;
        }
    }
    return best;
}

/// H and S of the HSI model through atan2, scaled to [0, 255] and rounded
/// half up; H is 0 where the rounded S is 0. Hue hits an exact half only at
/// 60, 180 and 300 degrees, which float noise could push either way, hence
/// the small bias.
inline std::pair<int, int> hue_sat(Rgb c) {
    const int r = c.r, g = c.g, b = c.b, sum = r + g + b;
    if (sum == 0) return {0, 0};
    const int mn = std::min({r, g, b});
    const double s = std::floor(255.0 * (sum - 3 * mn) / sum + 0.5);
    if (s == 0.0) return {0, 0};
    double deg = std::atan2(std::sqrt(3.0) * (g - b), 2.0 * r - g - b) * 180.0 / std::numbers::pi;
    if (deg < 0) deg += 360.0;
    long long h = static_cast<long long>(std::floor(deg * 255.0 / 360.0 + 0.5 + 1e-9));
    if (h > 255) h = 255;
    return {static_cast<int>(h), static_cast<int>(s)};
}

/// HSG with the default weights (0.4, 0.6, 1.0) and scale 100, all integer:
/// 100*(0.4H + 0.6S)/G = 20*(2H + 3S)/G.
inline int hsg_default(Rgb c) {
    if (c.g == 0) return 255;
    const auto [h, s] = hue_sat(c);
    const long long num = 20LL * (2 * h + 3 * s);
    const long long q = (2 * num + c.g) / (2LL * c.g);
    return static_cast<int>(std::min<long long>(q, 255));
}

/// BSG with lambda = k/100, integer arithmetic.
inline int bsg_percent(int b, int g, int k) {
    const long long v100 = static_cast<long long>(k) * (b - g) + static_cast<long long>(100 - k) * (255 - g);
    if (v100 <= 0) return 0;
    return static_cast<int>(std::min<long long>((2 * v100 + 100) / 200, 255));
}

/// Two-pass 3x3 population variance with replicated edges.
inline GrayImage texture(const GrayImage& bsg, const Mask& background) {
    const int w = bsg.width(), h = bsg.height();
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double vals[9];
            int k = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = std::min(std::max(x + dx, 0), w - 1);
                    const int yy = std::min(std::max(y + dy, 0), h - 1);
                    vals[k++] = background(xx, yy) ? 0.0 : bsg(xx, yy);
                }
            double mean = 0;
            for (double v : vals) mean += v;
            mean /= 9.0;
            double var = 0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= 9.0;
            out(x, y) = static_cast<std::uint8_t>(std::min(255.0, std::floor(var + 0.5)));
        }
    return out;
}

/// Breadth-first labelling; 8-connectivity when `eight`.
inline std::vector<std::vector<std::pair<int, int>>> components(const Mask& m, bool eight) {
    const int w = m.width(), h = m.height();
    std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::vector<std::pair<int, int>>> out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!m(x, y) || seen[static_cast<std::size_t>(y) * w + x]) continue;
            std::vector<std::pair<int, int>> comp;
            std::deque<std::pair<int, int>> q{{x, y}};
            seen[static_cast<std::size_t>(y) * w + x] = 1;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop_front();
                comp.push_back({cx, cy});
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        if (!eight && dx != 0 && dy != 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h || !m(nx, ny)) continue;
                        char& s = seen[static_cast<std::size_t>(ny) * w + nx];
                        if (s) continue;
                        s = 1;
                        q.push_back({nx, ny});
                    }
            }
            out.push_back(std::move(comp));
        }
    return out;
}

struct Particles {
    int count = 0;
    Mask mask;
};

/// Zero-BSG 8-components that avoid `nwig` and exceed `min_area` pixels.
inline Particles particles(const GrayImage& bsg, const Mask& nwig, long long min_area) {
    Mask zero(bsg.width(), bsg.height());
    for (int y = 0; y < bsg.height(); ++y)
        for (int x = 0; x < bsg.width(); ++x)
            if (bsg(x, y) == 0) zero.set(x, y);
    Particles p;
    p.mask = Mask(bsg.width(), bsg.height());
    for (const auto& comp : components(zero, true)) {
        bool touches = false;
        for (auto [x, y] : comp) touches = touches || nwig(x, y);
        if (touches || static_cast<long long>(comp.size()) <= min_area) continue;
        ++p.count;
        for (auto [x, y] : comp) p.mask.set(x, y);
    }
    return p;
}

/// 3x3 erosion, outside of the image counts as background.
inline Mask erode3(const Mask& m) {
    Mask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool all = true;
            for (int dy = -1; dy <= 1 && all; ++dy)
                for (int dx = -1; dx <= 1 && all; ++dx) all = m.test(x + dx, y + dy);
            if (all) out.set(x, y);
        }
    return out;
}

struct Erosion {
    int er_two = 0, er_zero = 0, niv = 0;
    double kad = 0.0;
};

inline Erosion erosion(const Mask& nucleus) {
    Erosion e;
    if (nucleus.none()) return e;
    Mask m = nucleus;
    e.niv = static_cast<int>(components(m, true).size());
    for (int step = 1;; ++step) {
        m = erode3(m);
        const int c = static_cast<int>(components(m, true).size());
        if (c == 0) {
            e.er_zero = step;
            break;
        }
        e.niv = std::max(e.niv, c);
        if (c >= 2 && e.er_two == 0) e.er_two = step;
    }
    e.kad = e.er_two ? static_cast<double>(e.er_two) / e.er_zero : 0.0;
    return e;
}

/// Textbook Zhang-Suen thinning on a copy framed by one background pixel.
inline Mask zhang_suen(const Mask& in) {
    const int w = in.width() + 2, h = in.height() + 2;
    std::vector<std::vector<int>> g(h, std::vector<int>(w, 0));
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) g[y + 1][x + 1] = in(x, y) ? 1 : 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<std::pair<int, int>> del;
            for (int y = 1; y < h - 1; ++y)
                for (int x = 1; x < w - 1; ++x) {
                    if (!g[y][x]) continue;
                    const int p2 = g[y - 1][x], p3 = g[y - 1][x + 1], p4 = g[y][x + 1], p5 = g[y + 1][x + 1];
                    const int p6 = g[y + 1][x], p7 = g[y + 1][x - 1], p8 = g[y][x - 1], p9 = g[y - 1][x - 1];
                    const int B = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
                    int A = 0;
                    for (int i = 0; i < 8; ++i) A += seq[i] == 0 && seq[i + 1] == 1;
                    if (B < 2 || B > 6 || A != 1) continue;
                    if (pass == 0 && (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0)) continue;
                    if (pass == 1 && (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0)) continue;
                    del.push_back({x, y});
                }
            for (auto [x, y] : del) g[y][x] = 0;
            changed = changed || !del.empty();
        }
    }
    Mask out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x)
            if (g[y + 1][x + 1]) out.set(x, y);
    return out;
}

/// Maximal violating pair gap of an RBF C-SVC dual, recomputed from the
/// multipliers alone.
inline double kkt_gap(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      const std::vector<double>& a, double C, double gamma) {
    const std::size_t n = x.size();
    double up = -1e300, low = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        double g = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < x[i].size(); ++k) d2 += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
            g += y[i] * y[j] * a[j] * std::exp(-gamma * d2);
        }
        const double v = -y[i] * g;
        if ((y[i] > 0 && a[i] < C) || (y[i] < 0 && a[i] > 0)) up = std::max(up, v);
        if ((y[i] < 0 && a[i] < C) || (y[i] > 0 && a[i] > 0)) low = std::min(low, v);
    }
    return up - low;
}

}  // namespace oracle

namespace testkit {

/// Random blob: union of a few disks and rectangles inside a w x h frame,
/// kept clear of the border.
inline bmc::Mask random_blob(bmc::Rng& rng, int w, int h, int parts) {
    bmc::Mask m(w, h);
    for (int k = 0; k < parts; ++k) {
        const int cx = rng.uniform_int(8, w - 9), cy = rng.uniform_int(8, h - 9);
        const int r = rng.uniform_int(3, 7);
        const bool disk = rng.uniform_int(0, 1) == 1;
        for (int y = cy - r; y <= cy + r; ++y)
            for (int x = cx - r; x <= cx + r; ++x) {
                if (x < 1 || y < 1 || x >= w - 1 || y >= h - 1) continue;
                if (disk && (x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
                m.set(x, y);
            }
    }
    return m;
}

inline bmc::RgbImage random_image(bmc::Rng& rng, int w, int h) {
    bmc::RgbImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y,
                    {static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<std::uint8_t>(rng.uniform_int(0, 255))});
    return img;
}

/// Four gray modes with Gaussian noise (Box-Muller on the library RNG).
inline bmc::GrayImage four_mode_image(std::uint64_t seed, double sigma, int w = 200, int h = 200) {
    bmc::Rng rng(seed);
    const int modes[4] = {20, 90, 160, 230};
    const double cut[4] = {0.60, 0.80, 0.92, 1.00};
    bmc::GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = rng.uniform01();
            int m = 0;
            while (u >= cut[m]) ++m;
            const double u1 = 1.0 - rng.uniform01(), u2 = rng.uniform01();
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            img(x, y) = bmc::clamp_u8(bmc::round_half_up(modes[m] + sigma * z));
        }
    return img;
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("bmc_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = bmc::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testkit
