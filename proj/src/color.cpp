#include "bmc/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bmc/morphology.hpp"

namespace bmc {

namespace {

// Decimal weights (0.4, 0.6, 0.5...) are not exact in binary; results sit
// at least 1/510 away from a half-integer unless they are exactly on one, so
// a tiny bias keeps exact halves rounding up.
constexpr double kHalfBias = 1e-9;

std::uint8_t round_gray(double v) { return clamp_u8(round_half_up(v + kHalfBias)); }

template <typename F>
GrayImage map_pixels(const RgbImage& img, F f) {
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out(x, y) = f(img(x, y));
    return out;
}

}  // namespace

RgbPlanes channels(const RgbImage& img) {
    return {map_pixels(img, [](Rgb c) { return c.r; }), map_pixels(img, [](Rgb c) { return c.g; }),
            map_pixels(img, [](Rgb c) { return c.b; })};
}

RgbImage merge_channels(const RgbPlanes& p) {
    RgbImage out(p.r.width(), p.r.height());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.set(x, y, {p.r(x, y), p.g(x, y), p.b(x, y)});
    return out;
}

HsiPixel hsi_pixel(Rgb c) {
    const int r = c.r, g = c.g, b = c.b;
    const int sum = r + g + b;
    const int mn = std::min({r, g, b});
    HsiPixel out;
    out.i = static_cast<std::uint8_t>((2 * sum + 3) / 6);  // round(sum / 3)
    if (sum == 0) return out;
    // 255 * (1 - 3*min/sum), exact rational rounding.
    const long long num = 255LL * (sum - 3 * mn);
    out.s = static_cast<std::uint8_t>((2 * num + sum) / (2LL * sum));
    if (out.s == 0) return out;
    const double rg = r - g, rb = r - b, gb = g - b;
    const double den = std::sqrt(rg * rg + rb * gb);
    if (den <= 0.0) return out;
    const double cosv = std::clamp(0.5 * (rg + rb) / den, -1.0, 1.0);
    double theta = std::acos(cosv) * 180.0 / std::numbers::pi;
    if (b > g) theta = 360.0 - theta;
    out.h = round_gray(theta * 255.0 / 360.0);
    return out;
}

HsiPlanes hsi_channels(const RgbImage& img) {
    HsiPlanes p{GrayImage(img.width(), img.height()), GrayImage(img.width(), img.height()),
                GrayImage(img.width(), img.height())};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const HsiPixel v = hsi_pixel(img(x, y));
            p.h(x, y) = v.h;
            p.s(x, y) = v.s;
            p.i(x, y) = v.i;
        }
    return p;
}

std::uint8_t hsg_value(std::uint8_t h, std::uint8_t s, std::uint8_t g, const HsgParams& p) {
    if (g == 0) return 255;
    const double num = p.scale * (p.w1 * h + p.w2 * s);
    return round_gray(num / (p.w3 * g));
}

GrayImage hsg_transform(const RgbImage& img, const HsgParams& p) {
    return map_pixels(img, [&](Rgb c) {
        const HsiPixel v = hsi_pixel(c);
        return hsg_value(v.h, v.s, c.g, p);
    });
}

std::uint8_t bsg_value(std::uint8_t b, std::uint8_t g, double lambda) {
    const double v = lambda * (static_cast<int>(b) - static_cast<int>(g)) + (1.0 - lambda) * (255 - static_cast<int>(g));
    if (v <= 0.0) return 0;
    return round_gray(v);
}

GrayImage bsg_transform(const RgbImage& img, const BsgParams& p) {
    return map_pixels(img, [&](Rgb c) { return bsg_value(c.b, c.g, p.lambda); });
}

GrayImage texture_image(const GrayImage& bsg, const Mask& background) {
    const int w = bsg.width(), h = bsg.height();
    const GrayImage src = background.width() == w && background.height() == h
                              ? fill_masked(bsg, background, 0)
                              : bsg;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            long long s = 0, s2 = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long long v = src(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
                    s += v;
                    s2 += v * v;
                }
            // variance = (9*s2 - s^2) / 81, rounded half up in integers.
            const long long num = 9 * s2 - s * s;
            out(x, y) = clamp_u8((2 * num + 81) / 162);
        }
    return out;
}

Mask nwig_from_texture(const GrayImage& teig, long long min_area) {
    Mask zero(teig.width(), teig.height());
    for (int y = 0; y < teig.height(); ++y)
        for (int x = 0; x < teig.width(); ++x)
            if (teig(x, y) == 0) zero.set(x, y);
    const Components cc = connected_components(zero, Connectivity::Eight);
    Mask out(teig.width(), teig.height());
    for (int y = 0; y < teig.height(); ++y)
        for (int x = 0; x < teig.width(); ++x) {
            const int id = cc.labels(x, y);
            if (id > 0 && cc.regions[id - 1].pixel_count > min_area) out.set(x, y);
        }
    return out;
}

ParticleReport particle_report(const GrayImage& bsg, const Mask& nwig, long long min_particle_area,
                               int consistency_count) {
    Mask zero(bsg.width(), bsg.height());
    for (int y = 0; y < bsg.height(); ++y)
        for (int x = 0; x < bsg.width(); ++x)
            if (bsg(x, y) == 0) zero.set(x, y);
    const Components cc = connected_components(zero, Connectivity::Eight);
    std::vector<char> touches(cc.regions.size() + 1, 0);
    for (int y = 0; y < bsg.height(); ++y)
        for (int x = 0; x < bsg.width(); ++x)
            if (cc.labels(x, y) > 0 && nwig(x, y)) touches[cc.labels(x, y)] = 1;

    ParticleReport rep;
    rep.particle_mask = Mask(bsg.width(), bsg.height());
    std::vector<char> accepted(cc.regions.size() + 1, 0);
    for (const Region& r : cc.regions) {
        if (!touches[r.id] && r.pixel_count > min_particle_area) {
            accepted[r.id] = 1;
            ++rep.particle_count;
        }
    }
    for (int y = 0; y < bsg.height(); ++y)
        for (int x = 0; x < bsg.width(); ++x)
            if (accepted[cc.labels(x, y)] && cc.labels(x, y) > 0) rep.particle_mask.set(x, y);
    rep.colors_consistent = rep.particle_count < consistency_count;
    return rep;
}

std::uint8_t y_value(Rgb c) {
    const int mx = std::max({c.r, c.g, c.b});
    if (mx == 0) return 0;
    // 255 * (1 - B/255 - K) / (1 - K) with K = 1 - max/255 reduces to 255*(max-B)/max.
    const long long num = 255LL * (mx - c.b);
    return static_cast<std::uint8_t>((2 * num + mx) / (2LL * mx));
}

GrayImage y_component(const RgbImage& img) { return map_pixels(img, y_value); }

std::uint8_t hsv_s_value(Rgb c) {
    const int mx = std::max({c.r, c.g, c.b});
    const int mn = std::min({c.r, c.g, c.b});
    if (mx == 0) return 0;
    const long long num = 255LL * (mx - mn);
    return static_cast<std::uint8_t>((2 * num + mx) / (2LL * mx));
}

GrayImage hsv_s_component(const RgbImage& img) { return map_pixels(img, hsv_s_value); }

}  // namespace bmc
