#include "bmc/image.hpp"

namespace bmc {

Roi bounding_union(const Roi& a, const Roi& b) {
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

std::optional<Roi> intersect(const Roi& a, const Roi& b) {
    Roi r{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
    if (r.x0 > r.x1 || r.y0 > r.y1) return std::nullopt;
    return r;
}

Roi clip_roi(const Roi& r, int width, int height) {
    return {std::clamp(r.x0, 0, width - 1), std::clamp(r.y0, 0, height - 1),
            std::clamp(r.x1, 0, width - 1), std::clamp(r.y1, 0, height - 1)};
}

Mask Mask::from_gray(const GrayImage& g) {
    for (auto v : g.pixels())
        if (v != 0 && v != kOn) throw std::invalid_argument("mask values must be 0 or 255");
    Mask m;
    m.plane_ = g;
    return m;
}

Mask Mask::nonzero(const GrayImage& g) {
    Mask m(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g(x, y) != 0) m.set(x, y);
    return m;
}

long long Mask::count() const {
    long long n = 0;
    for (auto v : plane_.pixels()) n += v != 0;
    return n;
}

std::optional<Roi> Mask::bounds() const {
    Roi r{width(), height(), -1, -1};
    for (int y = 0; y < height(); ++y)
        for (int x = 0; x < width(); ++x)
            if ((*this)(x, y)) {
                r.x0 = std::min(r.x0, x);
                r.y0 = std::min(r.y0, y);
                r.x1 = std::max(r.x1, x);
                r.y1 = std::max(r.y1, y);
            }
    if (r.x1 < 0) return std::nullopt;
    return r;
}

namespace {
template <typename Op>
Mask combine(const Mask& a, const Mask& b, Op op) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("mask size mismatch");
    Mask out(a.width(), a.height());
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) out.set(x, y, op(a(x, y), b(x, y)));
    return out;
}
}  // namespace

Mask Mask::operator|(const Mask& o) const { return combine(*this, o, [](bool p, bool q) { return p || q; }); }
Mask Mask::operator&(const Mask& o) const { return combine(*this, o, [](bool p, bool q) { return p && q; }); }
Mask Mask::minus(const Mask& o) const { return combine(*this, o, [](bool p, bool q) { return p && !q; }); }

Mask Mask::operator~() const {
    Mask out(width(), height());
    for (int y = 0; y < height(); ++y)
        for (int x = 0; x < width(); ++x) out.set(x, y, !(*this)(x, y));
    return out;
}

bool Mask::subset_of(const Mask& o) const {
    for (int y = 0; y < height(); ++y)
        for (int x = 0; x < width(); ++x)
            if ((*this)(x, y) && !o(x, y)) return false;
    return true;
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("RgbImage: negative size");
    data_.resize(3 * static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
    if (width < 0 || height < 0 || data_.size() != 3 * static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("RgbImage: data length does not match size");
}

Mask crop(const Mask& m, const Roi& r) {
    Mask out(r.width(), r.height());
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x)
            if (m(x, y)) out.set(x - r.x0, y - r.y0);
    return out;
}

RgbImage crop(const RgbImage& img, const Roi& r) {
    RgbImage out(r.width(), r.height());
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) out.set(x - r.x0, y - r.y0, img(x, y));
    return out;
}

Mask paste(const Mask& patch, const Roi& r, int width, int height) {
    Mask out(width, height);
    for (int y = 0; y < patch.height(); ++y)
        for (int x = 0; x < patch.width(); ++x)
            if (patch(x, y) && out.in_bounds(x + r.x0, y + r.y0)) out.set(x + r.x0, y + r.y0);
    return out;
}

GrayImage fill_masked(const GrayImage& img, const Mask& m, std::uint8_t value) {
    GrayImage out = img;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (m(x, y)) out(x, y) = value;
    return out;
}

PointF centroid(const Mask& m) {
    long long n = 0, sx = 0, sy = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m(x, y)) {
                ++n;
                sx += x;
                sy += y;
            }
    if (n == 0) return {0.0, 0.0};
    return {static_cast<double>(sx) / n, static_cast<double>(sy) / n};
}

}  // namespace bmc
