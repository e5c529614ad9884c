#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmc {

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct PointF {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle with inclusive corners.
struct Roi {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
    bool contains(Point p) const { return contains(p.x, p.y); }
    bool contains(PointF p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    bool contains(const Roi& o) const { return o.x0 >= x0 && o.x1 <= x1 && o.y0 >= y0 && o.y1 <= y1; }
    PointF center() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }

    friend bool operator==(const Roi&, const Roi&) = default;
};

Roi bounding_union(const Roi& a, const Roi& b);
std::optional<Roi> intersect(const Roi& a, const Roi& b);
Roi clip_roi(const Roi& r, int width, int height);

/// Row-major single-plane raster.
template <typename T>
class Raster {
public:
    using value_type = T;

    Raster() = default;
    Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
        if (width < 0 || height < 0) throw std::invalid_argument("Raster: negative size");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }
    Raster(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width < 0 || height < 0 ||
            data_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("Raster: data length does not match size");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    T operator()(int x, int y) const { return data_[index(x, y)]; }
    T& operator()(int x, int y) { return data_[index(x, y)]; }

    std::span<const T> pixels() const { return data_; }
    std::span<T> pixels() { return data_; }
    const std::vector<T>& buffer() const { return data_; }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using GrayImage = Raster<std::uint8_t>;
using LabelImage = Raster<std::int32_t>;
using RealImage = Raster<double>;

/// Binary image; foreground is stored as 255, background as 0.
class Mask {
public:
    static constexpr std::uint8_t kOn = 255;

    Mask() = default;
    Mask(int width, int height, bool fill = false)
        : plane_(width, height, fill ? kOn : std::uint8_t{0}) {}

    /// Validates that only 0 and 255 occur.
    static Mask from_gray(const GrayImage& g);
    /// Foreground wherever `g` is nonzero.
    static Mask nonzero(const GrayImage& g);

    int width() const { return plane_.width(); }
    int height() const { return plane_.height(); }
    bool in_bounds(int x, int y) const { return plane_.in_bounds(x, y); }

    bool operator()(int x, int y) const { return plane_(x, y) != 0; }
    bool test(int x, int y) const { return in_bounds(x, y) && plane_(x, y) != 0; }
    void set(int x, int y, bool on = true) { plane_(x, y) = on ? kOn : 0; }

    std::span<const std::uint8_t> pixels() const { return plane_.pixels(); }
    const GrayImage& gray() const { return plane_; }

    long long count() const;
    bool none() const { return count() == 0; }
    std::optional<Roi> bounds() const;

    Mask operator|(const Mask& o) const;
    Mask operator&(const Mask& o) const;
    Mask operator~() const;
    /// Set difference: this AND NOT o.
    Mask minus(const Mask& o) const;
    bool subset_of(const Mask& o) const;

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    GrayImage plane_;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved 8-bit RGB raster.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {});
    RgbImage(int width, int height, std::vector<std::uint8_t> interleaved);

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    Rgb operator()(int x, int y) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width_ + x);
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    std::span<const std::uint8_t> bytes() const { return data_; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

template <typename T>
Raster<T> crop(const Raster<T>& img, const Roi& r) {
    Raster<T> out(r.width(), r.height());
    for (int y = r.y0; y <= r.y1; ++y)
        for (int x = r.x0; x <= r.x1; ++x) out(x - r.x0, y - r.y0) = img(x, y);
    return out;
}
Mask crop(const Mask& m, const Roi& r);
RgbImage crop(const RgbImage& img, const Roi& r);

/// Copy `patch` into a full-size mask at offset (r.x0, r.y0).
Mask paste(const Mask& patch, const Roi& r, int width, int height);

/// Pixels of `img` with the mask's foreground set to `value`.
GrayImage fill_masked(const GrayImage& img, const Mask& m, std::uint8_t value);

PointF centroid(const Mask& m);

/// Round-half-up to the nearest integer, the convention used for every
/// real-to-gray conversion in the library.
inline long long round_half_up(double v) { return static_cast<long long>(std::floor(v + 0.5)); }

inline std::uint8_t clamp_u8(long long v) {
    return static_cast<std::uint8_t>(std::clamp<long long>(v, 0, 255));
}

}  // namespace bmc
