#pragma once

#include "bmc/image.hpp"

namespace bmc {

struct RgbPlanes {
    GrayImage r, g, b;
};

RgbPlanes channels(const RgbImage& img);
RgbImage merge_channels(const RgbPlanes& planes);

struct HsiPlanes {
    GrayImage h, s, i;
};

/// Standard arccos-form HSI with every plane scaled to [0, 255]. Achromatic
/// pixels (S == 0) get H = 0; black pixels get S = 0.
HsiPlanes hsi_channels(const RgbImage& img);

struct HsiPixel {
    std::uint8_t h = 0, s = 0, i = 0;
};
HsiPixel hsi_pixel(Rgb c);

/// Weights of the hue/saturation/green enhancement. `scale` maps the
/// dimensionless ratio to gray levels before clamping.
struct HsgParams {
    double w1 = 0.4;
    double w2 = 0.6;
    double w3 = 1.0;
    double scale = 100.0;
};

/// Nucleus enhancement: clamp(round(scale * (w1*H + w2*S) / (w3*G))), or 255
/// where G == 0.
GrayImage hsg_transform(const RgbImage& img, const HsgParams& p = {});
std::uint8_t hsg_value(std::uint8_t h, std::uint8_t s, std::uint8_t g, const HsgParams& p);

struct BsgParams {
    double lambda = 1.0;
};

/// Cell-body weakening image: V = lambda*(B-G) + (1-lambda)*(255-G), kept
/// only where positive.
GrayImage bsg_transform(const RgbImage& img, const BsgParams& p = {});
std::uint8_t bsg_value(std::uint8_t b, std::uint8_t g, double lambda);

/// Population variance over the 3x3 window (edge replication at the
/// border) of `bsg` after zeroing `background`, rounded and clamped.
GrayImage texture_image(const GrayImage& bsg, const Mask& background);

/// Connected zero-valued texture regions larger than `min_area`: the
/// uniform non-cell areas (background, mature red cells).
Mask nwig_from_texture(const GrayImage& teig, long long min_area);

struct ParticleReport {
    Mask particle_mask;  ///< accepted particles only
    int particle_count = 0;
    bool colors_consistent = true;
};

/// Counts 8-connected components of (bsg == 0) that avoid `nwig` and are
/// larger than `min_particle_area`.
ParticleReport particle_report(const GrayImage& bsg, const Mask& nwig, long long min_particle_area,
                               int consistency_count);

/// Y plane of CMYK (K = 1 - max/255, Y = (1 - B/255 - K)/(1 - K)); 0 when K == 1.
GrayImage y_component(const RgbImage& img);
std::uint8_t y_value(Rgb c);

/// S plane of HSV: 255*(1 - min/max), 0 when max == 0.
GrayImage hsv_s_component(const RgbImage& img);
std::uint8_t hsv_s_value(Rgb c);

}  // namespace bmc
