#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bmc/image.hpp"

namespace bmc {

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayImage& img);
/// Histogram restricted to the mask's foreground.
Histogram histogram(const GrayImage& img, const Mask& within);

/// The four gray strata estimated by stepwise averaging, in ascending order:
/// background, mature red cells, cytoplasm, nucleus.
struct GrayLevels {
    double bT = 0.0;
    double rT = 0.0;
    double cT = 0.0;
    double kT = 0.0;
};

struct SamRound {
    double t_j = 0.0;  ///< mean above the lower cut
    double t_k = 0.0;  ///< mean strictly between the lower cut and t_j
};

struct SamTrace {
    std::vector<SamRound> iterations;  ///< always three rounds
    GrayLevels final_levels;
};

/// How the lower cut T_i advances between rounds.
enum class SamUpdate {
    /// T_i <- (T_k + T_j) / 2: the cut moves past the stratum just measured,
    /// so noise around a mode does not leak into the next stratum.
    Midpoint,
    /// T_i <- T_k, levels = (T_k1, T_k2, T_k3, T_j3).
    Literal,
};

struct SamOptions {
    /// When false, zero-valued pixels take part in the first round
    /// (T_i starts below 0); when true T_i starts at 0 and zeros never count.
    bool ignore_zero = true;
    SamUpdate update = SamUpdate::Midpoint;
};

/// Stepwise averaging. Each round: T_j = mean(v > T_i),
/// T_k = mean(T_i < v < T_j), then T_i advances. Raises DegenerateError when
/// a T_j set is empty or when round 1 has no pixel strictly between T_i and
/// T_j; an empty T_k set in later rounds repeats the previous T_k.
SamTrace sam_levels(const Histogram& hist, const SamOptions& opt = {});
SamTrace sam_levels(const GrayImage& img, const SamOptions& opt = {});

/// Rough nucleus mask: 255 where value >= (cT + kT) / 2.
Mask sam_mask(const GrayImage& img, const GrayLevels& levels);
double sam_mask_threshold(const GrayLevels& levels);

/// Otsu's threshold t; the low class is v <= t. Maximizes between-class
/// variance over cuts 0..254, smallest t on ties. DegenerateError when fewer
/// than two bins are populated.
int otsu_threshold(const Histogram& hist);
int otsu_threshold(const GrayImage& img, std::optional<Roi> roi = std::nullopt);

/// round_half_up(gamma * a + (1 - gamma) * b).
int weighted_threshold(double a, double b, double gamma);

}  // namespace bmc
