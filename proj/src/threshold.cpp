#include "bmc/threshold.hpp"

#include <string>

#include "bmc/error.hpp"

namespace bmc {

Histogram histogram(const GrayImage& img) {
    Histogram h{};
    for (auto v : img.pixels()) ++h[v];
    return h;
}

Histogram histogram(const GrayImage& img, const Mask& within) {
    Histogram h{};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (within(x, y)) ++h[img(x, y)];
    return h;
}

namespace {

// Mean of histogram values v with lo < v < hi; nullopt when empty.
std::optional<double> mean_between(const Histogram& h, double lo, double hi) {
    std::uint64_t n = 0, s = 0;
    for (int v = 0; v < 256; ++v) {
        if (v > lo && v < hi) {
            n += h[v];
            s += h[v] * static_cast<std::uint64_t>(v);
        }
    }
    if (n == 0) return std::nullopt;
    return static_cast<double>(s) / static_cast<double>(n);
}

}  // namespace

SamTrace sam_levels(const Histogram& hist, const SamOptions& opt) {
    SamTrace trace;
    double t_i = opt.ignore_zero ? 0.0 : -1.0;
    for (int round = 1; round <= 3; ++round) {
        const auto t_j = mean_between(hist, t_i, 256.0);
        if (!t_j)
            throw DegenerateError("stepwise averaging: no pixel above the cut in round " + std::to_string(round));
        auto t_k = mean_between(hist, t_i, *t_j);
        if (!t_k) {
            if (round == 1)
                throw DegenerateError("stepwise averaging: empty stratum below the mean in round 1");
            t_k = trace.iterations.back().t_k;
        }
        trace.iterations.push_back({*t_j, *t_k});
        t_i = opt.update == SamUpdate::Midpoint ? (*t_k + *t_j) / 2.0 : *t_k;
    }
    const auto& it = trace.iterations;
    trace.final_levels.bT = it[0].t_k;
    trace.final_levels.rT = it[1].t_k;
    trace.final_levels.cT = it[2].t_k;
    if (opt.update == SamUpdate::Midpoint) {
        trace.final_levels.kT = mean_between(hist, t_i, 256.0).value_or(it[2].t_j);
    } else {
        trace.final_levels.kT = it[2].t_j;
    }
    return trace;
}

SamTrace sam_levels(const GrayImage& img, const SamOptions& opt) { return sam_levels(histogram(img), opt); }

double sam_mask_threshold(const GrayLevels& levels) { return (levels.cT + levels.kT) / 2.0; }

Mask sam_mask(const GrayImage& img, const GrayLevels& levels) {
    const double t = sam_mask_threshold(levels);
    Mask m(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img(x, y) >= t) m.set(x, y);
    return m;
}

int otsu_threshold(const Histogram& hist) {
    int populated = 0;
    double n_total = 0.0, s_total = 0.0;
    for (int v = 0; v < 256; ++v) {
        populated += hist[v] > 0;
        n_total += static_cast<double>(hist[v]);
        s_total += static_cast<double>(hist[v]) * v;
    }
    if (populated < 2) throw DegenerateError("otsu: histogram has fewer than two populated bins");

    int best_t = 0;
    double best = -1.0;
    double n0 = 0.0, s0 = 0.0;
    for (int t = 0; t < 255; ++t) {
        n0 += static_cast<double>(hist[t]);
        s0 += static_cast<double>(hist[t]) * t;
        const double n1 = n_total - n0;
        if (n0 == 0.0 || n1 == 0.0) continue;
        const double mu0 = s0 / n0, mu1 = (s_total - s0) / n1;
        const double between = n0 * n1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

int otsu_threshold(const GrayImage& img, std::optional<Roi> roi) {
    if (!roi) return otsu_threshold(histogram(img));
    return otsu_threshold(histogram(crop(img, *roi)));
}

int weighted_threshold(double a, double b, double gamma) {
    return static_cast<int>(round_half_up(gamma * a + (1.0 - gamma) * b + 1e-9));
}

}  // namespace bmc
