#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bmc/image.hpp"
#include "bmc/morphology.hpp"

namespace bmc {

enum class CellClass { NSTG = 0, NSBG = 1, MBE = 2, MLS = 3, OCS = 4 };

inline constexpr int kClassCount = 5;
inline constexpr std::array<CellClass, kClassCount> kAllClasses{CellClass::NSTG, CellClass::NSBG, CellClass::MBE,
                                                                CellClass::MLS, CellClass::OCS};

std::string_view to_string(CellClass c);
/// Throws SpecError on an unknown mnemonic.
CellClass parse_class(std::string_view s);

inline constexpr int kFeatureCount = 39;
inline constexpr std::string_view kFeatureSchema = "bmc39-v1";

/// Canonical order; also the CSV column order.
extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    /// Lookup by canonical name; std::out_of_range for unknown names.
    double get(std::string_view name) const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

int feature_index(std::string_view name);

struct FeatureResult {
    FeatureVector features;
    std::vector<std::string> quality_flags;  ///< guarded denominators and sentinel values
};

/// All 39 features of one cell. Masks are in patch coordinates; the
/// cytoplasm is cell minus nucleus. DegenerateError on an empty nucleus.
FeatureResult extract_features(const RgbImage& patch, const Mask& nucleus, const Mask& cell);

struct GlcmStats {
    double contrast = 0.0;
    double energy = 0.0;
    double homogeneity = 0.0;
    bool valid = false;  ///< false when no horizontal pixel pair lies in the mask
};

/// Symmetric co-occurrence at offset (1,0) over 32 levels (value >> 3),
/// both pixels inside the mask.
GlcmStats glcm_features(const GrayImage& channel, const Mask& mask);

/// Box-counting slope over box sizes {2,4,8,16}, grid anchored at `frame`'s
/// top-left corner. 0 for an empty set.
double box_count_dimension(const Mask& set, const Roi& frame);

/// Otsu-binarized S channel inside the cell, then box counting. Returns
/// nullopt when the binarization is empty.
std::optional<double> fractal_dimension(const GrayImage& s_channel, const Mask& cell);

struct OpticalDensity {
    double integrated = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/// OD = log10(255 / max(v, 1)) per pixel: sum, mean and population variance.
OpticalDensity optical_density(const GrayImage& channel, const Mask& mask);

struct ErosionProfile {
    int er_two = 0;   ///< first erosion step with >= 2 components, 0 if none
    int er_zero = 0;  ///< step at which the mask empties
    double kad = 0.0;
    int niv = 0;  ///< largest component count seen, original mask included
};

ErosionProfile erosion_profile(const Mask& nucleus);

/// Hull defects at least 2 px deep, summed over the outer contours of all
/// components.
int concavity_count(const Mask& nucleus);
int concavity_count(const Contour& contour);

struct SkeletonStats {
    long long lk = 0;
    double rl = 0.0;
};
SkeletonStats skeleton_features(const Mask& nucleus);

/// First three Hu invariants from exact integer central moments, before
/// compression.
std::array<double, 3> hu_moments(const Mask& m);
/// sign(h) * log10(|h| + 1e-30)
double compress_hu(double h);

/// sqrt(1 - l2/l1) of the second central moment matrix; 0 for fewer than
/// two pixels.
double eccentricity(const Mask& m);

/// Feature CSV: a `# schema=bmc39-v1` line, the header (39 names + label),
/// then one row per cell with 6 decimals. Unlabeled rows carry `?`.
struct FeatureRow {
    FeatureVector features;
    std::optional<CellClass> label;
};

std::string write_feature_csv(const std::vector<FeatureRow>& rows);
/// Throws VersionError on a schema mismatch and FormatError on bad rows.
std::vector<FeatureRow> read_feature_csv(const std::string& text);

}  // namespace bmc
