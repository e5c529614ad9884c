#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bmc/features.hpp"
#include "bmc/image.hpp"

namespace bmc {

/// Deterministic generator: mt19937_64 bits with our own integer mapping, so
/// the stream does not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi);
    /// Uniform double in [0, 1) from 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 engine_;
};

/// Mixes several values into one seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

enum class NucleusKind { Disk, Band, Lobes, Kidney };

/// Render scale: 10 px per micrometre.
inline constexpr int kPxPerMicron = 10;

struct CellSpec {
    CellClass cls = CellClass::MBE;
    Point center;
    int body_rx = 40;  ///< body semi-axes, px
    int body_ry = 40;
    NucleusKind nucleus = NucleusKind::Disk;
    Point nucleus_center;  ///< relative to `center`
    int nucleus_radius = 25;  ///< disk and kidney radius, lobe radius, band arc radius
    double nucleus_angle = 0.0;  ///< orientation of bands, lobe chains and kidney notch
    int band_width = 0;
    int band_span = 210;  ///< degrees covered by a U band
    bool s_shaped = false;  ///< band drawn as S instead of U
    int lobes = 0;
    int lobe_gap = 5;  ///< filament length between lobe rims
    int filament_width = 3;
    Rgb nucleus_color{60, 30, 80};
    Rgb cytoplasm_color{215, 150, 170};
    Rgb granule_color{};
    int granule_count = 0;
    int granule_radius = 2;
};

struct RedCell {
    Point center;
    int radius = 34;
    Rgb color{235, 195, 195};
};

/// Straight strip of `color` joining two objects. Pixels go to whichever
/// owner center is nearer; owner -1 is a red cell.
struct Bridge {
    Point a;
    Point b;
    int width = 6;
    Rgb color{};
    int owner_a = -1;
    int owner_b = -1;
};

struct SceneSpec {
    std::uint64_t seed = 1;
    int width = 320;
    int height = 320;
    std::vector<CellSpec> cells;
    std::vector<RedCell> red_cells;  ///< placed as given
    std::vector<Bridge> bridges;
    int rbc_count = 0;  ///< additional red cells placed at random, clear of cells
    int impurity_count = 0;
    Rgb background{242, 238, 238};
    double noise_sigma = 2.0;
    /// Cells may touch when set (adhesion fixtures); otherwise overlapping
    /// bodies are a SpecError.
    bool allow_adhesion = false;
};

struct TruthCell {
    CellClass cls = CellClass::MBE;
    Mask nucleus;
    Mask cell;
    Roi box;
};

struct GroundTruth {
    std::vector<TruthCell> cells;
    Mask rbc;  ///< every mature red cell
};

struct Scene {
    RgbImage image;
    GroundTruth truth;
};

/// Renders background, red cells, impurities, then cells, then noise.
/// Identical specs give identical bytes. SpecError when a cell leaves the
/// frame or bodies overlap without `allow_adhesion`.
Scene generate_scene(const SceneSpec& spec);

/// Randomized class-consistent cell centred at `center`.
CellSpec random_cell(CellClass cls, Rng& rng, Point center);

/// One cell of the class plus red cells and impurities, sized to fit.
SceneSpec single_cell_scene(CellClass cls, std::uint64_t seed);

/// Cells of the given classes on a grid, far enough apart that no two
/// bodies touch, plus red cells and impurities in the gaps.
SceneSpec multi_cell_scene(const std::vector<CellClass>& classes, std::uint64_t seed);

/// Nucleus and body masks of a spec, frame sized.
Mask render_nucleus_mask(const CellSpec& c, int width, int height);
Mask render_body_mask(const CellSpec& c, int width, int height);

enum class FixtureKind { TwoDisks, ThreeChain, CellRbc };
std::optional<FixtureKind> parse_fixture(const std::string& name);
std::string to_string(FixtureKind k);

/// Fused-object scenes. two_disks and three_chain join equal cells by 6 px
/// necks; cell_rbc joins one cell to a red cell. Truth masks split fused
/// bodies along the neck.
Scene adhesion_fixture(FixtureKind kind, std::uint64_t seed = 1);

/// {seed, width, height, cells: [{class, box, nucleus_mask, cell_mask}]};
/// mask entries name files written next to the scene.
std::string ground_truth_json(const GroundTruth& gt, std::uint64_t seed, const std::string& stem);

double dice(const Mask& a, const Mask& b);

}  // namespace bmc
