#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmc/features.hpp"
#include "bmc/localization.hpp"
#include "bmc/segmentation.hpp"
#include "bmc/svm.hpp"
#include "bmc/synth.hpp"
#include "bmc/threshold.hpp"

namespace bmc {

/// Every tunable of the image-to-features path. The HSG weights live in
/// `seg.hsg` and serve localization too.
struct PipelineParams {
    SamOptions sam;
    LocalizationParams loc;
    SegmentationParams seg;
};

/// Whole-image localization state.
struct LocateStage {
    GrayImage hsg;
    std::optional<GrayLevels> levels;  ///< empty when the image has no strata
    Mask rough;                        ///< SAM nucleus mask, full frame
    std::vector<CellCandidate> candidates;
};

/// HSG, stepwise averaging, rough mask, candidates. An image without enough
/// gray strata yields no candidates rather than an error.
LocateStage run_locate(const RgbImage& img, const PipelineParams& p);

struct CellRecord {
    CellCandidate candidate;
    std::optional<CellSegmentation> seg;  ///< patch coordinates (candidate.combined)
    std::optional<FeatureResult> features;
    std::optional<Prediction> prediction;
    std::string error;  ///< set when segmentation or extraction degenerated
};

/// Segmentation and features of one candidate. The nucleus shape is measured
/// again on `rough`, so candidates read back from a ROI file behave the same.
CellRecord process_candidate(const RgbImage& img, const Mask& rough, const CellCandidate& cand,
                             const PipelineParams& p, const DebugSink& sink = {});

/// Every candidate, in candidate order, optionally classified.
std::vector<CellRecord> analyze_image(const RgbImage& img, const PipelineParams& p, const SvmModel* model,
                                      int threads);

/// BMC_THREADS when set and positive, else the hardware concurrency (>= 1).
int configured_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Throws VersionError unless the model speaks the current feature schema.
void check_model_schema(const SvmModel& model);

struct TruthMatch {
    int record = -1;  ///< index into the records, -1 when unmatched
    double nucleus_dice = 0.0;
    double cell_dice = 0.0;
};

/// Greedy one-to-one matching of truth cells (in order) to the records with
/// the best cell Dice; a match needs Dice > 0.
std::vector<TruthMatch> match_truth(const std::vector<CellRecord>& records, const GroundTruth& truth);

/// Full-frame masks of a segmented record.
Mask record_cell_mask(const CellRecord& r, int width, int height);
Mask record_nucleus_mask(const CellRecord& r, int width, int height);

struct DatasetOptions {
    int per_class = 200;
    std::uint64_t seed = 1;
    double train_fraction = 0.8;
    PipelineParams params;
    int threads = 1;
};

struct DatasetEntry {
    CellClass cls = CellClass::MBE;
    int index = 0;
    std::uint64_t seed = 0;
    bool train = true;
};

struct Dataset {
    std::vector<FeatureRow> train;
    std::vector<FeatureRow> test;
    std::vector<DatasetEntry> kept;            ///< parallel to train then test
    std::vector<std::string> skipped;          ///< "CLASS#index: reason"
    int generated = 0;
};

/// One single-cell scene per (class, index); scene index i < round(f * n)
/// goes to train. Features come from the full pipeline on the rendered
/// scene, matched to the truth cell. Failing scenes are logged and skipped.
Dataset generate_dataset(const DatasetOptions& opt);

}  // namespace bmc
