#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bmc/features.hpp"

namespace bmc {

/// C-SVC with an RBF kernel. coef0, degree, nu and p are carried for the
/// record only; they do not enter an RBF C-SVC.
struct SvmParams {
    double C = 10.0;
    double gamma = 0.09;
    double coef0 = 1.0;
    double degree = 10.0;
    double nu = 0.5;
    double p = 1.0;
    int max_iter = 1000;  ///< passes over the pair's rows
    double tolerance = 1e-3;
    std::uint64_t seed = 0;
};

struct Sample {
    std::vector<double> x;
    CellClass label = CellClass::NSTG;
};

/// Per-feature affine map of the train range onto [-1, 1].
struct Scaling {
    std::vector<double> min;
    std::vector<double> max;

    static Scaling fit(const std::vector<Sample>& rows);
    /// Constant features map to 0; results clamp to [-1.5, 1.5].
    std::vector<double> apply(const std::vector<double>& x) const;
};

double rbf_kernel(const std::vector<double>& u, const std::vector<double>& v, double gamma);

/// Dual solution of one binary problem, labels y in {+1, -1}.
struct BinarySolution {
    std::vector<double> alpha;
    double rho = 0.0;
    long long iterations = 0;
    double kkt_gap = 0.0;  ///< maximal violating pair gap at exit
    bool converged = false;
    std::vector<double> objective;  ///< per-iteration dual objective when requested
};

/// Second-order working-set SMO. Stops when the maximal violating pair gap
/// drops below `tolerance` or after max_iter * n iterations.
BinarySolution solve_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                            const SvmParams& params, bool record_objective = false);

struct PairMachine {
    int first = 0;   ///< index into SvmModel::classes, the +1 side
    int second = 0;  ///< the -1 side
    double rho = 0.0;
    std::vector<int> sv;        ///< indices into SvmModel::support_vectors
    std::vector<double> coef;   ///< y_i * alpha_i per entry of `sv`
    BinarySolution diagnostics; ///< alpha over the pair's training rows (not persisted)
};

struct SvmModel {
    SvmParams params;
    std::string feature_schema = std::string(kFeatureSchema);
    std::vector<CellClass> classes;  ///< ascending enum order
    Scaling scaling;
    std::vector<std::vector<double>> support_vectors;  ///< scaled
    std::vector<CellClass> sv_label;
    std::vector<PairMachine> machines;  ///< (0,1), (0,2), ... in class order
    std::string dataset_digest;

    std::size_t dim() const { return scaling.min.size(); }
};

/// One-vs-one training. Rows are put in a canonical order first, so the model
/// does not depend on input order. TrainingError on fewer than two classes, a
/// class with a single row, ragged rows or non-finite values.
SvmModel svm_train(std::vector<Sample> rows, const SvmParams& params = {});
SvmModel svm_train(const std::vector<FeatureRow>& rows, const SvmParams& params = {});

struct Prediction {
    CellClass label = CellClass::NSTG;
    std::array<int, kClassCount> votes{};      ///< indexed by CellClass
    std::array<double, kClassCount> margins{}; ///< summed signed decision values
};

/// Majority vote; ties go to the larger summed margin, then class order.
Prediction svm_predict(const SvmModel& model, const std::vector<double>& x);
Prediction svm_predict(const SvmModel& model, const FeatureVector& fv);

/// Decision value of one pair machine on an already scaled vector.
double decision_value(const SvmModel& model, const PairMachine& m, const std::vector<double>& scaled);

struct EvalReport {
    std::array<std::optional<double>, kClassCount> per_class_recall;  ///< empty when the class is absent
    double arr = 0.0;
    std::array<std::array<long long, kClassCount>, kClassCount> confusion{};  ///< [truth][predicted]
    std::vector<std::string> warnings;
};

EvalReport evaluate(const SvmModel& model, const std::vector<FeatureRow>& rows);
EvalReport evaluate_predictions(const std::vector<CellClass>& truth, const std::vector<CellClass>& predicted);

/// JSON text {per_class_recall, arr, confusion, manifest, ...}.
std::string eval_report_json(const EvalReport& r, const SvmModel& model);

std::string save_model(const SvmModel& m);
/// VersionError on an unknown version tag; FormatError on truncated or
/// malformed content.
SvmModel load_model(const std::string& text);

/// Hex FNV-1a digest over the canonical rows.
std::string dataset_digest(const std::vector<Sample>& rows);

}  // namespace bmc
