#include "doctest.h"

#include <algorithm>

#include "bmc/error.hpp"
#include "bmc/svm.hpp"
#include "support.hpp"

using namespace bmc;

namespace {

std::vector<Sample> blobs(Rng& rng, int per_class, int classes, double spread) {
    std::vector<Sample> rows;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i)
            rows.push_back({{c * 3.0 + rng.uniform(-spread, spread), (c % 2) * 2.0 + rng.uniform(-spread, spread)},
                            static_cast<CellClass>(c)});
    return rows;
}

double train_accuracy(const SvmModel& m, const std::vector<Sample>& rows) {
    int ok = 0;
    for (const Sample& s : rows) ok += svm_predict(m, s.x).label == s.label;
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

}  // namespace

TEST_CASE("scaling maps the train range onto [-1, 1]") {
    const Scaling s = Scaling::fit({{{0.0, 5.0}, CellClass::MBE}, {{100.0, 5.0}, CellClass::MLS}});
    CHECK(s.apply({50.0, 5.0}) == std::vector<double>{0.0, 0.0});
    CHECK(s.apply({120.0, 9.0})[0] == doctest::Approx(1.4));
    CHECK(s.apply({900.0, 9.0})[0] == 1.5);
}

TEST_CASE("smo satisfies the optimality conditions") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (int i = 0; i < 40; ++i) {
            const int label = i % 2 ? 1 : -1;
            x.push_back({rng.uniform(-1, 1) + 0.3 * label, rng.uniform(-1, 1)});
            y.push_back(label);
        }
        SvmParams p;
        p.C = trial % 2 ? 1.0 : 10.0;
        p.gamma = 0.5;
        const BinarySolution s = solve_binary(x, y, p, true);
        CHECK(s.converged);
        double sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(s.alpha[i] >= 0.0);
            CHECK(s.alpha[i] <= p.C);
            sum += s.alpha[i] * y[i];
        }
        CHECK(std::abs(sum) < 1e-9);
        CHECK(oracle::kkt_gap(x, y, s.alpha, p.C, p.gamma) <= 1e-3);
        for (std::size_t k = 1; k < s.objective.size(); ++k) CHECK(s.objective[k] <= s.objective[k - 1] + 1e-12);
    }
}

TEST_CASE("separable and xor fixtures are learned exactly") {
    Rng rng(62);
    const auto sep = blobs(rng, 20, 2, 0.5);
    CHECK(train_accuracy(svm_train(sep), sep) == 1.0);
    std::vector<Sample> xo{{{0, 0}, CellClass::MBE}, {{1, 1}, CellClass::MBE}, {{0, 1}, CellClass::MLS},
                           {{1, 0}, CellClass::MLS}};
    SvmParams p;
    p.gamma = 1.0;
    CHECK(train_accuracy(svm_train(xo, p), xo) == 1.0);
    const auto five = blobs(rng, 15, 5, 0.4);
    const SvmModel m = svm_train(five);
    CHECK(train_accuracy(m, five) == 1.0);
    CHECK(m.machines.size() == 10);
    for (const PairMachine& pm : m.machines) {
        CHECK(pm.diagnostics.converged);
        CHECK(pm.diagnostics.kkt_gap <= 1e-3);
        for (double a : pm.diagnostics.alpha) {
            CHECK(a >= 0.0);
            CHECK(a <= m.params.C);
        }
    }
}

TEST_CASE("training rejects bad input") {
    CHECK_THROWS_AS(svm_train(std::vector<Sample>{{{1, 2}, CellClass::MBE}, {{2, 2}, CellClass::MBE}}), TrainingError);
    CHECK_THROWS_AS(svm_train(std::vector<Sample>{{{1, 2}, CellClass::MBE}, {{2, 2}, CellClass::MLS},
                                                   {{3, 2}, CellClass::MLS}}),
                    TrainingError);
    CHECK_THROWS_AS(svm_train(std::vector<Sample>{{{1, 2}, CellClass::MBE}, {{2}, CellClass::MBE},
                                                   {{2, 2}, CellClass::MLS}, {{3, 2}, CellClass::MLS}}),
                    TrainingError);
    CHECK_THROWS_AS(svm_train(std::vector<Sample>{{{1, NAN}, CellClass::MBE}, {{2, 1}, CellClass::MBE},
                                                   {{2, 2}, CellClass::MLS}, {{3, 2}, CellClass::MLS}}),
                    TrainingError);
}

TEST_CASE("model save and load preserve predictions") {
    Rng rng(63);
    const SvmModel m = svm_train(blobs(rng, 12, 5, 1.5));
    const std::string text = save_model(m);
    const SvmModel back = load_model(text);
    CHECK(save_model(back) == text);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> v{rng.uniform(-2, 15), rng.uniform(-2, 4)};
        const Prediction a = svm_predict(m, v), b = svm_predict(back, v);
        CHECK(a.label == b.label);
        CHECK(a.votes == b.votes);
        CHECK(a.margins == b.margins);
    }
    std::string other = text;
    other.replace(0, 9, "bmcsvm-v9");
    CHECK_THROWS_AS(load_model(other), VersionError);
    CHECK_THROWS_AS(load_model(text.substr(0, text.size() / 2)), FormatError);
}

TEST_CASE("hand-built minimal model") {
    const std::string text =
        "bmcsvm-v1\nfeature_schema toy\nkernel rbf\nC 1\ngamma 1\ncoef0 0\ndegree 3\nnu 0.5\np 0.1\nmax_iter 10\n"
        "tolerance 0.001\nseed 0\ndataset_digest none\nclasses MBE MLS\ndim 2\nscale_min 0 0\nscale_max 1 1\n"
        "machines 1\nmachine 0 1 0\nsupport_vectors 2\nMBE,1,-0.5,-0.5\nMLS,-1,0.5,0.5\nend\n";
    const SvmModel m = load_model(text);
    CHECK(svm_predict(m, std::vector<double>{0.1, 0.1}).label == CellClass::MBE);
    CHECK(svm_predict(m, std::vector<double>{0.9, 0.9}).label == CellClass::MLS);
    // The midpoint is a tie on votes and margins; class order decides.
    const Prediction mid = svm_predict(m, std::vector<double>{0.5, 0.5});
    CHECK(mid.label == svm_predict(m, std::vector<double>{0.5, 0.5}).label);
}

TEST_CASE("row order does not change the model") {
    Rng rng(64);
    auto rows = blobs(rng, 10, 3, 0.8);
    const std::string a = save_model(svm_train(rows));
    std::reverse(rows.begin(), rows.end());
    std::rotate(rows.begin(), rows.begin() + 7, rows.end());
    CHECK(save_model(svm_train(rows)) == a);
}

TEST_CASE("support vectors keep their own label") {
    Rng rng(65);
    const auto rows = blobs(rng, 10, 2, 0.3);
    const SvmModel m = svm_train(rows);
    for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
        // Support vectors are stored scaled; undo the map before predicting.
        std::vector<double> raw(m.dim());
        for (std::size_t k = 0; k < m.dim(); ++k)
            raw[k] = m.scaling.min[k] + (m.support_vectors[s][k] + 1.0) / 2.0 * (m.scaling.max[k] - m.scaling.min[k]);
        CHECK(svm_predict(m, raw).label == m.sv_label[s]);
    }
}

TEST_CASE("evaluation arithmetic") {
    std::vector<CellClass> truth, all_ocs;
    for (CellClass c : kAllClasses)
        for (int i = 0; i < 4; ++i) {
            truth.push_back(c);
            all_ocs.push_back(CellClass::OCS);
        }
    const EvalReport perfect = evaluate_predictions(truth, truth);
    CHECK(perfect.arr == 1.0);
    const EvalReport r = evaluate_predictions(truth, all_ocs);
    CHECK(r.arr == doctest::Approx(0.2));
    CHECK(*r.per_class_recall[0] == 0.0);
    CHECK(*r.per_class_recall[4] == 1.0);
    CHECK(r.confusion[0][4] == 4);
    const std::vector<CellClass> partial{CellClass::MBE, CellClass::MBE, CellClass::MLS};
    const EvalReport a = evaluate_predictions(partial, {CellClass::MBE, CellClass::MLS, CellClass::MLS});
    CHECK_FALSE(a.per_class_recall[0].has_value());
    CHECK(a.arr == doctest::Approx(0.75));
    CHECK_FALSE(a.warnings.empty());
}
