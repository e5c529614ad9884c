#include "bmc/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "bmc/color.hpp"
#include "bmc/error.hpp"

namespace bmc {

LocateStage run_locate(const RgbImage& img, const PipelineParams& p) {
    LocateStage st;
    st.hsg = hsg_transform(img, p.seg.hsg);
    st.rough = Mask(img.width(), img.height());
    try {
        st.levels = sam_levels(st.hsg, p.sam).final_levels;
    } catch (const DegenerateError&) {
        return st;
    }
    st.rough = sam_mask(st.hsg, *st.levels);
    st.candidates = locate_cells(st.rough, p.loc);
    return st;
}

CellRecord process_candidate(const RgbImage& img, const Mask& rough, const CellCandidate& cand,
                             const PipelineParams& p, const DebugSink& sink) {
    CellRecord rec;
    rec.candidate = cand;
    try {
        rec.candidate.shape = measure_nucleus(rough, cand.nucleus, p.loc);
        const Roi& box = cand.combined;
        const RgbImage patch = crop(img, box);
        const Mask coarse = crop(coarse_nucleus_mask(rough, cand.nucleus, p.loc), box);
        rec.seg = segment_cell(patch, coarse, rec.candidate.shape.equivalent_radius, p.seg, sink);
        rec.features = extract_features(patch, rec.seg->nucleus, rec.seg->cell);
    } catch (const DegenerateError& e) {
        rec.error = e.what();
    }
    return rec;
}

int configured_threads() {
    if (const char* env = std::getenv("BMC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<int>(std::min<long>(v, 256));
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first) first = std::current_exception();
                next = n;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

void check_model_schema(const SvmModel& model) {
    if (model.feature_schema != kFeatureSchema || model.dim() != static_cast<std::size_t>(kFeatureCount))
        throw VersionError("model feature schema '" + model.feature_schema + "' does not match '" +
                           std::string(kFeatureSchema) + "'");
}

std::vector<CellRecord> analyze_image(const RgbImage& img, const PipelineParams& p, const SvmModel* model,
                                      int threads) {
    if (model) check_model_schema(*model);
    const LocateStage st = run_locate(img, p);
    std::vector<CellRecord> out(st.candidates.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = process_candidate(img, st.rough, st.candidates[i], p);
        if (model && out[i].features) out[i].prediction = svm_predict(*model, out[i].features->features);
    });
    return out;
}

Mask record_cell_mask(const CellRecord& r, int width, int height) {
    if (!r.seg) return Mask(width, height);
    return paste(r.seg->cell, r.candidate.combined, width, height);
}

Mask record_nucleus_mask(const CellRecord& r, int width, int height) {
    if (!r.seg) return Mask(width, height);
    return paste(r.seg->nucleus, r.candidate.combined, width, height);
}

std::vector<TruthMatch> match_truth(const std::vector<CellRecord>& records, const GroundTruth& truth) {
    const int W = truth.rbc.width(), H = truth.rbc.height();
    std::vector<Mask> cells, nuclei;
    for (const CellRecord& r : records) {
        cells.push_back(record_cell_mask(r, W, H));
        nuclei.push_back(record_nucleus_mask(r, W, H));
    }
    std::vector<bool> used(records.size(), false);
    std::vector<TruthMatch> out;
    for (const TruthCell& t : truth.cells) {
        TruthMatch best;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (used[i] || !records[i].seg) continue;
            const double d = dice(cells[i], t.cell);
            if (d > best.cell_dice) {
                best.record = static_cast<int>(i);
                best.cell_dice = d;
            }
        }
        if (best.record >= 0) {
            used[static_cast<std::size_t>(best.record)] = true;
            best.nucleus_dice = dice(nuclei[static_cast<std::size_t>(best.record)], t.nucleus);
        }
        out.push_back(best);
    }
    return out;
}

Dataset generate_dataset(const DatasetOptions& opt) {
    if (opt.per_class < 1) throw SpecError("dataset needs at least one scene per class");
    const int n = opt.per_class;
    const int n_train = static_cast<int>(std::lround(opt.train_fraction * n));
    struct Job {
        DatasetEntry entry;
        std::optional<FeatureRow> row;
        std::string reason;
    };
    std::vector<Job> jobs;
    for (CellClass c : kAllClasses)
        for (int i = 0; i < n; ++i) {
            Job j;
            j.entry.cls = c;
            j.entry.index = i;
            j.entry.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(c) + 1, static_cast<std::uint64_t>(i));
            j.entry.train = i < n_train;
            jobs.push_back(j);
        }

    parallel_for(jobs.size(), opt.threads, [&](std::size_t k) {
        Job& j = jobs[k];
        try {
            const Scene scene = generate_scene(single_cell_scene(j.entry.cls, j.entry.seed));
            const std::vector<CellRecord> recs = analyze_image(scene.image, opt.params, nullptr, 1);
            const std::vector<TruthMatch> m = match_truth(recs, scene.truth);
            if (m.empty() || m[0].record < 0) {
                j.reason = recs.empty() ? "no candidate" : "no candidate overlaps the cell";
                return;
            }
            const CellRecord& r = recs[static_cast<std::size_t>(m[0].record)];
            if (!r.features) {
                j.reason = r.error.empty() ? "no features" : r.error;
                return;
            }
            j.row = FeatureRow{r.features->features, j.entry.cls};
        } catch (const Error& e) {
            j.reason = e.what();
        }
    });

    Dataset ds;
    ds.generated = static_cast<int>(jobs.size());
    std::vector<DatasetEntry> train_kept, test_kept;
    for (const Job& j : jobs) {
        if (!j.row) {
            ds.skipped.push_back(std::string(to_string(j.entry.cls)) + "#" + std::to_string(j.entry.index) + ": " +
                                 j.reason);
            continue;
        }
        if (j.entry.train) {
            ds.train.push_back(*j.row);
            train_kept.push_back(j.entry);
        } else {
            ds.test.push_back(*j.row);
            test_kept.push_back(j.entry);
        }
    }
    ds.kept = train_kept;
    ds.kept.insert(ds.kept.end(), test_kept.begin(), test_kept.end());
    return ds;
}

}  // namespace bmc
