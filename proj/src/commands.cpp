#include "bmc/commands.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bmc/error.hpp"
#include "bmc/pipeline.hpp"
#include "bmc/pnm.hpp"

namespace bmc {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string digest_hex(const void* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string file_digest(const fs::path& p) {
    const Bytes b = read_file(p);
    return digest_hex(b.data(), b.size());
}

ojson roi_json(const Roi& r) { return ojson::array({r.x0, r.y0, r.x1, r.y1}); }

// Flags shared by every command that runs the image pipeline.
struct PipelineFlags {
    double w1 = 0.4, w2 = 0.6, w3 = 1.0, kappa = 100.0;
    double gamma = 0.5;
    double t1 = 0.46, t2 = 0.85;
    std::string lambda = "auto";
    int grow_tolerance = 12;
    long long min_nucleus_area = 30;
    bool sam_include_zero = false;
    bool split_ascending = false;

    void attach(CLI::App* app) {
        app->add_option("--w1", w1, "HSG hue weight")->capture_default_str();
        app->add_option("--w2", w2, "HSG saturation weight")->capture_default_str();
        app->add_option("--w3", w3, "HSG green weight")->capture_default_str();
        app->add_option("--kappa", kappa, "HSG output scale")->capture_default_str();
        app->add_option("--gamma-thresh", gamma, "nucleus threshold weight")->capture_default_str();
        app->add_option("--t1", t1, "circularity of the widest search band")->capture_default_str();
        app->add_option("--t2", t2, "circularity of round nuclei")->capture_default_str();
        app->add_option("--lambda", lambda, "BSG blend, or auto")->capture_default_str();
        app->add_option("--grow-tolerance", grow_tolerance, "region growing tolerance")->capture_default_str();
        app->add_option("--min-nucleus-area", min_nucleus_area, "smallest nucleus component")->capture_default_str();
        app->add_flag("--sam-include-zero", sam_include_zero, "let zero pixels enter the first averaging round");
        app->add_flag("--split-ascending", split_ascending, "try pole pairs shortest first");
    }

    PipelineParams params() const {
        PipelineParams p;
        p.seg.hsg = {w1, w2, w3, kappa};
        p.seg.gamma = gamma;
        p.loc.t1 = t1;
        p.loc.t2 = t2;
        p.loc.min_nucleus_area = min_nucleus_area;
        p.seg.min_nucleus_area = min_nucleus_area;
        p.seg.grow_tolerance = grow_tolerance;
        p.seg.split_descending = !split_ascending;
        p.sam.ignore_zero = !sam_include_zero;
        if (lambda != "auto") {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(lambda, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != lambda.size() || v < 0.0 || v > 1.0)
                throw SpecError("--lambda must be auto or a number in [0, 1]");
            p.seg.lambda = v;
        }
        return p;
    }
};

ojson params_json(const PipelineParams& p) {
    ojson j;
    j["w1"] = p.seg.hsg.w1;
    j["w2"] = p.seg.hsg.w2;
    j["w3"] = p.seg.hsg.w3;
    j["kappa"] = p.seg.hsg.scale;
    j["sam_ignore_zero"] = p.sam.ignore_zero;
    j["sam_update"] = p.sam.update == SamUpdate::Midpoint ? "midpoint" : "literal";
    j["gamma"] = p.seg.gamma;
    j["t1"] = p.loc.t1;
    j["t2"] = p.loc.t2;
    j["min_nucleus_area"] = p.loc.min_nucleus_area;
    j["lambda"] = p.seg.lambda ? ojson(*p.seg.lambda) : ojson("auto");
    j["nwig_min_area"] = p.seg.nwig_min_area;
    j["particle_min_area"] = p.seg.particle_min_area;
    j["consistency_count"] = p.seg.consistency_count;
    j["grow_tolerance"] = p.seg.grow_tolerance;
    j["circle_seeds"] = p.seg.circle_seeds;
    j["smoothing_window"] = p.seg.smoothing_window;
    j["pole_prominence"] = p.seg.pole_prominence;
    j["defect_min_depth"] = p.seg.defect_min_depth;
    j["defect_rel_depth"] = p.seg.defect_rel_depth;
    j["split_order"] = p.seg.split_descending ? "descending" : "ascending";
    return j;
}

struct SvmFlags {
    double C = 10.0, gamma = 0.09;
    int max_iter = 1000;
    double tolerance = 1e-3;
    std::uint64_t seed = 0;

    void attach(CLI::App* app) {
        app->add_option("--svm-c", C, "penalty C")->capture_default_str();
        app->add_option("--svm-gamma", gamma, "RBF gamma")->capture_default_str();
        app->add_option("--svm-max-iter", max_iter, "SMO passes limit")->capture_default_str();
        app->add_option("--svm-tolerance", tolerance, "KKT stopping gap")->capture_default_str();
        app->add_option("--seed", seed, "recorded training seed")->capture_default_str();
    }
    SvmParams params() const {
        if (!(C > 0) || !(gamma > 0) || max_iter < 1 || !(tolerance > 0))
            throw SpecError("SVM parameters must be positive");
        SvmParams p;
        p.C = C;
        p.gamma = gamma;
        p.max_iter = max_iter;
        p.tolerance = tolerance;
        p.seed = seed;
        return p;
    }
};

class Timer {
public:
    void mark(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        stages_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
    }
    ojson json() const {
        ojson j;
        for (const auto& [k, v] : stages_) j[k] = v;
        return j;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    std::map<std::string, double> stages_;
};

void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_text_file(path, text);
}

std::string read_text(const fs::path& p) {
    const Bytes b = read_file(p);
    return std::string(b.begin(), b.end());
}

// --- overlay -----------------------------------------------------------

// 5x7 glyphs, one row per entry, bit 4 the leftmost column.
const std::map<char, std::array<std::uint8_t, 7>>& glyphs() {
    static const std::map<char, std::array<std::uint8_t, 7>> g{
        {'B', {0x1e, 0x11, 0x11, 0x1e, 0x11, 0x11, 0x1e}}, {'C', {0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e}},
        {'E', {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f}}, {'G', {0x0e, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0f}},
        {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1f}}, {'M', {0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11}},
        {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}}, {'O', {0x0e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e}},
        {'S', {0x0f, 0x10, 0x10, 0x0e, 0x01, 0x01, 0x1e}}, {'T', {0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'?', {0x0e, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}},
    };
    return g;
}

Rgb class_color(std::optional<CellClass> c) {
    if (!c) return {128, 128, 128};
    switch (*c) {
    case CellClass::NSTG: return {220, 20, 20};
    case CellClass::NSBG: return {20, 150, 20};
    case CellClass::MBE: return {20, 20, 220};
    case CellClass::MLS: return {210, 120, 0};
    case CellClass::OCS: return {150, 0, 150};
    }
    return {0, 0, 0};
}

void draw_box(RgbImage& img, const Roi& r, Rgb c) {
    for (int t = 0; t < 2; ++t) {
        for (int x = r.x0; x <= r.x1; ++x)
            for (int y : {r.y0 + t, r.y1 - t})
                if (img.in_bounds(x, y)) img.set(x, y, c);
        for (int y = r.y0; y <= r.y1; ++y)
            for (int x : {r.x0 + t, r.x1 - t})
                if (img.in_bounds(x, y)) img.set(x, y, c);
    }
}

void draw_text(RgbImage& img, int x, int y, const std::string& s, Rgb c) {
    for (char ch : s) {
        const auto it = glyphs().find(ch);
        if (it != glyphs().end())
            for (int row = 0; row < 7; ++row)
                for (int col = 0; col < 5; ++col)
                    if (it->second[row] & (0x10 >> col) && img.in_bounds(x + col, y + row)) img.set(x + col, y + row, c);
        x += 6;
    }
}

RgbImage overlay(const RgbImage& img, const std::vector<CellRecord>& recs) {
    RgbImage out = img;
    for (const CellRecord& r : recs) {
        std::optional<CellClass> label;
        if (r.prediction) label = r.prediction->label;
        const Rgb c = class_color(label);
        draw_box(out, r.candidate.combined, c);
        draw_text(out, r.candidate.combined.x0 + 3, r.candidate.combined.y0 + 3,
                  label ? std::string(to_string(*label)) : "?", c);
    }
    return out;
}

// --- commands ----------------------------------------------------------

SvmModel read_model(const std::string& path) {
    SvmModel m = load_model(read_text(path));
    check_model_schema(m);
    return m;
}

int cmd_detect(const std::string& image, const std::string& model_path, const PipelineParams& p,
               const std::string& out_path, const std::string& overlay_path, const std::string& features_path,
               bool timings, std::ostream& out) {
    Timer timer;
    const SvmModel model = read_model(model_path);
    const RgbImage img = load_ppm(image);
    timer.mark("load");
    const LocateStage st = run_locate(img, p);
    timer.mark("locate");
    std::vector<CellRecord> recs(st.candidates.size());
    parallel_for(recs.size(), configured_threads(),
                 [&](std::size_t i) { recs[i] = process_candidate(img, st.rough, st.candidates[i], p); });
    timer.mark("segment_features");
    for (CellRecord& r : recs)
        if (r.features) r.prediction = svm_predict(model, r.features->features);
    timer.mark("classify");

    ojson j;
    j["tool"] = "bmc";
    j["version"] = kToolVersion;
    j["command"] = "detect";
    j["image"] = {{"path", image}, {"width", img.width()}, {"height", img.height()}, {"digest", file_digest(image)}};
    j["model"] = {{"path", model_path},
                  {"digest", file_digest(model_path)},
                  {"feature_schema", model.feature_schema},
                  {"dataset_digest", model.dataset_digest}};
    j["params"] = params_json(p);
    std::array<int, kClassCount> counts{};
    ojson cells = ojson::array(), rejected = ojson::array();
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const CellRecord& r = recs[i];
        if (!r.prediction) {
            rejected.push_back({{"id", i}, {"roi", roi_json(r.candidate.combined)}, {"reason", r.error}});
            continue;
        }
        ++counts[static_cast<int>(r.prediction->label)];
        ojson votes, margins;
        for (CellClass c : kAllClasses) {
            votes[std::string(to_string(c))] = r.prediction->votes[static_cast<int>(c)];
            margins[std::string(to_string(c))] = r.prediction->margins[static_cast<int>(c)];
        }
        std::vector<std::string> flags = r.seg->flags;
        flags.insert(flags.end(), r.features->quality_flags.begin(), r.features->quality_flags.end());
        cells.push_back({{"id", i},
                         {"roi", roi_json(r.candidate.combined)},
                         {"nucleus_roi", roi_json(r.candidate.nucleus)},
                         {"label", std::string(to_string(r.prediction->label))},
                         {"votes", votes},
                         {"margins", margins},
                         {"lambda", r.seg->lambda},
                         {"cuts", r.seg->cuts.size()},
                         {"quality_flags", flags}});
        rows.push_back({r.features->features, std::nullopt});
    }
    int total = 0;
    ojson cj;
    for (CellClass c : kAllClasses) {
        cj[std::string(to_string(c))] = counts[static_cast<int>(c)];
        total += counts[static_cast<int>(c)];
    }
    j["total"] = total;
    j["counts"] = cj;
    j["cells"] = cells;
    j["rejected"] = rejected;
    if (!overlay_path.empty()) save_ppm(overlay_path, overlay(img, recs));
    if (!features_path.empty()) write_text_file(features_path, write_feature_csv(rows));
    timer.mark("write");
    if (timings) j["timings_ms"] = timer.json();
    emit(out, out_path, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_locate(const std::string& image, const PipelineParams& p, const std::string& out_path, std::ostream& out) {
    const RgbImage img = load_ppm(image);
    const LocateStage st = run_locate(img, p);
    emit(out, out_path, write_roi_csv(st.candidates));
    return kExitOk;
}

std::string cell_file(const fs::path& dir, std::size_t i, const std::string& what) {
    return (dir / ("cell" + std::to_string(i) + "." + what + ".pgm")).string();
}

int cmd_segment(const std::string& image, const std::string& rois_path, const PipelineParams& p,
                const std::string& out_dir, bool debug_dump, std::ostream& out) {
    const RgbImage img = load_ppm(image);
    const std::vector<CellCandidate> cands = read_roi_csv(read_text(rois_path));
    const LocateStage st = run_locate(img, p);
    fs::create_directories(out_dir);
    std::vector<CellRecord> recs(cands.size());
    parallel_for(recs.size(), configured_threads(), [&](std::size_t i) {
        const Roi& r = cands[i].combined;
        if (r.x0 < 0 || r.y0 < 0 || r.x1 >= img.width() || r.y1 >= img.height())
            throw FormatError("roi " + std::to_string(i) + " lies outside the image", 0);
        DebugSink sink;
        if (debug_dump)
            sink = [&, i](const std::string& stage, const GrayImage& g) {
                save_pgm(cell_file(fs::path(out_dir) / "debug", i, stage), g);
            };
        if (debug_dump) fs::create_directories(fs::path(out_dir) / "debug");
        recs[i] = process_candidate(img, st.rough, cands[i], p, sink);
    });
    ojson cells = ojson::array();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const CellRecord& r = recs[i];
        ojson e{{"id", i}, {"roi", roi_json(r.candidate.combined)}};
        if (r.seg) {
            save_mask(cell_file(out_dir, i, "nucleus"), r.seg->nucleus);
            save_mask(cell_file(out_dir, i, "cell"), r.seg->cell);
            e["lambda"] = r.seg->lambda;
            e["particle_count"] = r.seg->particle_count;
            e["poles"] = r.seg->poles.size();
            e["cuts"] = r.seg->cuts.size();
            e["flags"] = r.seg->flags;
        } else {
            e["error"] = r.error;
        }
        cells.push_back(e);
    }
    ojson j{{"tool", "bmc"}, {"version", kToolVersion}, {"command", "segment"},
            {"image_digest", file_digest(image)}, {"params", params_json(p)}, {"cells", cells}};
    write_text_file(fs::path(out_dir) / "segments.json", j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_features(const std::string& image, const std::string& rois_path, const std::string& masks_dir,
                 const std::string& label, const std::string& out_path, std::ostream& out) {
    const RgbImage img = load_ppm(image);
    const std::vector<CellCandidate> cands = read_roi_csv(read_text(rois_path));
    std::optional<CellClass> cls;
    if (!label.empty()) cls = parse_class(label);
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const std::string nf = cell_file(masks_dir, i, "nucleus"), cf = cell_file(masks_dir, i, "cell");
        if (!fs::exists(nf) || !fs::exists(cf)) continue;  // segmentation failed for this cell
        const Roi& r = cands[i].combined;
        const Mask nucleus = load_mask(nf), cell = load_mask(cf);
        if (nucleus.width() != r.width() || nucleus.height() != r.height() || cell.width() != r.width() ||
            cell.height() != r.height())
            throw FormatError("masks of cell " + std::to_string(i) + " do not match its roi", 0);
        const RgbImage patch = crop(img, r);
        try {
            rows.push_back({extract_features(patch, nucleus, cell).features, cls});
        } catch (const DegenerateError&) {
            continue;
        }
    }
    emit(out, out_path, write_feature_csv(rows));
    return kExitOk;
}

int cmd_train(const std::string& csv, const SvmParams& sp, const std::string& model_out,
              const std::string& manifest_out, std::ostream& out) {
    const std::vector<FeatureRow> rows = read_feature_csv(read_text(csv));
    const SvmModel m = svm_train(rows, sp);
    const std::string text = save_model(m);
    write_text_file(model_out, text);
    ojson machines = ojson::array();
    for (const PairMachine& pm : m.machines)
        machines.push_back({{"pair", {std::string(to_string(m.classes[pm.first])), std::string(to_string(m.classes[pm.second]))}},
                            {"support_vectors", pm.sv.size()},
                            {"iterations", pm.diagnostics.iterations},
                            {"converged", pm.diagnostics.converged},
                            {"kkt_gap", pm.diagnostics.kkt_gap}});
    ojson cls = ojson::array();
    for (CellClass c : m.classes) cls.push_back(std::string(to_string(c)));
    ojson j{{"tool", "bmc"},
            {"version", kToolVersion},
            {"command", "train"},
            {"input", {{"path", csv}, {"digest", file_digest(csv)}, {"rows", rows.size()}}},
            {"model", {{"path", model_out}, {"digest", digest_hex(text.data(), text.size())}}},
            {"feature_schema", m.feature_schema},
            {"classes", cls},
            {"params",
             {{"kernel", "rbf"}, {"C", sp.C}, {"gamma", sp.gamma}, {"coef0", sp.coef0}, {"degree", sp.degree},
              {"nu", sp.nu}, {"p", sp.p}, {"max_iter", sp.max_iter}, {"tolerance", sp.tolerance}, {"seed", sp.seed}}},
            {"dataset_digest", m.dataset_digest},
            {"support_vectors", m.support_vectors.size()},
            {"machines", machines}};
    if (!manifest_out.empty()) write_text_file(manifest_out, j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& csv, const std::string& out_path,
                std::ostream& out) {
    const SvmModel m = read_model(model_path);
    const std::vector<FeatureRow> rows = read_feature_csv(read_text(csv));
    std::ostringstream os;
    os << "row,label";
    for (CellClass c : kAllClasses) os << ",votes_" << to_string(c);
    os << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Prediction pr = svm_predict(m, rows[i].features);
        os << i << ',' << to_string(pr.label);
        for (int v : pr.votes) os << ',' << v;
        os << "\n";
    }
    emit(out, out_path, os.str());
    return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& csv, const std::string& out_path, std::ostream& out) {
    const SvmModel m = read_model(model_path);
    const std::vector<FeatureRow> rows = read_feature_csv(read_text(csv));
    emit(out, out_path, eval_report_json(evaluate(m, rows), m));
    return kExitOk;
}

void write_scene(const fs::path& dir, const std::string& stem, const Scene& s, std::uint64_t seed) {
    save_ppm(dir / (stem + ".ppm"), s.image);
    for (std::size_t i = 0; i < s.truth.cells.size(); ++i) {
        save_mask(dir / (stem + ".cell" + std::to_string(i) + ".nucleus.pgm"), s.truth.cells[i].nucleus);
        save_mask(dir / (stem + ".cell" + std::to_string(i) + ".cell.pgm"), s.truth.cells[i].cell);
    }
    write_text_file(dir / (stem + ".truth.json"), ground_truth_json(s.truth, seed, stem));
}

struct SynthFlags {
    std::string out_dir;
    int per_class = 200;
    std::uint64_t seed = 1;
    double train_fraction = 0.8;
    std::string fixture;
    std::string scene_class;
    int multi = 0;
    int scenes_per_class = 0;
};

int cmd_synth(const SynthFlags& f, const PipelineParams& p, bool timings, std::ostream& out) {
    fs::create_directories(f.out_dir);
    const fs::path dir(f.out_dir);
    ojson j{{"tool", "bmc"}, {"version", kToolVersion}, {"command", "synth"}, {"seed", f.seed}};
    if (!f.fixture.empty()) {
        const auto kind = parse_fixture(f.fixture);
        if (!kind) throw SpecError("unknown fixture '" + f.fixture + "' (two_disks, three_chain, cell_rbc)");
        write_scene(dir, f.fixture, adhesion_fixture(*kind, f.seed), f.seed);
        j["fixture"] = f.fixture;
        j["files"] = {f.fixture + ".ppm", f.fixture + ".truth.json"};
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    if (!f.scene_class.empty()) {
        const CellClass c = parse_class(f.scene_class);
        write_scene(dir, "scene", generate_scene(single_cell_scene(c, f.seed)), f.seed);
        j["class"] = f.scene_class;
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    if (f.multi > 0) {
        std::vector<CellClass> classes;
        for (int i = 0; i < f.multi; ++i) classes.push_back(kAllClasses[static_cast<std::size_t>(i % kClassCount)]);
        write_scene(dir, "scene", generate_scene(multi_cell_scene(classes, f.seed)), f.seed);
        j["cells"] = f.multi;
        out << j.dump(2) << "\n";
        return kExitOk;
    }

    Timer timer;
    DatasetOptions opt;
    opt.per_class = f.per_class;
    opt.seed = f.seed;
    opt.train_fraction = f.train_fraction;
    opt.params = p;
    opt.threads = configured_threads();
    const Dataset ds = generate_dataset(opt);
    timer.mark("dataset");
    write_text_file(dir / "train.csv", write_feature_csv(ds.train));
    write_text_file(dir / "test.csv", write_feature_csv(ds.test));
    if (f.scenes_per_class > 0) {
        fs::create_directories(dir / "scenes");
        for (CellClass c : kAllClasses)
            for (int i = 0; i < std::min(f.scenes_per_class, f.per_class); ++i) {
                const std::uint64_t s = derive_seed(f.seed, static_cast<std::uint64_t>(c) + 1, static_cast<std::uint64_t>(i));
                write_scene(dir / "scenes", std::string(to_string(c)) + "_" + std::to_string(i),
                            generate_scene(single_cell_scene(c, s)), s);
            }
    }
    timer.mark("write");
    j["per_class"] = f.per_class;
    j["train_fraction"] = f.train_fraction;
    j["params"] = params_json(p);
    j["generated"] = ds.generated;
    j["train_rows"] = ds.train.size();
    j["test_rows"] = ds.test.size();
    j["skipped_count"] = ds.skipped.size();
    j["skipped"] = ds.skipped;
    if (timings) j["timings_ms"] = timer.json();
    write_text_file(dir / "manifest.json", j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return kExitOk;
}

int error_envelope(std::ostream& out, const std::string& code, const std::string& message, int exit_code) {
    ojson j{{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}};
    out << j.dump(2) << "\n";
    return exit_code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bone marrow cell detection, segmentation and classification", "bmc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    std::function<int()> action;
    bool timings = false;

    PipelineFlags pf;
    std::string image, model, out_path, overlay_path, features_path, rois, masks, out_dir, label, csv, manifest;
    bool debug_dump = false;
    SvmFlags sf;
    SynthFlags syn;

    auto* detect = app.add_subcommand("detect", "locate, segment, describe and classify every cell");
    detect->add_option("image", image, "input PPM")->required();
    detect->add_option("--model", model, "trained .bmcsvm model")->required();
    detect->add_option("--out", out_path, "report path (default stdout)");
    detect->add_option("--overlay", overlay_path, "annotated PPM");
    detect->add_option("--features-out", features_path, "feature CSV of the classified cells");
    detect->add_flag("--timings", timings, "add per-stage timings to the report");
    pf.attach(detect);
    detect->callback([&] {
        action = [&] {
            return cmd_detect(image, model, pf.params(), out_path, overlay_path, features_path, timings, out);
        };
    });

    auto* locate = app.add_subcommand("locate", "write the ROI CSV of an image");
    locate->add_option("image", image, "input PPM")->required();
    locate->add_option("--out", out_path, "ROI CSV path (default stdout)");
    pf.attach(locate);
    locate->callback([&] { action = [&] { return cmd_locate(image, pf.params(), out_path, out); }; });

    auto* segment = app.add_subcommand("segment", "segment the cells listed in a ROI CSV");
    segment->add_option("image", image, "input PPM")->required();
    segment->add_option("--rois", rois, "ROI CSV from locate")->required();
    segment->add_option("--out-dir", out_dir, "directory for the mask PGMs")->required();
    segment->add_flag("--debug-dump", debug_dump, "also write every intermediate stage");
    pf.attach(segment);
    segment->callback([&] {
        action = [&] { return cmd_segment(image, rois, pf.params(), out_dir, debug_dump, out); };
    });

    auto* features = app.add_subcommand("features", "feature CSV from an image, its ROIs and masks");
    features->add_option("image", image, "input PPM")->required();
    features->add_option("--rois", rois, "ROI CSV from locate")->required();
    features->add_option("--masks", masks, "directory written by segment")->required();
    features->add_option("--label", label, "class mnemonic for every row");
    features->add_option("--out", out_path, "CSV path (default stdout)");
    features->callback([&] { action = [&] { return cmd_features(image, rois, masks, label, out_path, out); }; });

    auto* train = app.add_subcommand("train", "train the classifier on a labeled feature CSV");
    train->add_option("features", csv, "labeled feature CSV")->required();
    train->add_option("--out", out_path, "model path")->required();
    train->add_option("--manifest", manifest, "training manifest JSON");
    sf.attach(train);
    train->callback([&] { action = [&] { return cmd_train(csv, sf.params(), out_path, manifest, out); }; });

    auto* predict = app.add_subcommand("predict", "label every row of a feature CSV");
    predict->add_option("--model", model, "trained model")->required();
    predict->add_option("features", csv, "feature CSV")->required();
    predict->add_option("--out", out_path, "CSV path (default stdout)");
    predict->callback([&] { action = [&] { return cmd_predict(model, csv, out_path, out); }; });

    auto* eval = app.add_subcommand("eval", "recall per class and their mean on a labeled CSV");
    eval->add_option("--model", model, "trained model")->required();
    eval->add_option("features", csv, "labeled feature CSV")->required();
    eval->add_option("--out", out_path, "report path (default stdout)");
    eval->callback([&] { action = [&] { return cmd_eval(model, csv, out_path, out); }; });

    auto* synth = app.add_subcommand("synth", "synthetic scenes, fixtures and labeled datasets");
    synth->add_option("--out-dir", syn.out_dir, "output directory")->required();
    synth->add_option("--per-class", syn.per_class, "scenes per class")->capture_default_str();
    synth->add_option("--seed", syn.seed, "base seed")->capture_default_str();
    synth->add_option("--train-fraction", syn.train_fraction, "share of scenes for training")->capture_default_str();
    synth->add_option("--fixture", syn.fixture, "two_disks, three_chain or cell_rbc");
    synth->add_option("--scene", syn.scene_class, "one single-cell scene of this class");
    synth->add_option("--multi", syn.multi, "one scene with this many cells");
    synth->add_option("--scenes-per-class", syn.scenes_per_class, "also write the first N scenes of each class");
    synth->add_flag("--timings", timings, "add timings to the manifest");
    pf.attach(synth);
    synth->callback([&] { action = [&] { return cmd_synth(syn, pf.params(), timings, out); }; });

    std::vector<std::string> argv_store{"bmc"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {  // --help, --version
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return error_envelope(out, "usage", e.what(), kExitUsage);
    }
    try {
        return action ? action() : kExitUsage;
    } catch (const FormatError& e) {
        return error_envelope(out, e.code(), e.what(), kExitFormat);
    } catch (const VersionError& e) {
        return error_envelope(out, e.code(), e.what(), kExitVersion);
    } catch (const DegenerateError& e) {
        return error_envelope(out, e.code(), e.what(), kExitDegenerate);
    } catch (const TrainingError& e) {
        return error_envelope(out, e.code(), e.what(), kExitTraining);
    } catch (const SpecError& e) {
        return error_envelope(out, e.code(), e.what(), kExitSpec);
    } catch (const std::exception& e) {
        return error_envelope(out, "io", e.what(), kExitIo);
    }
}

}  // namespace bmc
