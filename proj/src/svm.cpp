#include "bmc/svm.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>

#include "bmc/error.hpp"
#include "json.hpp"

namespace bmc {

Scaling Scaling::fit(const std::vector<Sample>& rows) {
    Scaling s;
    if (rows.empty()) return s;
    const std::size_t d = rows.front().x.size();
    s.min.assign(d, std::numeric_limits<double>::infinity());
    s.max.assign(d, -std::numeric_limits<double>::infinity());
    for (const Sample& r : rows)
        for (std::size_t k = 0; k < d; ++k) {
            s.min[k] = std::min(s.min[k], r.x[k]);
            s.max[k] = std::max(s.max[k], r.x[k]);
        }
    return s;
}

std::vector<double> Scaling::apply(const std::vector<double>& x) const {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t k = 0; k < x.size() && k < min.size(); ++k) {
        if (max[k] == min[k]) continue;
        const double v = 2.0 * (x[k] - min[k]) / (max[k] - min[k]) - 1.0;
        out[k] = std::clamp(v, -1.5, 1.5);
    }
    return out;
}

double rbf_kernel(const std::vector<double>& u, const std::vector<double>& v, double gamma) {
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) d += (u[k] - v[k]) * (u[k] - v[k]);
    return std::exp(-gamma * d);
}

BinarySolution solve_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                            const SvmParams& params, bool record_objective) {
    const std::size_t n = x.size();
    const double C = params.C;
    constexpr double tau = 1e-12;
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) K[i * n + j] = K[j * n + i] = rbf_kernel(x[i], x[j], params.gamma);
    auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K[i * n + j]; };

    BinarySolution s;
    s.alpha.assign(n, 0.0);
    std::vector<double> G(n, -1.0);
    auto& a = s.alpha;
    auto is_up = [&](std::size_t t) { return (y[t] == 1 && a[t] < C) || (y[t] == -1 && a[t] > 0); };
    auto is_low = [&](std::size_t t) { return (y[t] == 1 && a[t] > 0) || (y[t] == -1 && a[t] < C); };
    auto objective = [&] {
        double o = 0.0;
        for (std::size_t t = 0; t < n; ++t) o += a[t] * (G[t] - 1.0);
        return 0.5 * o;
    };

    const long long limit = static_cast<long long>(params.max_iter) * static_cast<long long>(std::max<std::size_t>(n, 1));
    while (true) {
        // Working set: i maximizes -y G over I_up; j minimizes the
        // second-order gain over I_low.
        double gmax = -std::numeric_limits<double>::infinity(), gmax2 = -std::numeric_limits<double>::infinity();
        std::ptrdiff_t i = -1;
        for (std::size_t t = 0; t < n; ++t)
            if (is_up(t) && -y[t] * G[t] >= gmax) {
                if (-y[t] * G[t] > gmax || i < 0) i = static_cast<std::ptrdiff_t>(t);
                gmax = -y[t] * G[t];
            }
        std::ptrdiff_t j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (!is_low(t)) continue;
            gmax2 = std::max(gmax2, static_cast<double>(y[t]) * G[t]);
            if (i < 0) continue;
            const double diff = gmax + y[t] * G[t];
            if (diff <= 0) continue;
            const std::size_t ii = static_cast<std::size_t>(i);
            double quad = K[ii * n + ii] + K[t * n + t] - 2.0 * K[ii * n + t];
            if (quad <= 0) quad = tau;
            const double gain = -(diff * diff) / quad;
            if (gain < best) {
                best = gain;
                j = static_cast<std::ptrdiff_t>(t);
            }
        }
        s.kkt_gap = (i < 0 || gmax2 == -std::numeric_limits<double>::infinity()) ? 0.0 : gmax + gmax2;
        if (i < 0 || j < 0 || s.kkt_gap < params.tolerance) {
            s.converged = true;
            break;
        }
        if (s.iterations >= limit) break;
        ++s.iterations;

        const std::size_t ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
        const double ai = a[ii], aj = a[jj];
        if (y[ii] != y[jj]) {
            double quad = K[ii * n + ii] + K[jj * n + jj] - 2.0 * K[ii * n + jj];
            if (quad <= 0) quad = tau;
            const double delta = (-G[ii] - G[jj]) / quad;
            const double diff = a[ii] - a[jj];
            a[ii] += delta;
            a[jj] += delta;
            if (diff > 0) {
                if (a[jj] < 0) {
                    a[jj] = 0;
                    a[ii] = diff;
                }
            } else if (a[ii] < 0) {
                a[ii] = 0;
                a[jj] = -diff;
            }
            if (diff > 0) {
                if (a[ii] > C) {
                    a[ii] = C;
                    a[jj] = C - diff;
                }
            } else if (a[jj] > C) {
                a[jj] = C;
                a[ii] = C + diff;
            }
        } else {
            double quad = K[ii * n + ii] + K[jj * n + jj] - 2.0 * K[ii * n + jj];
            if (quad <= 0) quad = tau;
            const double delta = (G[ii] - G[jj]) / quad;
            const double sum = a[ii] + a[jj];
            a[ii] -= delta;
            a[jj] += delta;
            if (sum > C) {
                if (a[ii] > C) {
                    a[ii] = C;
                    a[jj] = sum - C;
                }
            } else if (a[jj] < 0) {
                a[jj] = 0;
                a[ii] = sum;
            }
            if (sum > C) {
                if (a[jj] > C) {
                    a[jj] = C;
                    a[ii] = sum - C;
                }
            } else if (a[ii] < 0) {
                a[ii] = 0;
                a[jj] = sum;
            }
        }
        const double dai = a[ii] - ai, daj = a[jj] - aj;
        for (std::size_t t = 0; t < n; ++t) G[t] += Q(t, ii) * dai + Q(t, jj) * daj;
        if (record_objective) s.objective.push_back(objective());
    }

    // Bias: mean of y G over free vectors, else the middle of the feasible range.
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity(), sum = 0.0;
    int free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (a[t] >= C) {
            if (y[t] == -1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (a[t] <= 0) {
            if (y[t] == 1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++free;
            sum += yg;
        }
    }
    s.rho = free > 0 ? sum / free : (ub + lb) / 2.0;
    return s;
}

namespace {

bool sample_less(const Sample& a, const Sample& b) {
    if (a.label != b.label) return a.label < b.label;
    return a.x < b.x;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

}  // namespace

std::string dataset_digest(const std::vector<Sample>& rows) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const Sample& r : rows) {
        const int l = static_cast<int>(r.label);
        mix(&l, sizeof l);
        for (double v : r.x) mix(&v, sizeof v);
    }
    return hex64(h);
}

SvmModel svm_train(std::vector<Sample> rows, const SvmParams& params) {
    if (params.C <= 0 || params.gamma <= 0 || params.max_iter < 1) throw TrainingError("invalid SVM parameters");
    if (rows.empty()) throw TrainingError("no training rows");
    const std::size_t d = rows.front().x.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].x.size() != d) throw TrainingError("row " + std::to_string(i) + " has the wrong length");
        for (double v : rows[i].x)
            if (!std::isfinite(v)) throw TrainingError("row " + std::to_string(i) + " has a non-finite feature");
    }
    std::sort(rows.begin(), rows.end(), sample_less);

    std::array<int, kClassCount> counts{};
    for (const Sample& r : rows) ++counts[static_cast<int>(r.label)];
    SvmModel m;
    m.params = params;
    for (CellClass c : kAllClasses) {
        const int n = counts[static_cast<int>(c)];
        if (n == 0) continue;
        if (n < 2) throw TrainingError("class " + std::string(to_string(c)) + " has a single row");
        m.classes.push_back(c);
    }
    if (m.classes.size() < 2) throw TrainingError("training needs at least two classes");
    if (d != static_cast<std::size_t>(kFeatureCount)) m.feature_schema = "custom-" + std::to_string(d);
    m.dataset_digest = dataset_digest(rows);
    m.scaling = Scaling::fit(rows);
    std::vector<std::vector<double>> scaled;
    scaled.reserve(rows.size());
    for (const Sample& r : rows) scaled.push_back(m.scaling.apply(r.x));

    std::map<std::size_t, int> sv_slot;  // row index -> support vector index
    for (std::size_t a = 0; a < m.classes.size(); ++a)
        for (std::size_t b = a + 1; b < m.classes.size(); ++b) {
            std::vector<std::size_t> idx;
            std::vector<std::vector<double>> x;
            std::vector<int> y;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].label == m.classes[a] || rows[r].label == m.classes[b]) {
                    idx.push_back(r);
                    x.push_back(scaled[r]);
                    y.push_back(rows[r].label == m.classes[a] ? 1 : -1);
                }
            }
            PairMachine pm;
            pm.first = static_cast<int>(a);
            pm.second = static_cast<int>(b);
            pm.diagnostics = solve_binary(x, y, params);
            pm.rho = pm.diagnostics.rho;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (pm.diagnostics.alpha[k] <= 0) continue;
                auto [it, fresh] = sv_slot.emplace(idx[k], static_cast<int>(m.support_vectors.size()));
                if (fresh) {
                    m.support_vectors.push_back(scaled[idx[k]]);
                    m.sv_label.push_back(rows[idx[k]].label);
                }
                pm.sv.push_back(it->second);
                pm.coef.push_back(y[k] * pm.diagnostics.alpha[k]);
            }
            // Ascending support vector order, the order a saved model reads
            // back in, so decision sums add up identically after a reload.
            std::vector<std::size_t> order(pm.sv.size());
            for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
            std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pm.sv[i] < pm.sv[j]; });
            std::vector<int> sv;
            std::vector<double> coef;
            for (std::size_t k : order) {
                sv.push_back(pm.sv[k]);
                coef.push_back(pm.coef[k]);
            }
            pm.sv = std::move(sv);
            pm.coef = std::move(coef);
            m.machines.push_back(std::move(pm));
        }
    return m;
}

SvmModel svm_train(const std::vector<FeatureRow>& rows, const SvmParams& params) {
    std::vector<Sample> s;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].label) throw TrainingError("row " + std::to_string(i) + " is unlabeled");
        s.push_back({std::vector<double>(rows[i].features.values.begin(), rows[i].features.values.end()),
                     *rows[i].label});
    }
    return svm_train(std::move(s), params);
}

double decision_value(const SvmModel& model, const PairMachine& m, const std::vector<double>& scaled) {
    double f = 0.0;
    for (std::size_t k = 0; k < m.sv.size(); ++k)
        f += m.coef[k] * rbf_kernel(model.support_vectors[m.sv[k]], scaled, model.params.gamma);
    return f - m.rho;
}

Prediction svm_predict(const SvmModel& model, const std::vector<double>& x) {
    if (x.size() != model.dim()) throw SpecError("feature vector length does not match the model");
    const std::vector<double> s = model.scaling.apply(x);
    Prediction p;
    for (const PairMachine& m : model.machines) {
        const double f = decision_value(model, m, s);
        const int a = static_cast<int>(model.classes[m.first]), b = static_cast<int>(model.classes[m.second]);
        ++p.votes[f > 0 ? a : b];
        p.margins[a] += f;
        p.margins[b] -= f;
    }
    int best = static_cast<int>(model.classes.front());
    for (CellClass c : model.classes) {
        const int k = static_cast<int>(c);
        if (p.votes[k] > p.votes[best] || (p.votes[k] == p.votes[best] && p.margins[k] > p.margins[best])) best = k;
    }
    p.label = static_cast<CellClass>(best);
    return p;
}

Prediction svm_predict(const SvmModel& model, const FeatureVector& fv) {
    return svm_predict(model, std::vector<double>(fv.values.begin(), fv.values.end()));
}

EvalReport evaluate_predictions(const std::vector<CellClass>& truth, const std::vector<CellClass>& predicted) {
    EvalReport r;
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++r.confusion[static_cast<int>(truth[i])][static_cast<int>(predicted[i])];
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < kClassCount; ++c) {
        long long total = 0;
        for (long long v : r.confusion[c]) total += v;
        if (total == 0) {
            r.warnings.push_back("class " + std::string(to_string(static_cast<CellClass>(c))) +
                                 " absent from the evaluation rows; excluded from ARR");
            continue;
        }
        r.per_class_recall[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(total);
        sum += *r.per_class_recall[c];
        ++present;
    }
    r.arr = present ? sum / present : 0.0;
    return r;
}

EvalReport evaluate(const SvmModel& model, const std::vector<FeatureRow>& rows) {
    std::vector<CellClass> truth, pred;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].label) throw SpecError("evaluation row " + std::to_string(i) + " is unlabeled");
        truth.push_back(*rows[i].label);
        pred.push_back(svm_predict(model, rows[i].features).label);
    }
    return evaluate_predictions(truth, pred);
}

namespace {

nlohmann::ordered_json params_json(const SvmParams& p) {
    return {{"kernel", "rbf"}, {"C", p.C},     {"gamma", p.gamma},         {"coef0", p.coef0},
            {"degree", p.degree}, {"nu", p.nu}, {"p", p.p},                 {"max_iter", p.max_iter},
            {"tolerance", p.tolerance}, {"seed", p.seed}};
}

}  // namespace

std::string eval_report_json(const EvalReport& r, const SvmModel& model) {
    nlohmann::ordered_json j;
    j["metric"] = "per-class recall";
    nlohmann::ordered_json recall;
    for (int c = 0; c < kClassCount; ++c) {
        const std::string name(to_string(static_cast<CellClass>(c)));
        recall[name] = r.per_class_recall[c] ? nlohmann::ordered_json(*r.per_class_recall[c]) : nullptr;
    }
    j["per_class_recall"] = recall;
    j["arr"] = r.arr;
    nlohmann::ordered_json conf = nlohmann::ordered_json::array();
    for (const auto& row : r.confusion) conf.push_back(row);
    j["confusion"] = conf;
    j["confusion_axes"] = "rows = truth, columns = predicted, order NSTG NSBG MBE MLS OCS";
    j["warnings"] = r.warnings;
    j["manifest"] = {{"model_version", "bmcsvm-v1"},
                     {"feature_schema", model.feature_schema},
                     {"params", params_json(model.params)},
                     {"dataset_digest", model.dataset_digest},
                     {"support_vectors", model.support_vectors.size()}};
    return j.dump(2) + "\n";
}

namespace {

void put_doubles(std::ostringstream& os, const std::vector<double>& v) {
    char buf[40];
    for (double d : v) {
        std::snprintf(buf, sizeof buf, " %.17g", d);
        os << buf;
    }
}

std::string fmt(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

}  // namespace

std::string save_model(const SvmModel& m) {
    std::ostringstream os;
    const SvmParams& p = m.params;
    os << "bmcsvm-v1\n";
    os << "feature_schema " << m.feature_schema << "\n";
    os << "kernel rbf\n";
    os << "C " << fmt(p.C) << "\ngamma " << fmt(p.gamma) << "\ncoef0 " << fmt(p.coef0) << "\ndegree "
       << fmt(p.degree) << "\nnu " << fmt(p.nu) << "\np " << fmt(p.p) << "\nmax_iter " << p.max_iter
       << "\ntolerance " << fmt(p.tolerance) << "\nseed " << p.seed << "\n";
    os << "dataset_digest " << m.dataset_digest << "\n";
    os << "classes";
    for (CellClass c : m.classes) os << ' ' << to_string(c);
    os << "\ndim " << m.dim() << "\nscale_min";
    put_doubles(os, m.scaling.min);
    os << "\nscale_max";
    put_doubles(os, m.scaling.max);
    os << "\nmachines " << m.machines.size() << "\n";
    for (const PairMachine& pm : m.machines)
        os << "machine " << pm.first << ' ' << pm.second << ' ' << fmt(pm.rho) << "\n";
    // One CSV line per support vector: class, one coefficient per machine
    // (0 where the vector takes no part), then the scaled features.
    os << "support_vectors " << m.support_vectors.size() << "\n";
    for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
        os << to_string(m.sv_label[s]);
        for (const PairMachine& pm : m.machines) {
            double c = 0.0;
            for (std::size_t k = 0; k < pm.sv.size(); ++k)
                if (pm.sv[k] == static_cast<int>(s)) c = pm.coef[k];
            os << ',' << fmt(c);
        }
        for (double v : m.support_vectors[s]) os << ',' << fmt(v);
        os << "\n";
    }
    os << "end\n";
    return os.str();
}

SvmModel load_model(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::size_t offset = 0;
    auto next = [&](const char* what) {
        if (!std::getline(is, line)) throw FormatError(std::string("model: truncated before ") + what, offset);
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto keyed = [&](const char* key) {
        next(key);
        const std::string k = std::string(key) + ' ';
        if (line.rfind(k, 0) != 0) throw FormatError(std::string("model: expected ") + key, offset - line.size() - 1);
        return line.substr(k.size());
    };
    auto num = [&](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0') throw FormatError("model: bad number '" + s + "'", offset);
        return v;
    };
    auto nums = [&](const std::string& s) {
        std::vector<double> v;
        std::istringstream ss(s);
        std::string tok;
        while (ss >> tok) v.push_back(num(tok));
        return v;
    };

    if (next("version") != "bmcsvm-v1") throw VersionError("model: unknown version tag '" + line + "'");
    SvmModel m;
    m.feature_schema = keyed("feature_schema");
    if (keyed("kernel") != "rbf") throw FormatError("model: only the rbf kernel is supported", offset);
    SvmParams& p = m.params;
    p.C = num(keyed("C"));
    p.gamma = num(keyed("gamma"));
    p.coef0 = num(keyed("coef0"));
    p.degree = num(keyed("degree"));
    p.nu = num(keyed("nu"));
    p.p = num(keyed("p"));
    p.max_iter = static_cast<int>(num(keyed("max_iter")));
    p.tolerance = num(keyed("tolerance"));
    p.seed = std::strtoull(keyed("seed").c_str(), nullptr, 10);
    m.dataset_digest = keyed("dataset_digest");
    {
        std::istringstream ss(keyed("classes"));
        std::string tok;
        while (ss >> tok) {
            try {
                m.classes.push_back(parse_class(tok));
            } catch (const SpecError&) {
                throw FormatError("model: unknown class " + tok, offset);
            }
        }
    }
    const std::size_t dim = static_cast<std::size_t>(num(keyed("dim")));
    m.scaling.min = nums(keyed("scale_min"));
    m.scaling.max = nums(keyed("scale_max"));
    if (m.scaling.min.size() != dim || m.scaling.max.size() != dim)
        throw FormatError("model: scaling length does not match dim", offset);
    const std::size_t nm = static_cast<std::size_t>(num(keyed("machines")));
    for (std::size_t k = 0; k < nm; ++k) {
        PairMachine pm;
        const std::vector<double> v = nums(keyed("machine"));
        if (v.size() != 3) throw FormatError("model: malformed machine row", offset);
        pm.first = static_cast<int>(v[0]);
        pm.second = static_cast<int>(v[1]);
        pm.rho = v[2];
        if (pm.first < 0 || pm.second < 0 || pm.first >= static_cast<int>(m.classes.size()) ||
            pm.second >= static_cast<int>(m.classes.size()))
            throw FormatError("model: machine refers to an unknown class", offset);
        m.machines.push_back(pm);
    }
    const std::size_t nsv = static_cast<std::size_t>(num(keyed("support_vectors")));
    for (std::size_t s = 0; s < nsv; ++s) {
        next("support vector rows");
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t c = line.find(',', pos);
            fields.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        if (fields.size() != 1 + nm + dim) throw FormatError("model: truncated support vector row", offset);
        try {
            m.sv_label.push_back(parse_class(fields[0]));
        } catch (const SpecError&) {
            throw FormatError("model: unknown class " + fields[0], offset);
        }
        for (std::size_t k = 0; k < nm; ++k) {
            const double c = num(fields[1 + k]);
            if (c != 0.0) {
                m.machines[k].sv.push_back(static_cast<int>(s));
                m.machines[k].coef.push_back(c);
            }
        }
        std::vector<double> x;
        for (std::size_t k = 0; k < dim; ++k) x.push_back(num(fields[1 + nm + k]));
        m.support_vectors.push_back(std::move(x));
    }
    if (next("end marker") != "end") throw FormatError("model: missing end marker", offset);
    return m;
}

}  // namespace bmc
