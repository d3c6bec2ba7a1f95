#include "spikesense/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spikesense/common.hpp"
#include "spikesense/neuron.hpp"

namespace spikesense {

std::optional<double> misi(const std::vector<uint64_t>& times_us) {
    for (size_t i = 1; i < times_us.size(); ++i)
        if (times_us[i] < times_us[i - 1]) throw ValidationError("misi: train is not time-sorted");
    if (times_us.size() < 2) return std::nullopt;
    // mean of consecutive differences telescopes to (last - first) / (n - 1)
    const double span_us = static_cast<double>(times_us.back() - times_us.front());
    return span_us / (static_cast<double>(times_us.size() - 1) * 1000.0);
}

namespace {

constexpr uint64_t kTransientCutUs = 50'000;  // onset burst of the cold-started receptor
constexpr double kMinTraceSeconds = 30.0;

}  // namespace

ThermalFeature thermal_feature(const std::vector<float>& temps_c, uint32_t rate_hz,
                               const EncoderConfig& cfg) {
    if (rate_hz == 0) throw ValidationError("thermal_feature: zero sample rate");
    if (static_cast<double>(temps_c.size()) / rate_hz < kMinTraceSeconds)
        throw ValidationError(strfmt("thermal_feature: need >= %.0f s of trace, got %.2f s",
                                     kMinTraceSeconds,
                                     static_cast<double>(temps_c.size()) / rate_hz));

    SpikeTrain thermo = encode_temperature(temps_c, rate_hz, cfg);
    auto& ts = thermo.times_us;
    ts.erase(ts.begin(), std::lower_bound(ts.begin(), ts.end(), kTransientCutUs));

    ThermalFeature f;
    f.misi_thermo_ms = misi(ts);

    if (ts.size() >= 2) {
        DifferentiatorParams dp;
        const double first_isi_ms = static_cast<double>(ts[1] - ts[0]) / 1000.0;
        // the first retained spike is treated as the last spike of an
        // established train at that cadence
        DifferentiatorState st = first_isi_ms > 0.0 ? differentiator_steady_state(dp, first_isi_ms)
                                                    : DifferentiatorState{};
        std::vector<uint64_t> out;
        for (size_t i = 1; i < ts.size(); ++i) {
            const double dt_ms = static_cast<double>(ts[i] - ts[i - 1]) / 1000.0;
            if (differentiator_step(st, dp, true, dt_ms)) out.push_back(ts[i]);
        }
        f.misi_diff_ms = misi(out);
    }
    return f;
}

ThermalFeature trial_thermal_feature(const SensorTrial& trial, const EncoderConfig& cfg,
                                     double contact_threshold_n) {
    validate_trial(trial);
    if (!(contact_threshold_n > 0.0))
        throw ValidationError("trial_thermal_feature: contact threshold must be positive");

    // contact gate: first sample where any fingertip sensor's force magnitude
    // crosses the threshold (fingertip channels are 4 sensors x 3 axes)
    const size_t n_force = trial.channels[kFingertipForceCh0].samples.size();
    const uint32_t force_rate = trial.channels[kFingertipForceCh0].rate_hz;
    int64_t gate_idx = -1;
    for (size_t i = 0; i < n_force && gate_idx < 0; ++i) {
        for (int s = 0; s < 4; ++s) {
            const double x = trial.channels[kFingertipForceCh0 + 3 * s + 0].samples[i];
            const double y = trial.channels[kFingertipForceCh0 + 3 * s + 1].samples[i];
            const double z = trial.channels[kFingertipForceCh0 + 3 * s + 2].samples[i];
            if (std::sqrt(x * x + y * y + z * z) > contact_threshold_n) {
                gate_idx = static_cast<int64_t>(i);
                break;
            }
        }
    }
    if (gate_idx < 0)
        throw ValidationError("trial_thermal_feature: no contact (force never crossed threshold)");
    const uint64_t gate_us =
        (static_cast<uint64_t>(gate_idx) * 1000000ull + force_rate - 1) / force_rate;

    const uint32_t temp_rate = trial.channels[kSkinTempCh0].rate_hz;
    const size_t start = static_cast<size_t>((gate_us * temp_rate + 999999ull) / 1000000ull);
    const size_t n_temp = trial.channels[kSkinTempCh0].samples.size();
    if (start >= n_temp)
        throw ValidationError("trial_thermal_feature: contact after the end of the trace");

    std::vector<float> mean_trace(n_temp - start, 0.0f);
    for (int c = 0; c < 14; ++c) {
        const auto& s = trial.channels[kSkinTempCh0 + c].samples;
        for (size_t i = start; i < n_temp; ++i) mean_trace[i - start] += s[i];
    }
    for (auto& v : mean_trace) v /= 14.0f;
    return thermal_feature(mean_trace, temp_rate, cfg);
}

// --- material classifier -------------------------------------------------------

namespace {

struct Standardizer {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> stddev{1.0, 1.0};
    double sentinel = 0.0;
};

std::array<double, 2> raw_point(const ThermalFeature& f, double sentinel) {
    return {f.misi_thermo_ms ? *f.misi_thermo_ms : sentinel,
            f.misi_diff_ms ? *f.misi_diff_ms : sentinel};
}

std::array<double, 2> standardize(const Standardizer& z, const ThermalFeature& f) {
    auto p = raw_point(f, z.sentinel);
    return {(p[0] - z.mean[0]) / z.stddev[0], (p[1] - z.mean[1]) / z.stddev[1]};
}

Standardizer fit_standardizer(const std::vector<ThermalFeature>& feats,
                              const std::vector<size_t>& idx) {
    Standardizer z;
    double mx = 0.0;
    bool any = false;
    for (size_t i : idx) {
        if (feats[i].misi_thermo_ms) mx = std::max(mx, *feats[i].misi_thermo_ms), any = true;
        if (feats[i].misi_diff_ms) mx = std::max(mx, *feats[i].misi_diff_ms), any = true;
    }
    z.sentinel = any ? 10.0 * mx : 1.0;
    for (int a = 0; a < 2; ++a) {
        double s = 0.0, s2 = 0.0;
        for (size_t i : idx) {
            double v = raw_point(feats[i], z.sentinel)[a];
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(idx.size());
        z.mean[a] = s / n;
        const double var = std::max(0.0, s2 / n - z.mean[a] * z.mean[a]);
        z.stddev[a] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return z;
}

// Pegasos subgradient descent on the joint multiclass hinge objective
// lambda/2 |W|^2 + mean_i max_c(1[c != y_i] + w_c.x_i - w_y.x_i), bias folded
// into the weight vectors.  Training all classes against the shared argmax
// matters here: a class sandwiched between two others along one feature axis
// has no separating line of its own but still owns an argmax cell.
std::vector<std::array<double, 3>> pegasos_multiclass(
    const std::vector<std::array<double, 2>>& x, const std::vector<int>& y, int n_classes,
    uint64_t seed) {
    constexpr double lambda = 0.01;
    constexpr int kIters = 200000;
    std::vector<std::array<double, 3>> w(n_classes, {0.0, 0.0, 0.0});
    Rng rng(seed);
    for (int t = 1; t <= kIters; ++t) {
        const size_t i = static_cast<size_t>(rng.next_u64() % x.size());
        const std::array<double, 3> xi{x[i][0], x[i][1], 1.0};
        int rival = -1;
        double rival_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < n_classes; ++c) {
            if (c == y[i]) continue;
            const double s = w[c][0] * xi[0] + w[c][1] * xi[1] + w[c][2] * xi[2];
            if (s > rival_score) rival_score = s, rival = c;
        }
        const auto& wy = w[y[i]];
        const double own = wy[0] * xi[0] + wy[1] * xi[1] + wy[2] * xi[2];
        const double eta = 1.0 / (lambda * t);
        const double keep = 1.0 - eta * lambda;
        for (auto& wc : w) wc[0] *= keep, wc[1] *= keep, wc[2] *= keep;
        if (own - rival_score < 1.0) {
            for (int d = 0; d < 3; ++d) {
                w[y[i]][d] += eta * xi[d];
                w[rival][d] -= eta * xi[d];
            }
        }
    }
    return w;
}

int argmax_class(const std::vector<std::array<double, 3>>& wb, const std::array<double, 2>& p) {
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < static_cast<int>(wb.size()); ++c) {
        const double s = wb[c][0] * p[0] + wb[c][1] * p[1] + wb[c][2];
        if (s > best_score) best_score = s, best = c;
    }
    return best;
}

LinearClassifier fit_on(const std::vector<ThermalFeature>& feats, const std::vector<int>& labels,
                        const std::vector<size_t>& idx, int n_classes, uint64_t seed) {
    const Standardizer z = fit_standardizer(feats, idx);
    std::vector<std::array<double, 2>> x;
    x.reserve(idx.size());
    for (size_t i : idx) x.push_back(standardize(z, feats[i]));

    LinearClassifier clf;
    clf.n_classes = n_classes;
    clf.feat_mean = z.mean;
    clf.feat_std = z.stddev;
    clf.sentinel = z.sentinel;
    std::vector<int> y(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) y[k] = labels[idx[k]];
    clf.wb = pegasos_multiclass(x, y, n_classes, hash_seq({seed, 0xC1A5u}));
    return clf;
}

double accuracy_on(const LinearClassifier& clf, const std::vector<ThermalFeature>& feats,
                   const std::vector<int>& labels, const std::vector<size_t>& idx) {
    if (idx.empty()) return 0.0;
    size_t ok = 0;
    for (size_t i : idx)
        if (clf.predict(feats[i]) == labels[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(idx.size());
}

}  // namespace

int LinearClassifier::predict(const ThermalFeature& f) const {
    if (n_classes <= 0 || wb.size() != static_cast<size_t>(n_classes))
        throw ValidationError("predict: classifier is empty");
    Standardizer z{feat_mean, feat_std, sentinel};
    return argmax_class(wb, standardize(z, f));
}

MaterialFitResult fit_material_classifier(const std::vector<ThermalFeature>& features,
                                          const std::vector<int>& labels, uint64_t seed) {
    if (features.empty() || features.size() != labels.size())
        throw ValidationError("fit_material_classifier: feature/label size mismatch");
    int n_classes = 0;
    for (int l : labels) {
        if (l < 0) throw ValidationError("fit_material_classifier: negative label");
        n_classes = std::max(n_classes, l + 1);
    }
    if (n_classes < 2) throw ValidationError("fit_material_classifier: need >= 2 classes");
    std::vector<std::vector<size_t>> by_class(n_classes);
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (int c = 0; c < n_classes; ++c)
        if (by_class[c].size() < 4)
            throw ValidationError(
                strfmt("fit_material_classifier: class %d has %zu samples, need >= 4", c,
                       by_class[c].size()));

    // stratified 70/30 split
    std::vector<size_t> train, holdout;
    for (int c = 0; c < n_classes; ++c) {
        auto idx = by_class[c];
        Rng rng(hash_seq({seed, 0x7030u, static_cast<uint64_t>(c)}));
        rng.shuffle(idx);
        size_t n_train = (7 * idx.size() + 5) / 10;
        n_train = std::min(std::max<size_t>(n_train, 1), idx.size() - 1);
        train.insert(train.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
        holdout.insert(holdout.end(), idx.begin() + static_cast<long>(n_train), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(holdout.begin(), holdout.end());

    MaterialFitResult res;
    res.clf = fit_on(features, labels, train, n_classes, seed);
    res.train_acc = accuracy_on(res.clf, features, labels, train);
    res.holdout_acc = accuracy_on(res.clf, features, labels, holdout);

    // stratified 5-fold cross-validation over the full set
    std::vector<std::vector<size_t>> folds(5);
    for (int c = 0; c < n_classes; ++c) {
        auto idx = by_class[c];
        Rng rng(hash_seq({seed, 0xCF01u, static_cast<uint64_t>(c)}));
        rng.shuffle(idx);
        for (size_t k = 0; k < idx.size(); ++k) folds[k % 5].push_back(idx[k]);
    }
    size_t ok = 0, total = 0;
    for (int k = 0; k < 5; ++k) {
        if (folds[k].empty()) continue;
        std::vector<size_t> rest;
        for (int j = 0; j < 5; ++j)
            if (j != k) rest.insert(rest.end(), folds[j].begin(), folds[j].end());
        std::sort(rest.begin(), rest.end());
        LinearClassifier fold_clf =
            fit_on(features, labels, rest, n_classes,
                   hash_seq({seed, 0xF01Du, static_cast<uint64_t>(k)}));
        for (size_t i : folds[k]) {
            ok += fold_clf.predict(features[i]) == labels[i] ? 1 : 0;
            ++total;
        }
    }
    res.cv_acc = total ? static_cast<double>(ok) / static_cast<double>(total) : 0.0;
    return res;
}

void save_material_classifier(const std::string& path, const LinearClassifier& clf) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os << "n_classes = " << clf.n_classes << '\n';
    os << "sentinel = " << strfmt("%.17g", clf.sentinel) << '\n';
    os << "mean = " << strfmt("%.17g %.17g", clf.feat_mean[0], clf.feat_mean[1]) << '\n';
    os << "std = " << strfmt("%.17g %.17g", clf.feat_std[0], clf.feat_std[1]) << '\n';
    for (int c = 0; c < clf.n_classes; ++c)
        os << "class_" << c << " = "
           << strfmt("%.17g %.17g %.17g", clf.wb[c][0], clf.wb[c][1], clf.wb[c][2]) << '\n';
    if (!os) throw ValidationError("write failed: " + path);
}

LinearClassifier load_material_classifier(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open classifier: " + path);
    LinearClassifier clf;
    std::string line;
    int lineno = 0;
    bool have_n = false;
    while (std::getline(is, line)) {
        ++lineno;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ValidationError(strfmt("%s:%d: expected key = value", path.c_str(), lineno));
            continue;
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        std::istringstream val(trim(line.substr(eq + 1)));
        if (key == "n_classes") {
            if (!(val >> clf.n_classes) || clf.n_classes < 2 || clf.n_classes > 4096)
                throw ValidationError(strfmt("%s:%d: bad n_classes", path.c_str(), lineno));
            clf.wb.assign(clf.n_classes, {0.0, 0.0, 0.0});
            have_n = true;
        } else if (key == "sentinel") {
            if (!(val >> clf.sentinel))
                throw ValidationError(strfmt("%s:%d: bad sentinel", path.c_str(), lineno));
        } else if (key == "mean") {
            if (!(val >> clf.feat_mean[0] >> clf.feat_mean[1]))
                throw ValidationError(strfmt("%s:%d: bad mean", path.c_str(), lineno));
        } else if (key == "std") {
            if (!(val >> clf.feat_std[0] >> clf.feat_std[1]))
                throw ValidationError(strfmt("%s:%d: bad std", path.c_str(), lineno));
        } else if (key.rfind("class_", 0) == 0) {
            int c = -1;
            try {
                c = std::stoi(key.substr(6));
            } catch (const std::exception&) {
                throw ValidationError(strfmt("%s:%d: bad class key", path.c_str(), lineno));
            }
            if (!have_n || c < 0 || c >= clf.n_classes)
                throw ValidationError(strfmt("%s:%d: class index out of range", path.c_str(),
                                             lineno));
            if (!(val >> clf.wb[c][0] >> clf.wb[c][1] >> clf.wb[c][2]))
                throw ValidationError(strfmt("%s:%d: bad class weights", path.c_str(), lineno));
        } else {
            throw ValidationError(strfmt("%s:%d: unknown key '%s'", path.c_str(), lineno,
                                         key.c_str()));
        }
    }
    if (!have_n) throw ValidationError(path + ": missing n_classes");
    for (const auto& w : clf.wb)
        if (!std::isfinite(w[0]) || !std::isfinite(w[1]) || !std::isfinite(w[2]))
            throw ValidationError(path + ": non-finite classifier weights");
    return clf;
}

void write_feature_csv(const std::string& path, const std::vector<std::string>& trial_ids,
                       const std::vector<int>& materials,
                       const std::vector<ThermalFeature>& features) {
    if (trial_ids.size() != features.size() || materials.size() != features.size())
        throw ValidationError("write_feature_csv: column length mismatch");
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os << "trial_id,material,misi_thermo_ms,misi_diff_ms\n";
    for (size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        os << trial_ids[i] << ',' << materials[i] << ','
           << (f.misi_thermo_ms ? strfmt("%.9g", *f.misi_thermo_ms) : "nan") << ','
           << (f.misi_diff_ms ? strfmt("%.9g", *f.misi_diff_ms) : "nan") << '\n';
    }
    if (!os) throw ValidationError("write failed: " + path);
}

}  // namespace spikesense
