#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spikesense/encoders.hpp"
#include "spikesense/trial.hpp"

namespace spikesense {

// Mean inter-spike interval in ms; empty for fewer than two spikes.
// Rejects a train whose times are not non-decreasing.
std::optional<double> misi(const std::vector<uint64_t>& times_us);

struct ThermalFeature {
    std::optional<double> misi_thermo_ms;
    std::optional<double> misi_diff_ms;
    bool valid() const { return misi_thermo_ms.has_value() && misi_diff_ms.has_value(); }
};

// Thermoreceptor + differentiator features of one temperature trace
// (>= 30 s at rate_hz).  The trace goes through the thermoreceptor model,
// spikes in the first 50 ms are dropped as initialization transient, and the
// remainder feeds one differentiator neuron started at the steady state of
// the first retained interval.  A constant-temperature trace therefore gives
// a regular thermoreceptor train and an empty differentiator train
// (misi_diff undefined).
ThermalFeature thermal_feature(const std::vector<float>& temps_c, uint32_t rate_hz,
                               const EncoderConfig& cfg);

// Trial-level wrapper: starts the clock at contact (first sample where any
// fingertip sensor's force magnitude exceeds contact_threshold_n), averages
// the 14 skin-temperature channels into one trace from that point on and
// requires >= 30 s of post-contact data.
ThermalFeature trial_thermal_feature(const SensorTrial& trial, const EncoderConfig& cfg,
                                     double contact_threshold_n = 0.2);

// --- material classifier -------------------------------------------------------

// Multiclass linear classifier over the 2-D thermal feature (one score row
// per class, argmax decision).  Weights live in standardized feature space;
// the standardization (and the sentinel that stands in for undefined MISIs)
// is part of the model.
struct LinearClassifier {
    int n_classes = 0;
    std::vector<std::array<double, 3>> wb;  // per class: w0, w1, bias
    std::array<double, 2> feat_mean{0.0, 0.0};
    std::array<double, 2> feat_std{1.0, 1.0};
    double sentinel = 0.0;  // fill-in for undefined MISIs (10x max observed)

    int predict(const ThermalFeature& f) const;  // argmax, ties to lowest
};

struct MaterialFitResult {
    LinearClassifier clf;  // trained on the 70% split
    double train_acc = 0.0;
    double holdout_acc = 0.0;
    double cv_acc = 0.0;  // stratified 5-fold over the full set
};

// Soft-margin multiclass hinge fit (Pegasos-style subgradient descent on the
// joint argmax objective, fixed regularization 0.01, 2e5 iterations).
// Features are standardized per axis on the respective training subset;
// undefined MISIs become a sentinel of 10x the largest defined value before
// standardization.  Requires >= 2 classes with >= 4 samples each, labels in
// 0..n_classes-1.
MaterialFitResult fit_material_classifier(const std::vector<ThermalFeature>& features,
                                          const std::vector<int>& labels, uint64_t seed);

// Text key=value round trip.
void save_material_classifier(const std::string& path, const LinearClassifier& clf);
LinearClassifier load_material_classifier(const std::string& path);

// `trial_id,material,misi_thermo_ms,misi_diff_ms`; undefined MISIs print as
// nan (the sentinel substitution happens only inside the classifier).
void write_feature_csv(const std::string& path, const std::vector<std::string>& trial_ids,
                       const std::vector<int>& materials,
                       const std::vector<ThermalFeature>& features);

}  // namespace spikesense
