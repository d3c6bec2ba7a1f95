#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spikesense/neuron.hpp"
#include "spikesense/raster.hpp"

namespace spikesense {

template <typename S>
using SnnMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

struct SnnConfig {
    // Input units first, classes last; canonical hidden stack 128/256/512/64.
    std::vector<uint32_t> layer_sizes;
    CubaLifParams lif;
    double timestep_ms = 2.0;
    uint32_t n_steps = 3000;  // horizon T; shorter trials are padded silence
    void validate() const;
};

struct SnnModel {
    SnnConfig cfg;
    std::vector<Eigen::MatrixXd> weights;  // [l]: (sizes[l+1] x sizes[l])
};

// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
SnnModel make_snn(const SnnConfig& cfg, uint64_t seed);

// "SNNM" binary: header (version, layer sizes, CubaLifParams, timestep, T)
// then row-major 64-bit little-endian weight matrices.
void save_model(const std::string& path, const SnnModel& model);
SnnModel load_model(const std::string& path);

// Clocked forward pass of one trial; returns per-class spike counts.
std::vector<uint32_t> spike_counts(const SnnModel& model, const SpikeRaster& raster);

// argmax of spike_counts; ties go to the lowest class index.
int classify(const SnnModel& model, const SpikeRaster& raster);

struct TrainConfig {
    double psc_ratio = 0.5;   // desired true-class count, fraction of T
    double nsc_ratio = 0.1;   // desired other-class count
    double tau_grad = 0.03;   // surrogate derivative width (fraction of theta)
    double kappa_grad = 3.0;  // surrogate derivative scale
    double learning_rate = 0.01;
    uint32_t max_epochs = 1000;
    uint32_t batch_size = 8;
    uint64_t seed = 0;
    // stop when the best epoch loss has not improved by plateau_delta for
    // plateau_epochs consecutive epochs
    double plateau_delta = 1e-6;
    uint32_t plateau_epochs = 20;
    void validate() const;
};

struct EpochStats {
    uint32_t epoch;
    double loss;       // mean over trials of sum over classes of (count - ratio*T)^2
    double train_acc;  // fraction classified correctly during the epoch
};

// SGD on the count-target squared error.  The gradient uses the loss
// normalized by T^2 (same minimizer; keeps step sizes sane at T ~ 3000),
// while EpochStats reports the per-trial mean of the unnormalized sum.
// Throws DivergenceError if the loss or any weight goes non-finite.
std::vector<EpochStats> train_snn(SnnModel& model, const std::vector<SpikeRaster>& data,
                                  const std::vector<int>& labels, const TrainConfig& cfg);

void write_loss_csv(const std::string& path, const std::vector<EpochStats>& history);

// --- low-level clocked engine ------------------------------------------------
// Shared by training, inference and the gradient tests; templated on the
// scalar so tests can run the identical code path in double precision.
// Trials are concatenated along columns: input is (n_in x B*T).

template <typename S>
struct ForwardTrace {
    std::vector<SnnMat<S>> v_pre;   // pre-reset membrane, per non-input layer
    std::vector<SnnMat<S>> spikes;  // binary spikes, per non-input layer
};

template <typename S>
void snn_forward(const std::vector<SnnMat<S>>& weights, const CubaLifParams& lif,
                 const SnnMat<S>& input, uint32_t steps_per_trial, ForwardTrace<S>& trace);

// Backpropagation through the clocked dynamics.  d_spikes_out is dLoss/dS for
// the output layer's spike matrix; credit crosses the spike nonlinearity via
// the surrogate kappa/(2w) / (1 + |v'-theta|/w)^2 with w = tau*theta (a
// rational kernel; an exponential one with the same peak and mass starves the
// gradient because almost no membrane value lands within its support), and
// the reset gate (1 - s) is treated as a constant (detached).  Returns
// dLoss/dW for every layer.
template <typename S>
std::vector<SnnMat<S>> snn_backward(const std::vector<SnnMat<S>>& weights,
                                    const CubaLifParams& lif, const SnnMat<S>& input,
                                    const ForwardTrace<S>& trace, const SnnMat<S>& d_spikes_out,
                                    uint32_t steps_per_trial, double tau_grad, double kappa_grad);

template <typename S>
inline S surrogate_deriv(S v, S theta, S tau, S kappa) {
    using std::abs;
    S w = tau * theta;
    S a = S(1) + abs(v - theta) / w;
    return kappa / (S(2) * w) / (a * a);
}

extern template void snn_forward<float>(const std::vector<SnnMat<float>>&, const CubaLifParams&,
                                        const SnnMat<float>&, uint32_t, ForwardTrace<float>&);
extern template void snn_forward<double>(const std::vector<SnnMat<double>>&, const CubaLifParams&,
                                         const SnnMat<double>&, uint32_t, ForwardTrace<double>&);
extern template std::vector<SnnMat<float>> snn_backward<float>(
    const std::vector<SnnMat<float>>&, const CubaLifParams&, const SnnMat<float>&,
    const ForwardTrace<float>&, const SnnMat<float>&, uint32_t, double, double);
extern template std::vector<SnnMat<double>> snn_backward<double>(
    const std::vector<SnnMat<double>>&, const CubaLifParams&, const SnnMat<double>&,
    const ForwardTrace<double>&, const SnnMat<double>&, uint32_t, double, double);

}  // namespace spikesense
