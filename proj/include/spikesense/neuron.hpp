#pragma once

#include <cmath>

namespace spikesense {

// --- Izhikevich (mechanoreceptor encoding units) -----------------------------
//
//   dv/dt = 0.04 v^2 + 5 v + 140 - u + I
//   du/dt = a (b v - u)
//   v >= theta  ->  v <- c, u <- u + d
//
// Forward Euler, sub-stepped internally so the production sensor timesteps
// (2.857 ms at 350 Hz, 4 ms at 250 Hz) stay close to a high-order reference.

// Largest internal integration sub-step for the Izhikevich kernels.
inline constexpr double kIzhikevichSubstepMs = 0.005;

struct IzhikevichParams {
    double a;      // recovery time scale, 1/ms
    double b;      // recovery sensitivity
    double c;      // post-spike reset voltage, mV
    double d;      // post-spike recovery increment, mV
    double theta;  // firing threshold, mV
};

// Slowly-adapting unit: tonic firing under sustained drive.
inline IzhikevichParams sa_mechano_params() { return {0.02, 0.2, -65.0, 8.0, 30.0}; }

// Rapidly-adapting unit: phasic bursts, driven here by stimulus derivatives.
inline IzhikevichParams ra_mechano_params() { return {0.02, 0.25, -55.0, 4.0, 30.0}; }

struct IzhikevichState {
    double v;  // membrane potential, mV
    double u;  // recovery variable, mV
};

inline IzhikevichState izhikevich_rest(const IzhikevichParams& p) {
    return {p.c, p.b * p.c};
}

// Advance one sensor timestep.  Returns true if the unit fired within dt.
// If first_substep is non-null it receives the 0-based internal sub-step of
// the first firing (-1 if none), which gives spike times at sub-step
// resolution: t_spike = t_step_start + (first_substep + 1) * (dt / n_sub).
bool izhikevich_step(IzhikevichState& s, const IzhikevichParams& p, double i_in, double dt_ms,
                     int* first_substep = nullptr);

// Sub-step count the kernel uses internally for a given coarse step.
inline int izhikevich_substeps(double dt_ms) {
    int n = static_cast<int>(std::ceil(dt_ms / kIzhikevichSubstepMs - 1e-12));
    return n < 1 ? 1 : n;
}

// --- CUBA-LIF (network neuron, unit discrete timestep) -----------------------

struct CubaLifParams {
    double theta = 1.25;    // firing threshold
    double alpha_u = 0.25;  // synaptic-current decay per step
    double alpha_v = 0.03;  // membrane decay per step
};

struct CubaLifState {
    double u = 0.0;
    double v = 0.0;
};

// u <- (1-alpha_u) u + x;  v <- (1-alpha_v) v + u;  v >= theta -> v <- 0, s=1
inline bool cuba_lif_step(CubaLifState& s, const CubaLifParams& p, double x) {
    s.u = (1.0 - p.alpha_u) * s.u + x;
    s.v = (1.0 - p.alpha_v) * s.v + s.u;
    if (s.v >= p.theta) {
        s.v = 0.0;
        return true;
    }
    return false;
}

// --- Thermoreceptor tuning curve ---------------------------------------------
//
// Half-Gaussian drive: ramps up toward t_max, saturates at i_max above it.

struct ThermoParams {
    double t_max;  // full-activation temperature, degC
    double t_a;    // activation temperature (tuning width anchor), degC
    double i_max;  // peak drive, mV/ms
    double sigma;  // tuning width, degC; always t_max - t_a
};

inline ThermoParams make_thermo_params(double t_max = 52.0, double t_a = 38.0,
                                       double i_max = 20.0) {
    return {t_max, t_a, i_max, t_max - t_a};
}

inline double thermo_current(double t_degc, const ThermoParams& p) {
    if (t_degc >= p.t_max) return p.i_max;
    double z = (p.t_max - t_degc) / p.sigma;
    return p.i_max * std::exp(-0.5 * z * z);
}

// --- Differentiator neuron ----------------------------------------------------
//
// Two leaky traces fed by the same input spikes; fires on their divergence,
// i.e. on input-rate transients rather than sustained rates.

struct DifferentiatorParams {
    double w_slow = 50.0;      // mV per input spike
    double w_fast = 80.0;      // mV per input spike
    double tau_slow = 50.0;    // ms
    double tau_fast = 30.0;    // ms
    double theta_diff = 50.0;  // mV
};

struct DifferentiatorState {
    double v_fast = 0.0;
    double v_slow = 0.0;
};

// Trace values immediately after a spike of an established regular train at
// the given inter-spike interval: the stationary point of decay + increment,
// v = w/(1 - e^(-isi/tau)).  Starting a train from here instead of from zero
// removes the cold-start transient (two fresh traces charge at different
// speeds, so any finite-onset regular train would otherwise emit one spurious
// onset spike).
inline DifferentiatorState differentiator_steady_state(const DifferentiatorParams& p,
                                                       double isi_ms) {
    double qf = std::exp(-isi_ms / p.tau_fast);
    double qs = std::exp(-isi_ms / p.tau_slow);
    return {p.w_fast / (1.0 - qf), p.w_slow / (1.0 - qs)};
}

// Decay (exact exponential), then apply the input spike to both traces, then
// test v_fast - v_slow against threshold; on firing both traces reset to 0.
inline bool differentiator_step(DifferentiatorState& s, const DifferentiatorParams& p,
                                bool s_i, double dt_ms) {
    s.v_fast *= std::exp(-dt_ms / p.tau_fast);
    s.v_slow *= std::exp(-dt_ms / p.tau_slow);
    if (s_i) {
        s.v_fast += p.w_fast;
        s.v_slow += p.w_slow;
    }
    if (s.v_fast - s.v_slow >= p.theta_diff) {
        s.v_fast = 0.0;
        s.v_slow = 0.0;
        return true;
    }
    return false;
}

}  // namespace spikesense
