#include "spikesense/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "spikesense/common.hpp"
#include "spikesense/neuron.hpp"

namespace spikesense {

void EncoderConfig::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ValidationError(strfmt("encoder config: %s must be >= 0 and finite", name));
    };
    nonneg(fingertip_force_gain, "fingertip_force_gain");
    nonneg(skin_force_gain, "skin_force_gain");
    nonneg(force_deriv_gain, "force_deriv_gain");
    nonneg(accel_gain, "accel_gain");
    nonneg(temp_gain, "temp_gain");
    nonneg(spindle_r0_hz, "spindle_r0_hz");
    if (!(force_filter_tau_ms > 0.0))
        throw ValidationError("encoder config: force_filter_tau_ms must be > 0");
    for (double v : {fingertip_force_offset, skin_force_offset, accel_offset, temp_offset,
                     spindle_ks_hz, spindle_kd_hz_s})
        if (!std::isfinite(v)) throw ValidationError("encoder config: non-finite value");
}

// --- config file IO -----------------------------------------------------------

namespace {

struct CfgField {
    const char* key;
    double EncoderConfig::* member;
};

const CfgField kCfgFields[] = {
    {"fingertip_force_gain", &EncoderConfig::fingertip_force_gain},
    {"skin_force_gain", &EncoderConfig::skin_force_gain},
    {"fingertip_force_offset", &EncoderConfig::fingertip_force_offset},
    {"skin_force_offset", &EncoderConfig::skin_force_offset},
    {"force_deriv_gain", &EncoderConfig::force_deriv_gain},
    {"force_filter_tau_ms", &EncoderConfig::force_filter_tau_ms},
    {"accel_gain", &EncoderConfig::accel_gain},
    {"accel_offset", &EncoderConfig::accel_offset},
    {"temp_gain", &EncoderConfig::temp_gain},
    {"temp_offset", &EncoderConfig::temp_offset},
    {"spindle_r0_hz", &EncoderConfig::spindle_r0_hz},
    {"spindle_ks_hz", &EncoderConfig::spindle_ks_hz},
    {"spindle_kd_hz_s", &EncoderConfig::spindle_kd_hz_s},
};

}  // namespace

EncoderConfig load_encoder_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open encoder config: " + path);
    EncoderConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            // blank (or comment-only) lines are fine
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ValidationError(strfmt("%s:%d: expected key=value", path.c_str(), lineno));
            continue;
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "seed") {
                cfg.seed = std::stoull(val);
                continue;
            }
            bool known = false;
            for (const auto& f : kCfgFields)
                if (key == f.key) {
                    cfg.*(f.member) = std::stod(val);
                    known = true;
                    break;
                }
            if (!known)
                throw ValidationError(strfmt("%s:%d: unknown key '%s'", path.c_str(), lineno,
                                             key.c_str()));
        } catch (const std::invalid_argument&) {
            throw ValidationError(strfmt("%s:%d: bad numeric value '%s'", path.c_str(), lineno,
                                         val.c_str()));
        } catch (const std::out_of_range&) {
            throw ValidationError(strfmt("%s:%d: value out of range", path.c_str(), lineno));
        }
    }
    cfg.validate();
    return cfg;
}

void save_encoder_config(const std::string& path, const EncoderConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os << "seed = " << cfg.seed << '\n';
    for (const auto& f : kCfgFields) os << f.key << " = " << strfmt("%.17g", cfg.*(f.member)) << '\n';
    if (!os) throw ValidationError("write failed: " + path);
}

// --- drive construction ---------------------------------------------------------

namespace {

std::vector<double> sa_force_drive(const std::vector<float>& samples, double gain, double offset) {
    std::vector<double> d(samples.size());
    for (size_t k = 0; k < samples.size(); ++k)
        d[k] = gain * std::abs(static_cast<double>(samples[k])) + offset;
    return d;
}

std::vector<double> ra_force_drive(const std::vector<float>& samples, uint32_t rate_hz,
                                   const EncoderConfig& cfg, double offset) {
    // EMA of |F|, then the magnitude of its discrete derivative in N/s.
    std::vector<double> d(samples.size());
    if (samples.empty()) return d;
    double dt_ms = 1000.0 / rate_hz;
    double alpha = 1.0 - std::exp(-dt_ms / cfg.force_filter_tau_ms);
    double ema = std::abs(static_cast<double>(samples[0]));
    d[0] = offset;
    for (size_t k = 1; k < samples.size(); ++k) {
        double prev = ema;
        ema += alpha * (std::abs(static_cast<double>(samples[k])) - ema);
        d[k] = cfg.force_deriv_gain * std::abs(ema - prev) * rate_hz + offset;
    }
    return d;
}

std::vector<double> accel_drive(const std::vector<float>& samples, uint32_t rate_hz,
                                const EncoderConfig& cfg) {
    size_t n_base = rate_hz / 10;  // 100 ms
    if (samples.size() < n_base)
        throw ValidationError(strfmt("acceleration trace too short for baseline: %zu samples, "
                                     "need %zu (100 ms)",
                                     samples.size(), n_base));
    double base = 0.0;
    for (size_t k = 0; k < n_base; ++k) base += samples[k];
    base /= static_cast<double>(n_base);
    std::vector<double> d(samples.size());
    for (size_t k = 0; k < samples.size(); ++k)
        d[k] = cfg.accel_gain * std::abs(samples[k] - base) + cfg.accel_offset;
    return d;
}

std::vector<double> thermo_drive(const std::vector<float>& samples, const EncoderConfig& cfg) {
    ThermoParams tp = make_thermo_params();
    std::vector<double> d(samples.size());
    for (size_t k = 0; k < samples.size(); ++k) {
        double t = samples[k];
        if (!(t >= -20.0 && t <= 120.0))
            throw ValidationError(strfmt("temperature %.2f degC out of physical range "
                                         "[-20, 120] at sample %zu",
                                         t, k));
        d[k] = cfg.temp_gain * thermo_current(t, tp) + cfg.temp_offset;
    }
    return d;
}

uint64_t spike_time_us(uint64_t t0_us, uint32_t rate_hz, size_t k, int substep, double h_ms) {
    return t0_us + static_cast<uint64_t>(
                       std::llround(k * 1e6 / rate_hz + (substep + 1) * h_ms * 1000.0));
}

SpikeTrain run_izhikevich(const std::vector<double>& drive, uint32_t rate_hz,
                          const IzhikevichParams& prm, uint64_t t0_us) {
    SpikeTrain train;
    IzhikevichState st = izhikevich_rest(prm);
    double dt_ms = 1000.0 / rate_hz;
    double h_ms = dt_ms / izhikevich_substeps(dt_ms);
    for (size_t k = 0; k < drive.size(); ++k) {
        int sub = -1;
        if (izhikevich_step(st, prm, drive[k], dt_ms, &sub))
            train.times_us.push_back(spike_time_us(t0_us, rate_hz, k, sub, h_ms));
    }
    return train;
}

// Batched variant of run_izhikevich over a group of units sharing parameters
// and sample rate; the inner loop mirrors izhikevich_step exactly so the two
// paths produce identical spikes (cross-checked in the tests).
void run_izhikevich_bank(const IzhikevichParams& prm, uint32_t rate_hz,
                         const std::vector<uint16_t>& units,
                         const std::vector<std::vector<double>>& drives, uint64_t t0_us,
                         std::vector<SpikeEvent>& out) {
    size_t nu = units.size();
    if (nu == 0) return;
    size_t ns = drives[0].size();
    double dt_ms = 1000.0 / rate_hz;
    int n_sub = izhikevich_substeps(dt_ms);
    double h = dt_ms / n_sub;
    std::vector<double> v(nu, prm.c), u(nu, prm.b * prm.c), cur(nu);
    std::vector<int> first(nu);
    for (size_t k = 0; k < ns; ++k) {
        for (size_t i = 0; i < nu; ++i) {
            cur[i] = drives[i][k];
            first[i] = -1;
        }
        double* pv = v.data();
        double* pu = u.data();
        const double* pi = cur.data();
        int* pf = first.data();
        for (int j = 0; j < n_sub; ++j) {
            for (size_t i = 0; i < nu; ++i) {
                double vv = pv[i];
                double uu = pu[i];
                double v_next = vv + h * (0.04 * vv * vv + 5.0 * vv + 140.0 - uu + pi[i]);
                bool sp = v_next >= prm.theta;
                pv[i] = sp ? prm.c : v_next;
                pu[i] = sp ? uu + prm.d : uu + h * prm.a * (prm.b * vv - uu);
                pf[i] = (sp && pf[i] < 0) ? j : pf[i];
            }
        }
        for (size_t i = 0; i < nu; ++i)
            if (first[i] >= 0)
                out.push_back({spike_time_us(t0_us, rate_hz, k, first[i], h), units[i]});
    }
}

SpikeTrain poisson_train(const std::vector<double>& rate_hz_per_bin, uint32_t rate_hz,
                         uint64_t stream_seed, uint64_t t0_us) {
    // Draws are indexed by bin position within the trial, so a time-shifted
    // copy of a trial reproduces the same draws at shifted timestamps.
    SpikeTrain train;
    for (size_t k = 0; k < rate_hz_per_bin.size(); ++k) {
        double p = rate_hz_per_bin[k] / rate_hz;
        if (p > 1.0) p = 1.0;
        if (counter_uniform01(stream_seed, 0, k) < p)
            train.times_us.push_back(t0_us +
                                     static_cast<uint64_t>(std::llround(k * 1e6 / rate_hz)));
    }
    return train;
}

std::vector<double> spindle_rates(const std::vector<float>& L, const std::vector<float>* Ldot,
                                  const EncoderConfig& cfg) {
    std::vector<double> r(L.size());
    for (size_t k = 0; k < L.size(); ++k) {
        double rate = cfg.spindle_r0_hz + cfg.spindle_ks_hz * L[k];
        if (Ldot) rate += cfg.spindle_kd_hz_s * (*Ldot)[k];
        r[k] = rate > 0.0 ? rate : 0.0;
    }
    return r;
}

}  // namespace

// --- per-channel operations ------------------------------------------------------

SpikeTrain encode_force(const std::vector<float>& samples, uint32_t rate_hz,
                        const EncoderConfig& cfg, ChannelKind kind, ForceReceptor which,
                        uint64_t t0_us) {
    cfg.validate();
    uint32_t want_rate;
    double gain, offset;
    if (kind == ChannelKind::FingertipForce) {
        want_rate = 350;
        gain = cfg.fingertip_force_gain;
        offset = cfg.fingertip_force_offset;
    } else if (kind == ChannelKind::SkinForce) {
        want_rate = 250;
        gain = cfg.skin_force_gain;
        offset = cfg.skin_force_offset;
    } else {
        throw ValidationError("encode_force: channel kind is not a force kind");
    }
    if (rate_hz != want_rate)
        throw ValidationError(strfmt("encode_force: rate %u Hz does not match the %u Hz "
                                     "descriptor rate for this kind",
                                     rate_hz, want_rate));
    for (float v : samples)
        if (!std::isfinite(v)) throw ValidationError("encode_force: non-finite force sample");
    std::vector<double> drive = which == ForceReceptor::SA
                                    ? sa_force_drive(samples, gain, offset)
                                    : ra_force_drive(samples, rate_hz, cfg, offset);
    const IzhikevichParams prm =
        which == ForceReceptor::SA ? sa_mechano_params() : ra_mechano_params();
    return run_izhikevich(drive, rate_hz, prm, t0_us);
}

std::array<SpikeTrain, 3> encode_acceleration(const std::vector<float>& ax,
                                              const std::vector<float>& ay,
                                              const std::vector<float>& az, uint32_t rate_hz,
                                              const EncoderConfig& cfg, uint64_t t0_us) {
    cfg.validate();
    if (rate_hz != 250)
        throw ValidationError("encode_acceleration: acceleration channels run at 250 Hz");
    std::array<SpikeTrain, 3> out;
    const std::vector<float>* axes[3] = {&ax, &ay, &az};
    for (int a = 0; a < 3; ++a)
        out[a] = run_izhikevich(accel_drive(*axes[a], rate_hz, cfg), rate_hz,
                                ra_mechano_params(), t0_us);
    return out;
}

std::pair<SpikeTrain, SpikeTrain> encode_spindle(const std::vector<float>& L,
                                                 const std::vector<float>& Ldot, uint32_t rate_hz,
                                                 const EncoderConfig& cfg, uint64_t stream_seed_ia,
                                                 uint64_t stream_seed_ii, uint64_t t0_us) {
    cfg.validate();
    if (L.size() != Ldot.size())
        throw ValidationError("encode_spindle: L and Ldot streams differ in length");
    for (size_t k = 0; k < L.size(); ++k)
        if (!std::isfinite(L[k]) || !std::isfinite(Ldot[k]))
            throw ValidationError("encode_spindle: non-finite input");
    return {poisson_train(spindle_rates(L, &Ldot, cfg), rate_hz, stream_seed_ia, t0_us),
            poisson_train(spindle_rates(L, nullptr, cfg), rate_hz, stream_seed_ii, t0_us)};
}

SpikeTrain encode_temperature(const std::vector<float>& samples, uint32_t rate_hz,
                              const EncoderConfig& cfg, uint64_t t0_us) {
    cfg.validate();
    if (rate_hz != 250)
        throw ValidationError("encode_temperature: temperature channels run at 250 Hz");
    return run_izhikevich(thermo_drive(samples, cfg), rate_hz, ra_mechano_params(), t0_us);
}

// --- whole-trial encoder -----------------------------------------------------------

EventStream encode_trial(const SensorTrial& trial, const EncoderConfig& cfg, ModalityMask mask) {
    validate_trial(trial);
    cfg.validate();
    if (mask == 0) throw ValidationError("encode_trial: empty modality mask");

    const auto& ch = trial.channels;  // validated: id-ordered, correct rates
    uint64_t t0 = trial.start_offset_us;
    std::vector<SpikeEvent> events;

    std::vector<uint16_t> units;
    std::vector<std::vector<double>> drives;
    auto flush_bank = [&](const IzhikevichParams& prm, uint32_t rate) {
        run_izhikevich_bank(prm, rate, units, drives, t0, events);
        units.clear();
        drives.clear();
    };

    if (mask_has(mask, Modality::FingertipForce)) {
        for (int c = 0; c < 12; ++c) {
            units.push_back(static_cast<uint16_t>(2 * c));
            drives.push_back(sa_force_drive(ch[c].samples, cfg.fingertip_force_gain,
                                            cfg.fingertip_force_offset));
        }
        flush_bank(sa_mechano_params(), 350);
        for (int c = 0; c < 12; ++c) {
            units.push_back(static_cast<uint16_t>(2 * c + 1));
            drives.push_back(ra_force_drive(ch[c].samples, 350, cfg, cfg.fingertip_force_offset));
        }
        flush_bank(ra_mechano_params(), 350);
    }

    if (mask_has(mask, Modality::SkinForce)) {
        for (int c = kSkinForceCh0; c < kSkinForceCh0 + 21; ++c) {
            units.push_back(static_cast<uint16_t>(2 * c));
            drives.push_back(
                sa_force_drive(ch[c].samples, cfg.skin_force_gain, cfg.skin_force_offset));
        }
        flush_bank(sa_mechano_params(), 250);
    }

    // All remaining deterministic units share the RA parameter set at 250 Hz,
    // so they run as a single batch.
    if (mask_has(mask, Modality::SkinForce))
        for (int c = kSkinForceCh0; c < kSkinForceCh0 + 21; ++c) {
            units.push_back(static_cast<uint16_t>(2 * c + 1));
            drives.push_back(ra_force_drive(ch[c].samples, 250, cfg, cfg.skin_force_offset));
        }
    if (mask_has(mask, Modality::Acceleration))
        for (int c = kSkinAccelCh0; c < kSkinAccelCh0 + 21; ++c) {
            units.push_back(static_cast<uint16_t>(kAccelUnit0 + (c - kSkinAccelCh0)));
            drives.push_back(accel_drive(ch[c].samples, 250, cfg));
        }
    if (mask_has(mask, Modality::Temperature))
        for (int c = kSkinTempCh0; c < kSkinTempCh0 + 14; ++c) {
            units.push_back(static_cast<uint16_t>(kThermoUnit0 + (c - kSkinTempCh0)));
            drives.push_back(thermo_drive(ch[c].samples, cfg));
        }
    flush_bank(ra_mechano_params(), 250);

    if (mask_has(mask, Modality::Proprioception)) {
        for (int s = 0; s < 5; ++s) {
            const auto& L = ch[kStretchCh0 + 2 * s].samples;
            const auto& Ldot = ch[kStretchCh0 + 2 * s + 1].samples;
            uint16_t ia_id = static_cast<uint16_t>(kSpindleUnit0 + 2 * s);
            uint16_t ii_id = static_cast<uint16_t>(ia_id + 1);
            auto [ia, ii] = encode_spindle(L, Ldot, 150, cfg,
                                           hash_seq({cfg.seed, trial.seed, ia_id}),
                                           hash_seq({cfg.seed, trial.seed, ii_id}), t0);
            for (uint64_t t : ia.times_us) events.push_back({t, ia_id});
            for (uint64_t t : ii.times_us) events.push_back({t, ii_id});
        }
    }

    std::sort(events.begin(), events.end());
    EventStream out;
    out.unit_count = kNumUnits;
    out.events = std::move(events);
    return out;
}

}  // namespace spikesense
