#include "spikesense/synth.hpp"

#include <cmath>

#include "spikesense/common.hpp"

namespace spikesense {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double dlogistic(double x) {
    double s = logistic(x);
    return s * (1.0 - s);
}

// rise-and-hold-and-fall envelope, ~1 between the two centers
double grasp_envelope(double t, double rise_c, double fall_c, double w) {
    return logistic((t - rise_c) / w) * (1.0 - logistic((t - fall_c) / w));
}

ChannelSamples make_channel(uint16_t id, uint32_t rate, uint64_t dur_us) {
    ChannelSamples ch;
    ch.channel_id = id;
    ch.rate_hz = rate;
    ch.samples.resize(expected_samples(dur_us, rate));
    return ch;
}

double ring(double t, double t0, double amp, double tau_s) {
    if (t < t0) return 0.0;
    double x = t - t0;
    return amp * std::exp(-x / tau_s) * std::sin(2.0 * M_PI * 35.0 * x);
}

}  // namespace

void validate_object_spec(const ObjectSpec& spec) {
    for (double f : spec.fingertip_plateau_n)
        if (!(f >= 0.0)) throw ValidationError("fingertip plateau must be >= 0");
    for (double f : spec.skin_plateau_n)
        if (!(f >= 0.0)) throw ValidationError("skin plateau must be >= 0");
    for (double l : spec.stretch_final)
        if (!(l >= 0.0)) throw ValidationError("stretch level must be >= 0");
    if (!(spec.accel_amp >= 0.0)) throw ValidationError("accel amplitude must be >= 0");
    if (!(spec.accel_ring_tau_ms > 0.0) || !(spec.stiffness_tau_ms > 0.0))
        throw ValidationError("time constants must be > 0");
    if (spec.noise_force_n < 0 || spec.noise_accel < 0 || spec.noise_temp_c < 0 ||
        spec.noise_stretch < 0)
        throw ValidationError("noise levels must be >= 0");
}

SensorTrial synth_grasp_trial(const ObjectSpec& spec, uint64_t seed) {
    validate_object_spec(spec);
    Rng rng(seed);

    // the object is not re-seated identically between trials: jitter the spec
    // itself at the modality noise scale, then add per-sample sensor noise
    ObjectSpec s = spec;
    for (auto& f : s.fingertip_plateau_n) f = std::max(0.0, f + rng.normal(0, spec.noise_force_n));
    for (auto& f : s.skin_plateau_n) f = std::max(0.0, f + rng.normal(0, spec.noise_force_n));
    for (auto& l : s.stretch_final) l = std::max(0.0, l + rng.normal(0, spec.noise_stretch));
    s.accel_amp = std::max(0.0, s.accel_amp + rng.normal(0, spec.noise_accel));

    SensorTrial trial;
    trial.labels = {spec.object_id, spec.pose_id, -1, 0};
    trial.seed = seed;
    trial.duration_us = static_cast<uint64_t>(kGraspDurationS * 1e6);
    for (int i = 0; i < 4; ++i)
        trial.phase_marks_us[i] = static_cast<uint64_t>(kGraspPhaseS[i] * 1e6);

    const double rise_c = 0.5 * (kGraspPhaseS[0] + kGraspPhaseS[1]);  // mid-grasp
    const double fall_c = 0.5 * (kGraspPhaseS[2] + kGraspPhaseS[3]);  // mid-release
    const double w = spec.stiffness_tau_ms / 1000.0 / 4.0;
    const double axis_force[3] = {0.15, 0.10, 1.0};  // shear x, shear y, normal z
    const double axis_accel[3] = {1.0, 0.7, 0.45};
    const double ring_tau = 0.75 * spec.accel_ring_tau_ms / 1000.0;
    const double stretch_w = 0.12;

    trial.channels.reserve(kNumChannels);
    for (const auto& d : channel_table()) {
        auto ch = make_channel(d.channel_id, d.rate_hz, trial.duration_us);
        const size_t n = ch.samples.size();
        for (size_t i = 0; i < n; ++i) {
            double t = static_cast<double>(i) / d.rate_hz;
            double v = 0.0;
            switch (d.kind) {
                case ChannelKind::FingertipForce:
                    v = s.fingertip_plateau_n[d.body_site] * axis_force[d.axis - 'x'] *
                            grasp_envelope(t, rise_c, fall_c, w) +
                        rng.normal(0, spec.noise_force_n);
                    break;
                case ChannelKind::SkinForce:
                    v = s.skin_plateau_n[d.body_site] * grasp_envelope(t, rise_c, fall_c, w) +
                        rng.normal(0, spec.noise_force_n);
                    break;
                case ChannelKind::SkinAcceleration:
                    v = ring(t, rise_c - 0.05, s.accel_amp * axis_accel[d.axis - 'x'] *
                                                   (1.0 - 0.04 * d.body_site),
                             ring_tau) +
                        ring(t, fall_c, 0.6 * s.accel_amp * axis_accel[d.axis - 'x'] *
                                            (1.0 - 0.04 * d.body_site),
                             ring_tau) +
                        rng.normal(0, spec.noise_accel);
                    break;
                case ChannelKind::SkinTemperature:
                    v = kAmbientC + rng.normal(0, spec.noise_temp_c);
                    break;
                case ChannelKind::Stretch: {
                    double a = (t - (rise_c - 0.1)) / stretch_w;
                    double b = (t - (fall_c + 0.1)) / stretch_w;
                    if (d.axis == 'L')
                        v = s.stretch_final[d.body_site] * logistic(a) * (1.0 - logistic(b)) +
                            rng.normal(0, spec.noise_stretch);
                    else
                        v = s.stretch_final[d.body_site] *
                                (dlogistic(a) * (1.0 - logistic(b)) -
                                 logistic(a) * dlogistic(b)) /
                                stretch_w +
                            rng.normal(0, spec.noise_stretch);
                    break;
                }
            }
            ch.samples[i] = static_cast<float>(v);
        }
        trial.channels.push_back(std::move(ch));
    }
    validate_trial(trial);
    return trial;
}

void validate_material_spec(const MaterialSpec& spec) {
    if (!(spec.tau_mat_s > 0.0)) throw ValidationError("tau_mat must be > 0");
    if (!(spec.settle_s > 0.0)) throw ValidationError("settle time must be > 0");
    if (spec.contact_frac < 0.0 || spec.contact_frac > 1.0)
        throw ValidationError("contact_frac must be in [0,1]");
    if (spec.noise_c < 0.0) throw ValidationError("noise level must be >= 0");
    if (spec.plate_c < -20.0 || spec.plate_c > 120.0 || spec.skin_c < -20.0 ||
        spec.skin_c > 120.0)
        throw ValidationError("temperatures outside the sensor range");
}

SensorTrial synth_thermal_trial(const MaterialSpec& spec, uint64_t seed) {
    validate_material_spec(spec);
    Rng rng(seed);

    // micro-release schedule, in time since contact
    std::array<double, kThermalEventCount> events{};
    for (int k = 0; k < kThermalEventCount; ++k)
        events[k] = kThermalEventStartS + kThermalEventSpacingS * k +
                    rng.uniform(-kThermalEventJitterS, kThermalEventJitterS);

    const double t_fall = 0.3, t_hold = 0.2, t_jump = 0.06;
    auto conduction = [&](double tc) {
        return spec.plate_c - (spec.plate_c - spec.skin_c) * std::exp(-tc / spec.tau_mat_s);
    };
    // temperature at time-since-contact tc: the conduction closed form,
    // overridden inside a micro-release window (cosine dip to near skin
    // temperature, hold, recontact jump of contact_frac of the gap, cosine
    // settle back onto the bulk curve)
    auto skin_temp = [&](double tc) {
        if (tc <= 0.0) return spec.skin_c;
        double v = conduction(tc);
        for (double e : events) {
            double x = tc - e;
            if (x <= 0.0 || x >= t_fall + t_hold + t_jump + spec.settle_s) continue;
            double bottom = spec.skin_c + 0.03 * (conduction(e) - spec.skin_c);
            double r = e + t_fall + t_hold;  // recontact
            double jump = bottom + spec.contact_frac * (conduction(r) - bottom);
            if (x < t_fall)
                v += (bottom - v) * 0.5 * (1.0 - std::cos(M_PI * x / t_fall));
            else if (x < t_fall + t_hold)
                v = bottom;
            else if (x < t_fall + t_hold + t_jump)
                v = bottom + (jump - bottom) * 0.5 *
                                 (1.0 - std::cos(M_PI * (x - t_fall - t_hold) / t_jump));
            else
                v += (jump - conduction(r + t_jump)) * 0.5 *
                     (1.0 + std::cos(M_PI * (x - t_fall - t_hold - t_jump) / spec.settle_s));
        }
        return v;
    };

    SensorTrial trial;
    trial.labels = {-1, -1, spec.material_id, 0};
    trial.seed = seed;
    trial.duration_us = static_cast<uint64_t>(kThermalDurationS * 1e6);
    // single press-and-hold: approach ends at contact, then one long hold
    trial.phase_marks_us = {static_cast<uint64_t>(kThermalContactS * 1e6),
                            static_cast<uint64_t>(1e6), trial.duration_us, trial.duration_us};

    const double press_w = 0.02;
    const double axis_force[3] = {0.15, 0.10, 1.0};
    const double tip_mult[4] = {1.0, 0.9, 1.1, 0.95};

    trial.channels.reserve(kNumChannels);
    for (const auto& d : channel_table()) {
        auto ch = make_channel(d.channel_id, d.rate_hz, trial.duration_us);
        const size_t n = ch.samples.size();
        for (size_t i = 0; i < n; ++i) {
            double t = static_cast<double>(i) / d.rate_hz;
            double press = logistic((t - kThermalContactS) / press_w);
            double v = 0.0;
            switch (d.kind) {
                case ChannelKind::FingertipForce:
                    v = 1.5 * tip_mult[d.body_site] * axis_force[d.axis - 'x'] * press +
                        rng.normal(0, 0.05);
                    break;
                case ChannelKind::SkinForce:
                    v = 1.0 * press + rng.normal(0, 0.05);
                    break;
                case ChannelKind::SkinAcceleration:
                    v = rng.normal(0, 0.1);
                    break;
                case ChannelKind::SkinTemperature:
                    v = skin_temp(t - kThermalContactS) + rng.normal(0, spec.noise_c);
                    break;
                case ChannelKind::Stretch:
                    v = (d.axis == 'L' ? 0.02 * press : 0.0) + rng.normal(0, 0.002);
                    break;
            }
            ch.samples[i] = static_cast<float>(v);
        }
        trial.channels.push_back(std::move(ch));
    }
    validate_trial(trial);
    return trial;
}

SynthCatalog default_catalog() {
    SynthCatalog cat;
    const double amp_tiers[3] = {2.0, 3.5, 5.0};
    const double ring_tiers[3] = {60.0, 95.0, 130.0};
    const double stiff_tiers[4] = {80.0, 120.0, 170.0, 220.0};
    const double tip_mult[4] = {1.0, 0.9, 1.1, 0.95};
    for (int obj = 0; obj < 8; ++obj) {
        int poses = obj < 4 ? 3 : 2;  // objects 4-7 are rotationally symmetric
        for (int pose = 0; pose < poses; ++pose) {
            ObjectSpec s;
            s.object_id = obj;
            s.pose_id = pose;
            double base_f = 0.8 + 0.25 * obj;
            for (int k = 0; k < 4; ++k) s.fingertip_plateau_n[k] = base_f * tip_mult[k];
            double base_s = 0.5 + 0.15 * obj;
            // pose parity rotates the contact patch pattern; poses 0 and 2
            // share it, so grip force alone cannot fully resolve pose and the
            // stretch code below carries the rest
            for (int c = 0; c < 21; ++c)
                s.skin_plateau_n[c] =
                    base_s * (0.4 + 0.05 * ((c + 2 * (pose % 2) + 3 * obj) % 5));
            for (int k = 0; k < 5; ++k)
                s.stretch_final[k] =
                    0.06 + 0.06 * pose + 0.012 * ((k + obj) % 3) + 0.003 * obj;
            s.accel_amp = amp_tiers[obj % 3];
            s.accel_ring_tau_ms = ring_tiers[obj / 3];
            s.stiffness_tau_ms = stiff_tiers[obj % 4];
            cat.objects.push_back(s);
        }
    }
    cat.materials = {
        {0, "metal", 2.0, 50.0, 32.0, 0.08, 0.95, 0.3},
        {1, "ceramic", 6.0, 50.0, 32.0, 0.08, 0.90, 0.5},
        {2, "pvc", 14.0, 50.0, 32.0, 0.08, 0.85, 0.8},
        // plate temperature raised so the slow bulk conduction still matches
        // pvc's mean thermoreceptor rate; the weak recontact jump is what
        // keeps the two apart (differentiator side)
        {3, "wood", 30.0, 69.0, 32.0, 0.08, 0.30, 1.5},
    };
    return cat;
}

int catalog_class_index(const SynthCatalog& cat, int32_t object_id, int32_t pose_id) {
    for (size_t i = 0; i < cat.objects.size(); ++i)
        if (cat.objects[i].object_id == object_id && cat.objects[i].pose_id == pose_id)
            return static_cast<int>(i);
    throw ValidationError(strfmt("no catalog class for object %d pose %d", object_id, pose_id));
}

}  // namespace spikesense
