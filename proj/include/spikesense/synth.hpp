#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spikesense/trial.hpp"

namespace spikesense {

// Synthetic stand-in for the hand's recorded experiments: a parametric grasp
// trial (object/pose classes) and a parametric hot-plate pressing trial
// (material classes).  Everything is a deterministic function of the spec and
// the seed.

// --- grasp trials ---------------------------------------------------------

struct ObjectSpec {
    int32_t object_id = 0;
    int32_t pose_id = 0;
    std::array<double, 4> fingertip_plateau_n{};   // per fingertip sensor
    std::array<double, 21> skin_plateau_n{};       // per skin cell
    std::array<double, 5> stretch_final{};         // per stretch sensor, L units
    double accel_amp = 3.0;                        // contact transient, m/s^2
    double accel_ring_tau_ms = 90.0;               // transient ring-down
    double stiffness_tau_ms = 120.0;               // force sigmoid rise width
    // modality noise, also used as the per-trial jitter scale on the spec
    // fields themselves (objects are not re-seated identically between trials)
    double noise_force_n = 0.05;
    double noise_accel = 0.1;
    double noise_temp_c = 0.1;
    double noise_stretch = 0.01;
};

void validate_object_spec(const ObjectSpec& spec);

// 6 s trial, phases approach/grasp/hold/release at 1/2/4/5 s.  Forces rise on
// a sigmoid of width stiffness_tau during the grasp phase, hold, and fall at
// release; stretch follows finger closure; acceleration rings at the grasp
// and release edges; temperature stays at ambient.
SensorTrial synth_grasp_trial(const ObjectSpec& spec, uint64_t seed);

// Grasp trial timing (seconds).
inline constexpr double kGraspPhaseS[4] = {1.0, 2.0, 4.0, 5.0};
inline constexpr double kGraspDurationS = 6.0;
inline constexpr double kAmbientC = 32.0;

// --- thermal (pressing) trials ---------------------------------------------

struct MaterialSpec {
    int32_t material_id = 0;
    std::string name;
    double tau_mat_s = 10.0;    // bulk conduction time constant
    double plate_c = 50.0;      // hot plate temperature
    double skin_c = 32.0;       // skin temperature at contact
    double noise_c = 0.08;      // sensor noise
    // Recontact response after a pressing micro-release: fraction of the
    // skin-plate gap recovered as an immediate interface jump (effusivity
    // ordering: conductive materials snap back, insulators crawl), and the
    // time the remaining gap takes to settle back onto the bulk curve.
    double contact_frac = 0.9;
    double settle_s = 0.5;
};

void validate_material_spec(const MaterialSpec& spec);

// 31 s pressing trial: fingertip and skin forces rise once and hold above the
// contact gate; skin temperature follows first-order conduction from skin_c
// toward plate_c with tau_mat once contact is made, interrupted by brief
// scheduled micro-releases of the press (dip toward ambient, then a
// material-dependent recontact jump).  Between events the temperature equals
// the conduction closed form exactly.
SensorTrial synth_thermal_trial(const MaterialSpec& spec, uint64_t seed);

// Thermal trial timing (seconds): contact onset, first event, event spacing,
// event count, and the release/hold/jump segment widths.
inline constexpr double kThermalDurationS = 31.0;
inline constexpr double kThermalContactS = 0.36;
inline constexpr double kThermalEventStartS = 3.0;
inline constexpr double kThermalEventSpacingS = 4.0;
inline constexpr int kThermalEventCount = 7;
inline constexpr double kThermalEventJitterS = 0.3;

// --- catalog ----------------------------------------------------------------

struct SynthCatalog {
    std::vector<ObjectSpec> objects;      // one entry per (object, pose) class
    std::vector<MaterialSpec> materials;
};

// 8 objects x 2-3 poses = 20 grasp classes plus 4 materials.  Objects 0-3
// keep 3 poses, 4-7 are rotationally symmetric and collapse to 2.
SynthCatalog default_catalog();

// Grasp class index of a spec within the default catalog ordering.
int catalog_class_index(const SynthCatalog& cat, int32_t object_id, int32_t pose_id);

// --- dataset ------------------------------------------------------------------

struct ManifestEntry {
    std::string path;  // relative to the manifest directory
    TrialLabels labels;
    uint64_t seed = 0;
    bool test = false;
};

struct DatasetManifest {
    uint64_t master_seed = 0;
    std::vector<ManifestEntry> entries;
};

// Generates every trial file plus `manifest.txt` under out_dir.  Per-trial
// seeds derive from hash(master seed, kind, class ids, trial index), so
// generation order (or parallelism) cannot change any trial.  The train/test
// split is a deterministic per-class 70/30 hash of the same stream.
DatasetManifest synth_dataset(const std::string& out_dir, const SynthCatalog& cat,
                              uint32_t trials_per_class, uint32_t thermal_trials_per_material,
                              uint64_t seed);

void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

}  // namespace spikesense
