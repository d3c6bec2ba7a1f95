#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spikesense/common.hpp"
#include "spikesense/synth.hpp"

using namespace spikesense;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "spikesense_synth_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const char* name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ObjectSpec quiet(ObjectSpec s) {
    s.noise_force_n = s.noise_accel = s.noise_temp_c = s.noise_stretch = 0.0;
    return s;
}

MaterialSpec quiet(MaterialSpec s) {
    s.noise_c = 0.0;
    return s;
}

double window_mean(const ChannelSamples& ch, double t0, double t1) {
    size_t a = static_cast<size_t>(t0 * ch.rate_hz), b = static_cast<size_t>(t1 * ch.rate_hz);
    double s = 0.0;
    for (size_t i = a; i < b; ++i) s += ch.samples[i];
    return s / static_cast<double>(b - a);
}

double window_abs_mean(const ChannelSamples& ch, double t0, double t1) {
    size_t a = static_cast<size_t>(t0 * ch.rate_hz), b = static_cast<size_t>(t1 * ch.rate_hz);
    double s = 0.0;
    for (size_t i = a; i < b; ++i) s += std::abs(ch.samples[i]);
    return s / static_cast<double>(b - a);
}

}  // namespace

TEST_CASE("grasp trials are deterministic in the seed") {
    ObjectSpec spec = default_catalog().objects[5];
    SensorTrial a = synth_grasp_trial(spec, 99);
    SensorTrial b = synth_grasp_trial(spec, 99);
    REQUIRE(a.channels.size() == b.channels.size());
    for (size_t c = 0; c < a.channels.size(); ++c)
        CHECK(a.channels[c].samples == b.channels[c].samples);

    SensorTrial d = synth_grasp_trial(spec, 100);
    CHECK(a.channels[0].samples != d.channels[0].samples);

    // with all noise at zero the seed has nothing left to influence
    SensorTrial q1 = synth_grasp_trial(quiet(spec), 1);
    SensorTrial q2 = synth_grasp_trial(quiet(spec), 2);
    for (size_t c = 0; c < q1.channels.size(); ++c)
        CHECK(q1.channels[c].samples == q2.channels[c].samples);
}

TEST_CASE("grasp trial structure") {
    SensorTrial tr = synth_grasp_trial(default_catalog().objects[0], 7);
    CHECK(tr.duration_us == 6'000'000);
    CHECK(tr.phase_marks_us == std::array<uint64_t, 4>{1'000'000, 2'000'000, 4'000'000,
                                                       5'000'000});
    REQUIRE(tr.channels.size() == static_cast<size_t>(kNumChannels));
    for (int c = 0; c < kNumChannels; ++c) {
        CHECK(tr.channels[c].channel_id == channel_table()[c].channel_id);
        CHECK(tr.channels[c].rate_hz == channel_table()[c].rate_hz);
    }
}

TEST_CASE("zero-noise hold phase reproduces the commanded plateaus") {
    ObjectSpec spec = quiet(default_catalog().objects[9]);
    SensorTrial tr = synth_grasp_trial(spec, 1);

    for (int s = 0; s < 4; ++s) {  // fingertip z channels 2, 5, 8, 11
        double m = window_mean(tr.channels[kFingertipForceCh0 + 3 * s + 2], 2.5, 4.0);
        CHECK(m == doctest::Approx(spec.fingertip_plateau_n[s]).epsilon(0.01));
    }
    for (int c = 0; c < 21; ++c) {
        double m = window_mean(tr.channels[kSkinForceCh0 + c], 2.5, 4.0);
        CHECK(m == doctest::Approx(spec.skin_plateau_n[c]).epsilon(0.01));
    }
    for (int s = 0; s < 5; ++s) {  // stretch L channels at kStretchCh0, step 2
        double m = window_mean(tr.channels[kStretchCh0 + 2 * s], 2.5, 4.0);
        CHECK(m == doctest::Approx(spec.stretch_final[s]).epsilon(0.01));
    }
    // temperature pinned at ambient
    for (int c = 0; c < 14; ++c)
        for (float v : tr.channels[kSkinTempCh0 + c].samples)
            CHECK(v == doctest::Approx(kAmbientC));
}

TEST_CASE("acceleration transients sit at the grasp and release edges") {
    SensorTrial tr = synth_grasp_trial(quiet(default_catalog().objects[2]), 1);
    const auto& ax = tr.channels[kSkinAccelCh0];  // site 0, x axis
    double at_grasp = window_abs_mean(ax, 1.3, 1.8);
    double at_release = window_abs_mean(ax, 4.3, 4.8);
    double at_hold = window_abs_mean(ax, 2.5, 4.0);
    CHECK(at_grasp > 20.0 * at_hold);
    CHECK(at_release > 10.0 * at_hold);
}

TEST_CASE("noise level scales trial-to-trial spread") {
    ObjectSpec lo = default_catalog().objects[0];
    lo.noise_force_n = 0.02;
    ObjectSpec hi = lo;
    hi.noise_force_n = 0.10;
    auto spread = [](const ObjectSpec& s) {
        std::vector<double> means;
        for (uint64_t seed = 1; seed <= 8; ++seed) {
            SensorTrial tr = synth_grasp_trial(s, seed);
            means.push_back(window_mean(tr.channels[2], 2.5, 4.0));
        }
        double m = 0.0, v = 0.0;
        for (double x : means) m += x;
        m /= means.size();
        for (double x : means) v += (x - m) * (x - m);
        return std::sqrt(v / means.size());
    };
    CHECK(spread(hi) > 2.0 * spread(lo));
}

TEST_CASE("catalog poses are separable by construction") {
    SynthCatalog cat = default_catalog();
    REQUIRE(cat.objects.size() == 20);
    for (size_t i = 0; i < cat.objects.size(); ++i)
        CHECK(catalog_class_index(cat, cat.objects[i].object_id, cat.objects[i].pose_id) ==
              static_cast<int>(i));
    CHECK_THROWS_AS((void)catalog_class_index(cat, 99, 0), ValidationError);

    // poses of one object must differ in some field by > 3x its noise sigma
    for (size_t i = 0; i < cat.objects.size(); ++i)
        for (size_t j = i + 1; j < cat.objects.size(); ++j) {
            const auto& a = cat.objects[i];
            const auto& b = cat.objects[j];
            if (a.object_id != b.object_id) continue;
            double best = 0.0;
            for (int k = 0; k < 5; ++k)
                best = std::max(best, std::abs(a.stretch_final[k] - b.stretch_final[k]) /
                                          a.noise_stretch);
            for (int k = 0; k < 21; ++k)
                best = std::max(best, std::abs(a.skin_plateau_n[k] - b.skin_plateau_n[k]) /
                                          a.noise_force_n);
            CHECK(best > 3.0);
        }
}

TEST_CASE("zero-noise class centroids are pairwise distinct") {
    SynthCatalog cat = default_catalog();
    std::vector<std::vector<double>> centroid;
    for (const auto& spec : cat.objects) {
        SensorTrial tr = synth_grasp_trial(quiet(spec), 1);
        std::vector<double> f;
        for (int c = 0; c < kNumChannels; ++c) {
            if (channel_table()[c].kind == ChannelKind::SkinAcceleration ||
                channel_table()[c].kind == ChannelKind::SkinTemperature)
                continue;
            f.push_back(window_mean(tr.channels[c], 2.5, 4.0));
        }
        centroid.push_back(std::move(f));
    }
    for (size_t i = 0; i < centroid.size(); ++i)
        for (size_t j = i + 1; j < centroid.size(); ++j) {
            double linf = 0.0;
            for (size_t k = 0; k < centroid[i].size(); ++k)
                linf = std::max(linf, std::abs(centroid[i][k] - centroid[j][k]));
            CHECK(linf > 0.03);
        }
}

TEST_CASE("thermal trials follow the conduction closed form between events") {
    for (const MaterialSpec& raw : default_catalog().materials) {
        MaterialSpec spec = quiet(raw);
        SensorTrial tr = synth_thermal_trial(spec, 5);
        // at one bulk time constant after contact (a point no micro-release
        // window can reach), T = plate - (plate - skin)/e exactly
        const auto& ch = tr.channels[kSkinTempCh0];
        size_t idx = static_cast<size_t>((kThermalContactS + spec.tau_mat_s) * ch.rate_hz);
        REQUIRE(idx < ch.samples.size());
        double expect = spec.plate_c - (spec.plate_c - spec.skin_c) / std::exp(1.0);
        CHECK(ch.samples[idx] == doctest::Approx(expect).epsilon(1e-4));
        // before contact the skin reads its own temperature
        CHECK(ch.samples[0] == doctest::Approx(spec.skin_c).epsilon(1e-6));
    }
}

TEST_CASE("thermal trial structure and contact gating") {
    MaterialSpec spec = quiet(default_catalog().materials[0]);
    SensorTrial tr = synth_thermal_trial(spec, 3);
    CHECK(tr.duration_us == 31'000'000);
    CHECK(tr.phase_marks_us[0] == 360'000);

    // fingertip z force: sensor noise before contact (force noise is fixed at
    // 0.05 N for pressing trials), well above the 0.2 N gate after
    const auto& fz = tr.channels[2];
    CHECK(window_abs_mean(fz, 0.0, 0.25) < 0.1);
    CHECK(window_mean(fz, 0.5, 30.0) > 1.0);

    SensorTrial again = synth_thermal_trial(spec, 3);
    for (size_t c = 0; c < tr.channels.size(); ++c)
        CHECK(tr.channels[c].samples == again.channels[c].samples);
}

TEST_CASE("an insulating plate leaves the trace at skin temperature") {
    MaterialSpec spec = quiet(default_catalog().materials[3]);
    spec.tau_mat_s = 1e6;  // effectively no conduction
    SensorTrial tr = synth_thermal_trial(spec, 9);
    for (float v : tr.channels[kSkinTempCh0].samples)
        CHECK(std::abs(v - spec.skin_c) < 0.01);
}

TEST_CASE("spec validation rejects nonsense") {
    ObjectSpec o = default_catalog().objects[0];
    o.fingertip_plateau_n[1] = -0.5;
    CHECK_THROWS_AS((void)synth_grasp_trial(o, 1), ValidationError);
    o = default_catalog().objects[0];
    o.stiffness_tau_ms = 0.0;
    CHECK_THROWS_AS(validate_object_spec(o), ValidationError);
    o = default_catalog().objects[0];
    o.noise_accel = -1.0;
    CHECK_THROWS_AS(validate_object_spec(o), ValidationError);

    MaterialSpec m = default_catalog().materials[0];
    m.tau_mat_s = 0.0;
    CHECK_THROWS_AS(validate_material_spec(m), ValidationError);
    m = default_catalog().materials[0];
    m.contact_frac = 1.5;
    CHECK_THROWS_AS(validate_material_spec(m), ValidationError);
    m = default_catalog().materials[0];
    m.plate_c = 200.0;
    CHECK_THROWS_AS(validate_material_spec(m), ValidationError);
}

TEST_CASE("dataset generation writes a reproducible manifest") {
    TempDir tmp;
    SynthCatalog cat = default_catalog();
    DatasetManifest m = synth_dataset(tmp.sub("a"), cat, 4, 2, 1234);

    REQUIRE(m.entries.size() == 20 * 4 + 4 * 2);
    CHECK(m.master_seed == 1234);
    // per grasp class: 7*4/10 = 2 train, 2 test
    for (const auto& spec : cat.objects) {
        int train = 0, test = 0;
        for (const auto& e : m.entries)
            if (e.labels.object_id == spec.object_id && e.labels.pose_id == spec.pose_id)
                (e.test ? test : train)++;
        CHECK(train == 2);
        CHECK(test == 2);
    }
    for (const auto& e : m.entries) {
        CHECK(fs::exists(fs::path(tmp.sub("a")) / e.path));
    }

    // read back identical fields
    DatasetManifest r = read_manifest(tmp.sub("a") + "/manifest.txt");
    REQUIRE(r.entries.size() == m.entries.size());
    CHECK(r.master_seed == m.master_seed);
    for (size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(r.entries[i].path == m.entries[i].path);
        CHECK(r.entries[i].seed == m.entries[i].seed);
        CHECK(r.entries[i].test == m.entries[i].test);
        CHECK(r.entries[i].labels.object_id == m.entries[i].labels.object_id);
        CHECK(r.entries[i].labels.material_id == m.entries[i].labels.material_id);
        CHECK(r.entries[i].labels.trial_index == m.entries[i].labels.trial_index);
    }

    // a stored trial decodes with the labels and seed promised by its entry
    const auto& e0 = m.entries[0];
    SensorTrial t0 = read_trial_file(tmp.sub("a") + "/" + e0.path);
    CHECK(t0.labels.object_id == e0.labels.object_id);
    CHECK(t0.labels.trial_index == e0.labels.trial_index);
    CHECK(t0.seed == e0.seed);

    // regeneration is byte-identical, manifest and trial files alike
    synth_dataset(tmp.sub("b"), cat, 4, 2, 1234);
    CHECK(slurp(tmp.sub("a") + "/manifest.txt") == slurp(tmp.sub("b") + "/manifest.txt"));
    CHECK(slurp(tmp.sub("a") + "/" + e0.path) == slurp(tmp.sub("b") + "/" + e0.path));
    const auto& last = m.entries.back();
    CHECK(slurp(tmp.sub("a") + "/" + last.path) == slurp(tmp.sub("b") + "/" + last.path));
}

TEST_CASE("dataset generation rejects degenerate requests") {
    TempDir tmp;
    SynthCatalog cat;
    CHECK_THROWS_AS((void)synth_dataset(tmp.sub("x"), cat, 4, 2, 1), ValidationError);
    cat = default_catalog();
    CHECK_THROWS_AS((void)synth_dataset(tmp.sub("x"), cat, 0, 2, 1), ValidationError);
    CHECK_THROWS_AS((void)synth_dataset(tmp.sub("x"), cat, 4, 0, 1), ValidationError);
}

TEST_CASE("manifest parser reports malformed input") {
    TempDir tmp;
    auto put = [&](const char* name, const char* text) {
        std::ofstream os(tmp.sub(name));
        os << text;
        return tmp.sub(name);
    };
    CHECK_THROWS_AS((void)read_manifest(tmp.sub("absent.txt")), ValidationError);
    CHECK_THROWS_AS((void)read_manifest(put("h.txt", "# other file\n")), ValidationError);
    CHECK_THROWS_AS((void)read_manifest(put("s.txt", "# spikesense dataset manifest v1\nnope\n")),
                    ValidationError);
    CHECK_THROWS_AS(
        (void)read_manifest(put(
            "f.txt", "# spikesense dataset manifest v1\nseed 1\na.strl,0,0,-1,0,7\n")),
        ValidationError);
    CHECK_THROWS_AS(
        (void)read_manifest(put(
            "w.txt",
            "# spikesense dataset manifest v1\nseed 1\na.strl,0,0,-1,0,7,maybe\n")),
        ValidationError);
}
