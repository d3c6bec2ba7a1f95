#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spikesense/common.hpp"
#include "spikesense/synth.hpp"

namespace spikesense {

namespace {

// stable per-class 70/30 assignment: trials ranked by a hash of (master,
// class, index); the lowest 70% train
std::vector<bool> split_test_flags(uint64_t master, uint64_t class_key, uint32_t n) {
    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return hash_seq({master, 0x73706C69ULL, class_key, a}) <
               hash_seq({master, 0x73706C69ULL, class_key, b});
    });
    uint32_t n_train = 7 * n / 10;
    std::vector<bool> test(n, true);
    for (uint32_t i = 0; i < n_train; ++i) test[order[i]] = false;
    return test;
}

uint64_t grasp_class_key(const ObjectSpec& s) {
    return hash_seq({1u, static_cast<uint64_t>(s.object_id), static_cast<uint64_t>(s.pose_id)});
}

}  // namespace

DatasetManifest synth_dataset(const std::string& out_dir, const SynthCatalog& cat,
                              uint32_t trials_per_class, uint32_t thermal_trials_per_material,
                              uint64_t seed) {
    if (cat.objects.empty() && cat.materials.empty())
        throw ValidationError("empty catalog");
    if (trials_per_class == 0 && !cat.objects.empty())
        throw ValidationError("trials-per-class must be > 0");
    if (thermal_trials_per_material == 0 && !cat.materials.empty())
        throw ValidationError("thermal trial count must be > 0");

    std::error_code ec;
    std::filesystem::create_directories(out_dir + "/trials", ec);
    if (ec) throw ValidationError("cannot create " + out_dir + "/trials: " + ec.message());

    DatasetManifest m;
    m.master_seed = seed;
    for (const auto& spec : cat.objects) {
        auto test = split_test_flags(seed, grasp_class_key(spec), trials_per_class);
        for (uint32_t t = 0; t < trials_per_class; ++t) {
            ManifestEntry e;
            e.path = strfmt("trials/g%02d_p%d_%03u.strl", spec.object_id, spec.pose_id, t);
            e.labels = {spec.object_id, spec.pose_id, -1, t};
            e.seed = hash_seq({seed, 0x67u, static_cast<uint64_t>(spec.object_id),
                               static_cast<uint64_t>(spec.pose_id), t});
            e.test = test[t];
            m.entries.push_back(std::move(e));
        }
    }
    for (const auto& spec : cat.materials) {
        auto test = split_test_flags(
            seed, hash_seq({2u, static_cast<uint64_t>(spec.material_id)}),
            thermal_trials_per_material);
        for (uint32_t t = 0; t < thermal_trials_per_material; ++t) {
            ManifestEntry e;
            e.path = strfmt("trials/m%d_%03u.strl", spec.material_id, t);
            e.labels = {-1, -1, spec.material_id, t};
            e.seed = hash_seq({seed, 0x74u, static_cast<uint64_t>(spec.material_id), t});
            e.test = test[t];
            m.entries.push_back(std::move(e));
        }
    }

    // per-trial seeds make generation order irrelevant; parallelism is free
    parallel_for(m.entries.size(), [&](size_t i) {
        const auto& e = m.entries[i];
        SensorTrial trial;
        if (e.labels.material_id >= 0) {
            const MaterialSpec* spec = nullptr;
            for (const auto& s : cat.materials)
                if (s.material_id == e.labels.material_id) spec = &s;
            trial = synth_thermal_trial(*spec, e.seed);
        } else {
            const auto& spec =
                cat.objects[catalog_class_index(cat, e.labels.object_id, e.labels.pose_id)];
            trial = synth_grasp_trial(spec, e.seed);
        }
        trial.labels.trial_index = e.labels.trial_index;
        write_trial_file(out_dir + "/" + e.path, trial);
    });

    write_manifest(out_dir + "/manifest.txt", m);
    return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write " + path);
    os << "# spikesense dataset manifest v1\n";
    os << "seed " << m.master_seed << "\n";
    for (const auto& e : m.entries)
        os << e.path << ',' << e.labels.object_id << ',' << e.labels.pose_id << ','
           << e.labels.material_id << ',' << e.labels.trial_index << ',' << e.seed << ','
           << (e.test ? "test" : "train") << "\n";
    if (!os.flush()) throw ValidationError("write failed for " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open " + path);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw ValidationError(strfmt("%s:%d: %s", path.c_str(), lineno, why.c_str()));
    };
    if (!std::getline(is, line) || line != "# spikesense dataset manifest v1")
        throw ValidationError(path + ": not a dataset manifest");
    lineno = 1;
    DatasetManifest m;
    if (!std::getline(is, line) || line.rfind("seed ", 0) != 0) fail("missing seed line");
    ++lineno;
    m.master_seed = std::strtoull(line.c_str() + 5, nullptr, 10);
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 7) fail("expected 7 comma-separated fields");
        ManifestEntry e;
        e.path = f[0];
        e.labels.object_id = static_cast<int32_t>(std::strtol(f[1].c_str(), nullptr, 10));
        e.labels.pose_id = static_cast<int32_t>(std::strtol(f[2].c_str(), nullptr, 10));
        e.labels.material_id = static_cast<int32_t>(std::strtol(f[3].c_str(), nullptr, 10));
        e.labels.trial_index = static_cast<uint32_t>(std::strtoul(f[4].c_str(), nullptr, 10));
        e.seed = std::strtoull(f[5].c_str(), nullptr, 10);
        if (f[6] == "test")
            e.test = true;
        else if (f[6] == "train")
            e.test = false;
        else
            fail("split must be train or test");
        m.entries.push_back(std::move(e));
    }
    return m;
}

}  // namespace spikesense
