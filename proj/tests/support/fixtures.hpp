#pragma once

// Shared builders for planted-mock scenarios: a throwaway workspace with a
// manifest on disk and a fully-populated RunConfig pointing the mock backend
// at orthogonal group style axes.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "archilens/config.hpp"
#include "archilens/dataset.hpp"
#include "archilens/digest.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Unique scratch directory, deleted when the fixture goes out of scope.
class TempDir {
  public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        const auto stamp = static_cast<std::uint64_t>(
            std::chrono::steady_clock::now().time_since_epoch().count());
        path_ = fs::temp_directory_path() /
                ("archilens-test-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)) + "-" + std::to_string(stamp));
        fs::create_directories(path_);
    }
    TempDir(TempDir&& other) noexcept : path_(std::move(other.path_)) { other.path_.clear(); }
    TempDir& operator=(TempDir&& other) noexcept {
        if (this != &other) {
            cleanup();
            path_ = std::move(other.path_);
            other.path_.clear();
        }
        return *this;
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() { cleanup(); }

    const fs::path& path() const { return path_; }

  private:
    void cleanup() {
        if (path_.empty()) return;
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path path_;
};

struct GroupSpec {
    std::string name;
    std::size_t axis = 0;
    std::size_t image_count = 8;
};

/// Deterministic fake content hash for a manifest entry (a real digest, so
/// it passes the 64-lowercase-hex validation).
inline std::string image_hash(const std::string& group, std::size_t index) {
    return archilens::sha256_hex("image:" + group + ":" + std::to_string(index));
}

/// The description planted onto a group's style axis. Variants let one
/// group carry several equivalent planted texts.
inline std::string planted_text(const std::string& group, std::size_t variant = 1) {
    return "hallmark motif " + std::to_string(variant) + " of " + group + " imagery";
}

/// Write a v1 manifest for the given groups; returns the file path.
inline fs::path write_manifest(const fs::path& dir, const std::vector<GroupSpec>& groups) {
    const fs::path file = dir / "manifest.tsv";
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << "archdiff-manifest v1\n";
    out << "#! source=test-fixture\n";
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.image_count; ++i) {
            out << g.name << "_" << i << '\t' << g.name << '\t' << "mock://" << g.name << '/'
                << i << '\t' << image_hash(g.name, i) << '\n';
        }
    }
    return file;
}

struct ScenarioOptions {
    std::vector<GroupSpec> groups = {{"groupA", 0, 8}, {"groupB", 1, 8}};
    std::size_t dims = 16;
    double noise_sigma = 0.1;
    double embedding_scale = 1.0;
    double vqa_threshold = 0.5;
    std::uint64_t mock_seed = 7;
    std::uint64_t master_seed = 42;
    std::size_t n_per_group = 8;
    std::size_t k_candidates = 5;
    std::size_t planted_variants = 1;  // planted texts per group
    std::string strategy = "text-based";
    std::string matcher = "embedding";
    std::string pair_mode = "ordered-no-self";
    bool enable_cache = true;
    bool generic_mock = false;  // true: no planted axes, pure seeded noise
};

struct Scenario {
    TempDir dir;
    fs::path manifest_file;
    archilens::DatasetManifest manifest;
    archilens::RunConfig config;
};

/// Build a workspace + manifest + config for the mock backend. Noise axes
/// follow the fixed convention 0..11 on 16 dims (covering the group axes,
/// with 12..15 reserved for generic text), scaled down for smaller dims.
inline Scenario make_scenario(const ScenarioOptions& opt = {}) {
    Scenario s;
    s.manifest_file = write_manifest(s.dir.path(), opt.groups);
    s.manifest = archilens::load_manifest(s.manifest_file);

    archilens::RunConfig& c = s.config;
    c.workspace = s.dir.path();
    c.manifest_path = "manifest.tsv";
    c.backend_kind = "mock";
    c.mock.seed = opt.mock_seed;
    c.mock.dims = opt.dims;
    c.mock.embedding_scale = opt.embedding_scale;
    c.mock.vqa_threshold = opt.vqa_threshold;
    if (!opt.generic_mock) {
        c.mock.noise_sigma = opt.noise_sigma;
        const std::size_t noise_count = opt.dims >= 16 ? 12 : opt.dims - opt.dims / 4;
        for (std::size_t axis = 0; axis < noise_count; ++axis) {
            c.mock.noise_axes.push_back(axis);
        }
        for (const auto& g : opt.groups) {
            c.mock.group_axes[g.name] = g.axis;
            for (std::size_t v = 1; v <= opt.planted_variants; ++v) {
                c.mock.planted_texts[planted_text(g.name, v)] = g.name;
            }
            for (std::size_t i = 0; i < g.image_count; ++i) {
                c.mock.image_groups[image_hash(g.name, i)] = g.name;
            }
        }
    }
    c.strategy = opt.strategy;
    c.matcher = opt.matcher;
    c.pair_mode = opt.pair_mode;
    c.n_per_group = opt.n_per_group;
    c.k_candidates = opt.k_candidates;
    c.master_seed = opt.master_seed;
    c.cache_dir = opt.enable_cache ? "cache" : "";
    c.runs_dir = "runs";
    return s;
}

}  // namespace fixtures
