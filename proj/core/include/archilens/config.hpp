#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "archilens/dataset.hpp"
#include "archilens/evaluator.hpp"
#include "archilens/extractor.hpp"
#include "archilens/gateway.hpp"
#include "archilens/http_backend.hpp"
#include "archilens/mock_backend.hpp"

namespace archilens {

/// Full experiment configuration. Loaded from a JSON file; every path is
/// resolved relative to `workspace` (which defaults to the config file's
/// directory). Unknown top-level keys are rejected.
struct RunConfig {
    std::filesystem::path workspace;  // never serialized; environment-specific
    std::string manifest_path;

    std::string backend_kind = "mock";  // mock | http
    MockConfig mock;
    HttpConfig http;
    ModelIds models;

    std::string strategy = "text-based";
    std::string matcher = "embedding";
    std::string pair_mode = "ordered-no-self";

    std::size_t n_per_group = 20;
    std::size_t k_candidates = 5;
    std::size_t grid_per_group = 4;
    double alpha = 0.05;
    std::uint64_t master_seed = 42;
    std::size_t max_inflight = 8;
    double failure_budget = 0.10;

    std::string ttest_variance = "welch";  // welch | pooled
    std::string ttest_tails = "two";       // two | one

    // Aggregation switches (see harness).
    std::string significance_attribution = "group_a";  // group_a | both
    std::string similarity_source = "descriptions";    // descriptions | images

    std::string cache_dir = "cache";  // empty string disables the cache
    std::string runs_dir = "runs";
    std::string stopwords_path;  // empty: use the built-in English list

    ExtractorOptions extractor;  // prompts, grid size, parallelism
    GatewayOptions gateway;      // models + vqa prompts (models mirrored above)

    std::filesystem::path resolve(const std::string& relative) const;
};

/// Parse, validate, and default-fill a config file. Throws MalformedConfig
/// with the offending key/value in the message.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON snapshot of a config (sorted keys, no workspace path, no
/// environment-specific data) — embedded in reports and hashed into run ids.
std::string config_snapshot_json(const RunConfig& config);

/// Write a config back to disk (round-trips through load_config).
void save_config(const RunConfig& config, const std::filesystem::path& path);

std::shared_ptr<Backend> make_backend(const RunConfig& config);

/// Backend + cache + prompt plumbing assembled from config.
std::unique_ptr<Gateway> make_gateway(const RunConfig& config);

stats::TTestOptions ttest_options(const RunConfig& config);
EvaluatorOptions evaluator_options(const RunConfig& config);

}  // namespace archilens
