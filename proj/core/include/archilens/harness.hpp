#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "archilens/config.hpp"
#include "archilens/dataset.hpp"
#include "archilens/evaluator.hpp"
#include "archilens/extractor.hpp"
#include "archilens/gateway.hpp"
#include "archilens/stats.hpp"

namespace archilens {

/// One group pair pushed through the full extract -> evaluate pipeline.
/// `evaluations` holds every scored candidate: the retained ones first, in
/// rank order, then the rest in the same comparator order.
struct PairComparison {
    std::string group_a;
    std::string group_b;
    std::uint64_t seed = 0;
    GroupSample sample_a;
    GroupSample sample_b;
    std::vector<StyleDescription> candidates;
    std::vector<DescriptionEvaluation> evaluations;
    std::size_t retained_count = 0;
    std::vector<std::string> failed_candidates;  // "text: error"
};

/// Histogram/KDE/boxplot summaries for the top retained description of one
/// pair, computed separately over the D_A and D_B theta samples on shared
/// bins and a shared KDE grid.
struct PairDistributions {
    std::string group_a;
    std::string group_b;
    std::string description_text;
    stats::DistributionSummary side_a;
    stats::DistributionSummary side_b;
};

struct ExperimentReport {
    std::string config_snapshot;  // canonical config JSON
    std::vector<PairComparison> pairs;
    std::vector<std::string> failed_pairs;  // "a|b: message"

    // Retained-description counts per group (attribution per config), plus
    // the alternative "t-tested true" count that ignores the diff>0 gate.
    std::map<std::string, std::size_t> significance_counts;
    std::map<std::string, std::size_t> ttest_true_counts;

    std::vector<std::string> similarity_groups;  // row/col labels, sorted
    std::vector<std::vector<double>> similarity;
    std::vector<std::string> similarity_absent;  // groups with no retained text
    std::string similarity_source;               // descriptions | images

    std::vector<PairDistributions> distributions;
    std::map<std::string, std::vector<std::pair<std::string, std::size_t>>>
        word_frequency_tables;
};

/// seed(pair) = first 8 bytes (little-endian) of
/// SHA-256(LE64(master_seed) || group_a || 0x1f || group_b).
std::uint64_t derive_pair_seed(std::uint64_t master_seed, const std::string& group_a,
                               const std::string& group_b);

class Harness {
  public:
    Harness(Gateway& gateway, const DatasetManifest& manifest, RunConfig config);

    /// Sample -> extract -> dedup -> evaluate -> rank one pair. Both sides
    /// are sampled with the same derived pair seed, so a self-pair compares
    /// two identical samples and deterministically retains nothing.
    PairComparison run_pair(const std::string& group_a, const std::string& group_b);

    /// Every enumerated pair plus all aggregations. Failed pairs are
    /// recorded and skipped; throws EvaluationFailed only if all pairs fail.
    ExperimentReport run_all();

    /// run_all over an explicit pair list (the `pair` CLI command runs a
    /// single-entry list through the same aggregation path).
    ExperimentReport run_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

    const RunConfig& config() const { return config_; }

  private:
    void aggregate(ExperimentReport& report);

    Gateway& gateway_;
    const DatasetManifest& manifest_;
    RunConfig config_;
};

std::map<std::string, std::size_t> significance_counts(const ExperimentReport& report);

/// significant evaluations / total evaluations over all completed pairs.
/// Throws EmptyReport when no evaluation completed.
double significance_rate(const ExperimentReport& report);

std::size_t total_evaluations(const ExperimentReport& report);
std::size_t total_retained(const ExperimentReport& report);

}  // namespace archilens
