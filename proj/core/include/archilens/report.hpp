#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "archilens/gateway.hpp"
#include "archilens/harness.hpp"

namespace archilens {

/// One emitted run directory: {runs_root}/{run_id}/ holding report.json,
/// the data files, and run_meta.json. Data files never contain timestamps,
/// hostnames, or absolute paths; those live only in run_meta.json.
struct ReportBundle {
    std::string run_id;
    std::filesystem::path dir;
    std::map<std::string, std::string> file_digests;  // relative path -> sha256
};

/// Fixed-point decimal rendering (printf %.Nf, round-half-even under
/// glibc). Used for every real number in tab-separated outputs.
std::string format_fixed(double value, int decimals = 6);

/// Canonical JSON for the whole report; byte-stable for identical reports.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& bytes);

/// evaluations.tsv: one row per evaluation, columns exactly
/// pair, rank, hypothesis, score1, score2, diff, s_y, t_stat, df, p_value,
/// significant, aucroc, retained, strategy, matcher.
/// rank is 1-based among the retained rows of a pair, 0 for the rest.
void emit_evaluations_table(const ExperimentReport& report,
                            const std::filesystem::path& file);

/// Histogram/KDE/boxplot files per pair under charts/, the labeled
/// similarity matrix, and per-group word-frequency tables under wordfreq/.
/// Returns the relative paths written.
std::vector<std::string> emit_chart_data(const ExperimentReport& report,
                                         const std::filesystem::path& run_dir);

/// prompts.txt: per group a "## group: <name>" section holding its top_m
/// retained descriptions (best AUROC first, deduplicated), or EMPTY.
void export_t2i_prompts(const ExperimentReport& report, std::size_t top_m,
                        const std::filesystem::path& file);

/// report.json plus every data file; returns their relative paths.
std::vector<std::string> emit_data_files(const ExperimentReport& report,
                                         const std::filesystem::path& run_dir);

/// Create {runs_root}/{run_id}/, emit all files, and write run_meta.json
/// (run id, creation time, gateway counters, per-file digests).
ReportBundle emit_bundle(const ExperimentReport& report, const GatewayStats& stats,
                         const std::filesystem::path& runs_root);

}  // namespace archilens
