#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "archilens/config.hpp"
#include "archilens/dataset.hpp"
#include "archilens/errors.hpp"
#include "archilens/harness.hpp"
#include "archilens/report.hpp"

namespace {

namespace fs = std::filesystem;
using namespace archilens;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitBackend = 2;

int classify_error(const Error& e) {
    if (dynamic_cast<const BackendUnavailable*>(&e) != nullptr ||
        dynamic_cast<const BackendRejected*>(&e) != nullptr ||
        dynamic_cast<const EvaluationFailed*>(&e) != nullptr ||
        dynamic_cast<const EmptyProposal*>(&e) != nullptr ||
        dynamic_cast<const UnparseableAnswer*>(&e) != nullptr ||
        dynamic_cast<const DimensionMismatch*>(&e) != nullptr) {
        return kExitBackend;
    }
    return kExitValidation;
}

ExperimentReport load_run_report(const fs::path& run_dir) {
    const fs::path file = run_dir / "report.json";
    std::ifstream in(file, std::ios::binary);
    if (!in) throw MalformedConfig("cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return report_from_json(buf.str());
}

void print_run_summary(const ExperimentReport& report, const GatewayStats& stats,
                       const ReportBundle& bundle) {
    std::cout << "run dir: " << bundle.dir.string() << '\n';
    std::cout << "pairs completed: " << report.pairs.size()
              << ", failed: " << report.failed_pairs.size() << '\n';
    std::cout << "evaluations: " << total_evaluations(report)
              << ", retained: " << total_retained(report) << '\n';
    try {
        std::cout << "significance rate: " << format_fixed(significance_rate(report), 4) << '\n';
    } catch (const EmptyReport&) {
        std::cout << "significance rate: n/a (no evaluations)\n";
    }
    std::cout << "backend calls: " << stats.backend_calls << ", cache hits: " << stats.cache_hits
              << ", network calls: " << stats.network_calls << '\n';
    for (const auto& failure : report.failed_pairs) {
        std::cerr << "warning: pair failed: " << failure << '\n';
    }
}

int cmd_validate(const std::string& manifest_path) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    std::cout << "manifest ok: " << manifest.groups.size() << " groups, "
              << manifest.record_count() << " records\n";
    for (const auto& [group, records] : manifest.groups) {
        std::cout << "  " << group << ": " << records.size() << " images\n";
    }
    return kExitOk;
}

int cmd_run(const std::string& config_path, bool seed_set, std::uint64_t seed) {
    RunConfig config = load_config(config_path);
    if (seed_set) config.master_seed = seed;
    const DatasetManifest manifest =
        load_manifest(config.resolve(config.manifest_path));
    auto gateway = make_gateway(config);
    Harness harness(*gateway, manifest, config);
    const ExperimentReport report = harness.run_all();
    const ReportBundle bundle =
        emit_bundle(report, gateway->stats(), config.resolve(config.runs_dir));
    print_run_summary(report, gateway->stats(), bundle);
    return kExitOk;
}

int cmd_pair(const std::string& config_path, const std::string& group_a,
             const std::string& group_b, bool allow_self, bool seed_set, std::uint64_t seed) {
    RunConfig config = load_config(config_path);
    if (seed_set) config.master_seed = seed;
    if (group_a == group_b && config.pair_mode != "ordered-with-self" && !allow_self) {
        std::cerr << "error: self-pair " << group_a
                  << " needs --allow-self under pair_mode " << config.pair_mode << '\n';
        return kExitValidation;
    }
    const DatasetManifest manifest =
        load_manifest(config.resolve(config.manifest_path));
    auto gateway = make_gateway(config);
    Harness harness(*gateway, manifest, config);
    const ExperimentReport report = harness.run_pairs({{group_a, group_b}});
    const ReportBundle bundle =
        emit_bundle(report, gateway->stats(), config.resolve(config.runs_dir));
    print_run_summary(report, gateway->stats(), bundle);
    return kExitOk;
}

int cmd_report(const std::string& run_dir) {
    const ExperimentReport report = load_run_report(run_dir);
    const auto files = emit_data_files(report, run_dir);
    std::cout << "re-emitted " << files.size() << " files under " << run_dir << '\n';
    for (const auto& rel : files) std::cout << "  " << rel << '\n';
    return kExitOk;
}

int cmd_prompts(const std::string& run_dir, std::size_t top_m) {
    const ExperimentReport report = load_run_report(run_dir);
    const fs::path file = fs::path(run_dir) / "prompts.txt";
    export_t2i_prompts(report, top_m, file);
    std::cout << "wrote " << file.string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"archilens: style-difference extraction and evaluation for image groups"};
    app.require_subcommand(1);

    std::string manifest_path;
    auto* validate = app.add_subcommand("validate", "check a dataset manifest");
    validate->add_option("manifest", manifest_path, "manifest file")->required();

    std::string run_config;
    std::uint64_t run_seed = 0;
    auto* run = app.add_subcommand("run", "run the full experiment");
    run->add_option("config", run_config, "config file")->required();
    auto* run_seed_opt = run->add_option("--seed", run_seed, "override master_seed");

    std::string pair_config, pair_a, pair_b;
    std::uint64_t pair_seed = 0;
    bool allow_self = false;
    auto* pair = app.add_subcommand("pair", "run a single group pair");
    pair->add_option("config", pair_config, "config file")->required();
    pair->add_option("--a", pair_a, "first group")->required();
    pair->add_option("--b", pair_b, "second group")->required();
    pair->add_flag("--allow-self", allow_self, "permit --a == --b");
    auto* pair_seed_opt = pair->add_option("--seed", pair_seed, "override master_seed");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "re-emit data files from a stored run");
    report->add_option("run_dir", report_dir, "run directory")->required();

    std::string prompts_dir;
    std::size_t top_m = 3;
    auto* prompts = app.add_subcommand("prompts", "export per-group text-to-image prompts");
    prompts->add_option("run_dir", prompts_dir, "run directory")->required();
    prompts->add_option("--top", top_m, "descriptions per group");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (validate->parsed()) return cmd_validate(manifest_path);
        if (run->parsed()) return cmd_run(run_config, run_seed_opt->count() > 0, run_seed);
        if (pair->parsed()) {
            return cmd_pair(pair_config, pair_a, pair_b, allow_self,
                            pair_seed_opt->count() > 0, pair_seed);
        }
        if (report->parsed()) return cmd_report(report_dir);
        if (prompts->parsed()) return cmd_prompts(prompts_dir, top_m);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return classify_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
