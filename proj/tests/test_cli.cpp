#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "archilens/config.hpp"
#include "archilens/report.hpp"
#include "support/fixtures.hpp"

using namespace archilens;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Run the installed CLI binary with the given argument string.
CliResult run_cli(const std::string& args) {
    static const std::string binary = ARCHILENS_CLI_PATH;
    fixtures::TempDir scratch;
    const fs::path out_file = scratch.path() / "out.txt";
    const fs::path err_file = scratch.path() / "err.txt";
    const std::string command = "\"" + binary + "\" " + args + " > \"" + out_file.string() +
                                "\" 2> \"" + err_file.string() + "\"";
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_text(out_file);
    result.err = read_text(err_file);
    return result;
}

std::string line_after(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    }
    return {};
}

/// Scenario with its config saved to disk, ready for the CLI.
struct CliFixture {
    explicit CliFixture(fixtures::ScenarioOptions options = {})
        : scenario(fixtures::make_scenario(options)),
          config_file(scenario.dir.path() / "config.json") {
        save_config(scenario.config, config_file);
    }

    void resave() { save_config(scenario.config, config_file); }

    std::string quoted_config() const { return "\"" + config_file.string() + "\""; }

    fixtures::Scenario scenario;
    fs::path config_file;
};

}  // namespace

TEST_CASE("validate reports groups and record counts") {
    CliFixture fix;
    const auto result = run_cli("validate \"" + fix.scenario.manifest_file.string() + "\"");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("manifest ok: 2 groups, 16 records") != std::string::npos);
    CHECK(result.out.find("groupA: 8 images") != std::string::npos);
    CHECK(result.out.find("groupB: 8 images") != std::string::npos);
}

TEST_CASE("validate fails with exit 1 on a malformed manifest") {
    fixtures::TempDir dir;
    const fs::path bad = dir.path() / "bad.tsv";
    {
        std::ofstream out(bad);
        out << "not a manifest\n";
    }
    const auto result = run_cli("validate \"" + bad.string() + "\"");
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("error:") != std::string::npos);
}

TEST_CASE("argument errors exit 1; --help exits 0") {
    CHECK(run_cli("validate").exit_code == 1);           // missing argument
    CHECK(run_cli("conjure").exit_code == 1);            // unknown subcommand
    CHECK(run_cli("").exit_code == 1);                   // subcommand required
    CHECK(run_cli("--help").exit_code == 0);
    const auto help = run_cli("--help");
    CHECK(help.out.find("validate") != std::string::npos);
    CHECK(help.out.find("prompts") != std::string::npos);
}

TEST_CASE("run executes the experiment and emits a run directory") {
    CliFixture fix;
    const auto result = run_cli("run " + fix.quoted_config());
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("pairs completed: 2, failed: 0") != std::string::npos);
    CHECK(result.out.find("evaluations: 10, retained: 2") != std::string::npos);
    CHECK(result.out.find("significance rate: 0.2000") != std::string::npos);

    const fs::path run_dir = line_after(result.out, "run dir: ");
    REQUIRE(fs::is_directory(run_dir));
    CHECK(fs::exists(run_dir / "evaluations.tsv"));
    CHECK(fs::exists(run_dir / "run_meta.json"));
    const auto report = report_from_json(read_text(run_dir / "report.json"));
    CHECK(report.pairs.size() == 2);

    // The run lands under the configured runs dir inside the workspace.
    CHECK(run_dir.parent_path() == fix.scenario.dir.path() / "runs");

    // --seed overrides master_seed: the snapshot in the new report differs.
    const auto seeded = run_cli("run " + fix.quoted_config() + " --seed 7777");
    CHECK(seeded.exit_code == 0);
    const fs::path seeded_dir = line_after(seeded.out, "run dir: ");
    const auto seeded_report = report_from_json(read_text(seeded_dir / "report.json"));
    CHECK(seeded_report.config_snapshot.find("7777") != std::string::npos);
    CHECK(seeded_report.config_snapshot != report.config_snapshot);
}

TEST_CASE("pair runs one comparison; self pairs need --allow-self") {
    CliFixture fix;
    const auto result =
        run_cli("pair " + fix.quoted_config() + " --a groupA --b groupB");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("pairs completed: 1, failed: 0") != std::string::npos);
    CHECK(result.out.find("retained: 1") != std::string::npos);

    const auto refused =
        run_cli("pair " + fix.quoted_config() + " --a groupA --b groupA");
    CHECK(refused.exit_code == 1);
    CHECK(refused.err.find("--allow-self") != std::string::npos);

    const auto self_pair =
        run_cli("pair " + fix.quoted_config() + " --a groupA --b groupA --allow-self");
    CHECK(self_pair.exit_code == 0);
    CHECK(self_pair.out.find("retained: 0") != std::string::npos);

    CHECK(run_cli("pair " + fix.quoted_config() + " --a groupA").exit_code == 1);

    const auto unknown =
        run_cli("pair " + fix.quoted_config() + " --a groupA --b ghosts");
    CHECK(unknown.exit_code == 2);  // every pair failed -> backend/evaluation exit
}

TEST_CASE("self pairs run without the flag under ordered-with-self") {
    fixtures::ScenarioOptions options;
    options.pair_mode = "ordered-with-self";
    CliFixture fix(options);
    const auto result =
        run_cli("pair " + fix.quoted_config() + " --a groupA --b groupA");
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("retained: 0") != std::string::npos);
}

TEST_CASE("report re-emits data files; prompts exports prompts.txt") {
    CliFixture fix;
    const auto run = run_cli("run " + fix.quoted_config());
    REQUIRE(run.exit_code == 0);
    const fs::path run_dir = line_after(run.out, "run dir: ");

    // Corrupt a data file, then re-emit from report.json.
    {
        std::ofstream out(run_dir / "evaluations.tsv", std::ios::trunc);
        out << "scribbles\n";
    }
    const auto report = run_cli("report \"" + run_dir.string() + "\"");
    CHECK(report.exit_code == 0);
    CHECK(report.out.find("re-emitted") != std::string::npos);
    CHECK(read_text(run_dir / "evaluations.tsv").rfind("pair\trank", 0) == 0);

    const auto prompts = run_cli("prompts \"" + run_dir.string() + "\" --top 2");
    CHECK(prompts.exit_code == 0);
    const std::string text = read_text(run_dir / "prompts.txt");
    CHECK(text.find("## group: groupA") != std::string::npos);
    CHECK(text.find(fixtures::planted_text("groupA")) != std::string::npos);

    const auto missing = run_cli("report \"" + (run_dir / "absent").string() + "\"");
    CHECK(missing.exit_code == 1);
}

TEST_CASE("backend failures exit with status 2") {
    CliFixture fix;
    fix.scenario.config.backend_kind = "http";
    fix.scenario.config.http.base_url = "http://127.0.0.1:1";  // nothing listens
    fix.scenario.config.http.max_attempts = 1;
    fix.scenario.config.http.backoff_initial_ms = 1;
    fix.scenario.config.http.connect_timeout_s = 1;
    fix.resave();

    const auto result = run_cli("run " + fix.quoted_config());
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("error:") != std::string::npos);
}
