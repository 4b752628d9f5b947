#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"
#include "archilens/harness.hpp"
#include "archilens/report.hpp"
#include "support/fixtures.hpp"

using namespace archilens;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

/// A two-group planted scenario pushed through run_all, shared by the
/// emission tests.
struct ReportFixture {
    ReportFixture() {
        fixtures::ScenarioOptions options;
        options.groups = {{"groupA", 0, 8}, {"groupB", 1, 8}, {"groupC", 2, 8}};
        scenario = fixtures::make_scenario(options);
        gateway = make_gateway(scenario.config);
        Harness harness(*gateway, scenario.manifest, scenario.config);
        report = harness.run_all();
    }

    fixtures::Scenario scenario;
    std::unique_ptr<Gateway> gateway;
    ExperimentReport report;
};

}  // namespace

TEST_CASE("format_fixed renders printf-style fixed point") {
    CHECK(format_fixed(0.382 - 0.258, 3) == "0.124");
    CHECK(format_fixed(0.5) == "0.500000");
    CHECK(format_fixed(-1.25, 2) == "-1.25");
    CHECK(format_fixed(2.0, 0) == "2");
    CHECK(format_fixed(0.0) == "0.000000");
}

TEST_CASE("report json round-trips byte for byte") {
    ReportFixture fix;
    const std::string once = report_to_json(fix.report);
    const ExperimentReport parsed = report_from_json(once);
    const std::string twice = report_to_json(parsed);
    CHECK(once == twice);
    CHECK(once.back() == '\n');

    CHECK(parsed.pairs.size() == fix.report.pairs.size());
    CHECK(parsed.similarity == fix.report.similarity);
    CHECK(parsed.word_frequency_tables == fix.report.word_frequency_tables);
    CHECK(parsed.config_snapshot == fix.report.config_snapshot);
    CHECK(parsed.pairs.front().evaluations.front().description.text ==
          fix.report.pairs.front().evaluations.front().description.text);

    CHECK_THROWS_AS(report_from_json("not json"), MalformedConfig);
    CHECK_THROWS_AS(report_from_json("[1, 2]"), MalformedConfig);
}

TEST_CASE("evaluations.tsv columns, ranks, and row count") {
    ReportFixture fix;
    fixtures::TempDir out;
    const fs::path file = out.path() / "evaluations.tsv";
    emit_evaluations_table(fix.report, file);

    const auto lines = split_lines(read_text(file));
    REQUIRE(lines.size() == 1 + total_evaluations(fix.report));
    CHECK(lines[0] ==
          "pair\trank\thypothesis\tscore1\tscore2\tdiff\ts_y\tt_stat\tdf\tp_value\t"
          "significant\taucroc\tretained\tstrategy\tmatcher");

    // First pair: the planted description ranks 1, the distractors rank 0.
    const auto first = split_tabs(lines[1]);
    REQUIRE(first.size() == 15);
    CHECK(first[0] == "groupA vs groupB");
    CHECK(first[1] == "1");
    CHECK(first[2] == fixtures::planted_text("groupA"));
    CHECK(first[10] == "true");
    CHECK(first[11] == "1.000000");
    CHECK(first[12] == "true");
    CHECK(first[13] == "text-based");
    CHECK(first[14] == "embedding");

    const std::regex fixed6("-?\\d+\\.\\d{6}");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_tabs(lines[i]);
        REQUIRE(fields.size() == 15);
        for (std::size_t col : {3, 4, 5, 6, 7, 8, 9, 11}) {
            CHECK_MESSAGE(std::regex_match(fields[col], fixed6),
                          "line " << i << " column " << col << ": " << fields[col]);
        }
        CHECK((fields[10] == "true" || fields[10] == "false"));
        CHECK((fields[12] == "true" || fields[12] == "false"));
    }

    // Each pair contributes one rank-1 row and four rank-0 rows.
    std::size_t rank1 = 0, rank0 = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto rank = split_tabs(lines[i])[1];
        if (rank == "1") ++rank1;
        if (rank == "0") ++rank0;
    }
    CHECK(rank1 == 6);
    CHECK(rank0 == 24);
}

TEST_CASE("chart data files: names, conservation, similarity matrix") {
    ReportFixture fix;
    fixtures::TempDir out;
    const auto written = emit_chart_data(fix.report, out.path());

    for (const auto& rel : written) CHECK(fs::exists(out.path() / rel));
    CHECK(std::count(written.begin(), written.end(),
                     "charts/pair_000_groupA_vs_groupB_histogram.tsv") == 1);
    CHECK(std::count(written.begin(), written.end(),
                     "charts/pair_000_groupA_vs_groupB_kde.tsv") == 1);
    CHECK(std::count(written.begin(), written.end(),
                     "charts/pair_000_groupA_vs_groupB_boxplot.tsv") == 1);
    CHECK(std::count(written.begin(), written.end(), "similarity_matrix.tsv") == 1);
    CHECK(std::count(written.begin(), written.end(), "wordfreq/groupA.tsv") == 1);
    // 6 pairs x 3 charts + similarity + 3 wordfreq tables
    CHECK(written.size() == 22);

    const auto histogram =
        split_lines(read_text(out.path() / "charts/pair_000_groupA_vs_groupB_histogram.tsv"));
    REQUIRE(histogram.size() == 21);  // header + 20 shared bins
    CHECK(histogram[0] == "bin_left\tbin_right\tcount_a\tcount_b");
    std::size_t total_a = 0, total_b = 0;
    for (std::size_t i = 1; i < histogram.size(); ++i) {
        const auto fields = split_tabs(histogram[i]);
        REQUIRE(fields.size() == 4);
        total_a += std::stoul(fields[2]);
        total_b += std::stoul(fields[3]);
    }
    CHECK(total_a == 8);
    CHECK(total_b == 8);

    const auto boxplot =
        split_lines(read_text(out.path() / "charts/pair_000_groupA_vs_groupB_boxplot.tsv"));
    REQUIRE(boxplot.size() == 3);
    CHECK(split_tabs(boxplot[1])[0] == "groupA");
    CHECK(split_tabs(boxplot[2])[0] == "groupB");

    const auto matrix = split_lines(read_text(out.path() / "similarity_matrix.tsv"));
    REQUIRE(matrix.size() == 4);
    CHECK(matrix[0] == "group\tgroupA\tgroupB\tgroupC");
    CHECK(matrix[1] == "groupA\t1.000000\t0.000000\t0.000000");
    CHECK(split_tabs(matrix[2])[0] == "groupB");

    const auto words = split_lines(read_text(out.path() / "wordfreq/groupA.tsv"));
    REQUIRE(words.size() == 5);
    CHECK(words[0] == "token\tcount");
    CHECK(words[1] == "groupa\t2");
}

TEST_CASE("prompt export dedups per group and marks empty groups") {
    ReportFixture fix;
    fixtures::TempDir out;
    const fs::path file = out.path() / "prompts.txt";

    // groupA retains the same planted text against both other groups:
    // dedup leaves a single line even with a generous top_m.
    export_t2i_prompts(fix.report, 3, file);
    const std::string expected = "## group: groupA\n" + fixtures::planted_text("groupA") +
                                 "\n\n## group: groupB\n" + fixtures::planted_text("groupB") +
                                 "\n\n## group: groupC\n" + fixtures::planted_text("groupC") +
                                 "\n\n";
    CHECK(read_text(file) == expected);

    // A group that retained nothing is marked EMPTY.
    auto scenario = fixtures::make_scenario();
    scenario.config.mock.proposals["groupA|groupB"] = {fixtures::planted_text("groupB")};
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);
    const auto report = harness.run_all();
    export_t2i_prompts(report, 3, file);
    CHECK(read_text(file) == "## group: groupA\nEMPTY\n\n## group: groupB\n" +
                                 fixtures::planted_text("groupB") + "\n\n");
}

TEST_CASE("bundle emission digests every file and writes run_meta.json") {
    ReportFixture fix;
    fixtures::TempDir out;
    const auto bundle = emit_bundle(fix.report, fix.gateway->stats(), out.path() / "runs");

    CHECK(bundle.run_id.size() == 16);
    CHECK(bundle.run_id.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(bundle.dir == out.path() / "runs" / bundle.run_id);
    REQUIRE(fs::is_directory(bundle.dir));

    // Every data file is digested, and the digests match the bytes on disk.
    CHECK(bundle.file_digests.contains("report.json"));
    CHECK(bundle.file_digests.contains("evaluations.tsv"));
    CHECK(bundle.file_digests.size() == 24);  // report + evaluations + 22 chart files
    for (const auto& [rel, digest] : bundle.file_digests) {
        CHECK(sha256_hex(read_text(bundle.dir / rel)) == digest);
    }

    const auto meta = nlohmann::json::parse(read_text(bundle.dir / "run_meta.json"));
    CHECK(meta.at("run_id").get<std::string>() == bundle.run_id);
    CHECK(meta.at("backend_calls").get<std::uint64_t>() == fix.gateway->stats().backend_calls);
    CHECK(meta.at("cache_hits").get<std::uint64_t>() == fix.gateway->stats().cache_hits);
    CHECK(meta.at("network_calls").get<std::uint64_t>() == 0);
    CHECK(meta.at("files").get<std::map<std::string, std::string>>() == bundle.file_digests);
    const std::regex iso_utc("\\d{4}-\\d{2}-\\d{2}T\\d{2}:\\d{2}:\\d{2}Z");
    CHECK(std::regex_match(meta.at("created_utc").get<std::string>(), iso_utc));

    // Data files are a pure function of the report: a second bundle gets a
    // fresh id but identical file digests.
    const auto again = emit_bundle(fix.report, fix.gateway->stats(), out.path() / "runs");
    CHECK(again.run_id != bundle.run_id);
    CHECK(again.file_digests == bundle.file_digests);
}

TEST_CASE("emit_data_files returns the relative paths it wrote") {
    ReportFixture fix;
    fixtures::TempDir out;
    const auto written = emit_data_files(fix.report, out.path());
    REQUIRE(!written.empty());
    CHECK(written.front() == "report.json");
    CHECK(std::count(written.begin(), written.end(), "evaluations.tsv") == 1);
    for (const auto& rel : written) {
        CHECK(fs::is_regular_file(out.path() / rel));
        CHECK(fs::path(rel).is_relative());
    }
}
