#include <algorithm>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"
#include "archilens/harness.hpp"
#include "support/fixtures.hpp"

using namespace archilens;

namespace {

fixtures::ScenarioOptions three_group_options() {
    fixtures::ScenarioOptions options;
    options.groups = {{"groupA", 0, 8}, {"groupB", 1, 8}, {"groupC", 2, 8}};
    return options;
}

std::size_t histogram_total(const std::vector<stats::HistogramBin>& bins) {
    return std::accumulate(bins.begin(), bins.end(), std::size_t{0},
                           [](std::size_t n, const stats::HistogramBin& b) { return n + b.count; });
}

}  // namespace

TEST_CASE("derive_pair_seed hashes master seed and ordered group names") {
    const std::uint64_t seed = derive_pair_seed(42, "groupA", "groupB");
    CHECK(seed == derive_pair_seed(42, "groupA", "groupB"));

    std::string bytes;
    const std::uint64_t master = 42;
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((master >> (8 * i)) & 0xff));
    bytes += "groupA";
    bytes.push_back('\x1f');
    bytes += "groupB";
    CHECK(seed == sha256_seed(bytes));

    CHECK(seed != derive_pair_seed(42, "groupB", "groupA"));
    CHECK(seed != derive_pair_seed(43, "groupA", "groupB"));
    // The separator byte means ("ab", "c") and ("a", "bc") cannot collide.
    CHECK(derive_pair_seed(1, "ab", "c") != derive_pair_seed(1, "a", "bc"));
}

TEST_CASE("run_pair retains the planted description first") {
    auto scenario = fixtures::make_scenario();
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto pair = harness.run_pair("groupA", "groupB");
    CHECK(pair.group_a == "groupA");
    CHECK(pair.group_b == "groupB");
    CHECK(pair.seed == derive_pair_seed(scenario.config.master_seed, "groupA", "groupB"));
    CHECK(pair.sample_a.records.size() == scenario.config.n_per_group);
    CHECK(pair.sample_b.records.size() == scenario.config.n_per_group);
    CHECK(pair.candidates.size() == scenario.config.k_candidates);
    CHECK(pair.failed_candidates.empty());

    REQUIRE(pair.evaluations.size() == 5);
    CHECK(pair.retained_count == 1);
    CHECK(pair.evaluations.front().description.text == fixtures::planted_text("groupA"));
    CHECK(pair.evaluations.front().retained);
    CHECK(pair.evaluations.front().auroc == 1.0);

    // Non-retained distractors follow, ordered by the shared comparator;
    // they all tie on auroc and diff, so normalized text decides.
    for (std::size_t i = 1; i < 5; ++i) {
        const auto& eval = pair.evaluations[i];
        CHECK_FALSE(eval.retained);
        CHECK(eval.auroc == 0.5);
        CHECK(eval.diff == 0.0);
        CHECK(eval.description.text == "mock distractor " + std::to_string(i) +
                                           " distinguishing groupA from groupB");
    }
}

TEST_CASE("a self pair compares identical samples and retains nothing") {
    auto scenario = fixtures::make_scenario();
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto pair = harness.run_pair("groupA", "groupA");
    CHECK(pair.retained_count == 0);
    for (std::size_t i = 0; i < pair.sample_a.records.size(); ++i) {
        CHECK(pair.sample_a.records[i].id == pair.sample_b.records[i].id);
    }
    for (const auto& eval : pair.evaluations) {
        CHECK(eval.diff == 0.0);
        CHECK(eval.ttest.p_value == 1.0);
        CHECK_FALSE(eval.retained);
    }
}

TEST_CASE("run_pair rejects unknown groups") {
    auto scenario = fixtures::make_scenario();
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);
    CHECK_THROWS_AS(harness.run_pair("groupA", "nope"), UnknownGroup);
}

TEST_CASE("run_all aggregates counts, words, similarity, and distributions") {
    auto scenario = fixtures::make_scenario(three_group_options());
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto report = harness.run_all();
    REQUIRE(report.pairs.size() == 6);  // ordered, no self pairs
    CHECK(report.failed_pairs.empty());
    CHECK(report.config_snapshot == config_snapshot_json(scenario.config));

    // Every ordered pair retains exactly its planted description, attributed
    // to the first group.
    for (const auto* group : {"groupA", "groupB", "groupC"}) {
        REQUIRE(report.significance_counts.contains(group));
        CHECK(report.significance_counts.at(group) == 2);
        CHECK(report.ttest_true_counts.at(group) == 2);
    }
    CHECK(total_evaluations(report) == 30);
    CHECK(total_retained(report) == 6);
    CHECK(significance_rate(report) == doctest::Approx(0.2));

    // Word frequencies over each group's retained texts: the planted text
    // appears twice, stopwords and short words are gone.
    REQUIRE(report.word_frequency_tables.contains("groupA"));
    const auto& words = report.word_frequency_tables.at("groupA");
    REQUIRE(words.size() == 4);
    CHECK(words[0] == std::pair<std::string, std::size_t>{"groupa", 2});
    CHECK(words[1] == std::pair<std::string, std::size_t>{"hallmark", 2});
    CHECK(words[2] == std::pair<std::string, std::size_t>{"imagery", 2});
    CHECK(words[3] == std::pair<std::string, std::size_t>{"motif", 2});

    // Similarity over mean retained-description embeddings: the planted
    // texts sit on orthogonal axes, so off-diagonals are exactly zero.
    CHECK(report.similarity_source == "descriptions");
    CHECK(report.similarity_absent.empty());
    REQUIRE(report.similarity_groups ==
            std::vector<std::string>{"groupA", "groupB", "groupC"});
    REQUIRE(report.similarity.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(report.similarity[i].size() == 3);
        CHECK(report.similarity[i][i] == 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(report.similarity[i][j] == report.similarity[j][i]);
            if (i != j) CHECK(report.similarity[i][j] == 0.0);
        }
    }

    // One distribution summary per retained pair, on a shared range.
    REQUIRE(report.distributions.size() == 6);
    for (const auto& d : report.distributions) {
        CHECK(d.description_text == fixtures::planted_text(d.group_a));
        CHECK(histogram_total(d.side_a.histogram) == 8);
        CHECK(histogram_total(d.side_b.histogram) == 8);
        REQUIRE(d.side_a.histogram.size() == d.side_b.histogram.size());
        for (std::size_t b = 0; b < d.side_a.histogram.size(); ++b) {
            CHECK(d.side_a.histogram[b].left == d.side_b.histogram[b].left);
            CHECK(d.side_a.histogram[b].right == d.side_b.histogram[b].right);
        }
        CHECK_FALSE(d.side_a.kde.empty());
        CHECK_FALSE(d.side_b.kde.empty());
        CHECK(d.side_a.five_number.median > d.side_b.five_number.median);
    }
}

TEST_CASE("significance_attribution both credits both sides of a pair") {
    auto options = three_group_options();
    options.pair_mode = "unordered";
    auto scenario = fixtures::make_scenario(options);
    scenario.config.significance_attribution = "both";
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto report = harness.run_all();
    REQUIRE(report.pairs.size() == 3);  // unordered: each pair once
    for (const auto* group : {"groupA", "groupB", "groupC"}) {
        CHECK(report.significance_counts.at(group) == 2);
        CHECK(report.ttest_true_counts.at(group) == 2);
    }
    // groupB's word table now includes descriptions retained from the
    // (groupA, groupB) pair, where groupB was the second side.
    const auto& words = report.word_frequency_tables.at("groupB");
    const auto has = [&](const std::string& token) {
        return std::any_of(words.begin(), words.end(),
                           [&](const auto& e) { return e.first == token; });
    };
    CHECK(has("groupa"));
    CHECK(has("groupb"));
}

TEST_CASE("similarity_source images uses mean image embeddings") {
    auto scenario = fixtures::make_scenario(three_group_options());
    scenario.config.similarity_source = "images";
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto report = harness.run_all();
    CHECK(report.similarity_source == "images");
    REQUIRE(report.similarity_groups.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(report.similarity[i][i] == 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(report.similarity[i][j] == report.similarity[j][i]);
            // Image clusters share noise axes, so off-diagonals are small
            // but (unlike the planted-text case) not exactly zero.
            if (i != j) CHECK(std::abs(report.similarity[i][j]) < 0.9);
        }
    }
}

TEST_CASE("groups with no retained description are listed as absent") {
    auto scenario = fixtures::make_scenario();
    // Override the (groupA, groupB) proposals with a description that favors
    // groupB: its diff is negative, so groupA retains nothing.
    scenario.config.mock.proposals["groupA|groupB"] = {fixtures::planted_text("groupB")};
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto report = harness.run_all();
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.similarity_groups == std::vector<std::string>{"groupB"});
    CHECK(report.similarity == std::vector<std::vector<double>>{{1.0}});
    CHECK(report.similarity_absent == std::vector<std::string>{"groupA"});
    CHECK(report.significance_counts.at("groupA") == 0);
    CHECK(report.word_frequency_tables.at("groupA").empty());

    // Only the retaining pair gets a distribution summary.
    REQUIRE(report.distributions.size() == 1);
    CHECK(report.distributions.front().group_a == "groupB");
}

TEST_CASE("run_pairs records failed pairs and keeps going") {
    auto scenario = fixtures::make_scenario();
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto report =
        harness.run_pairs({{"groupA", "nope"}, {"groupA", "groupB"}});
    REQUIRE(report.pairs.size() == 1);
    REQUIRE(report.failed_pairs.size() == 1);
    CHECK(report.failed_pairs.front().rfind("groupA|nope: ", 0) == 0);
    CHECK(report.pairs.front().group_b == "groupB");

    CHECK_THROWS_AS(harness.run_pairs({{"groupA", "nope"}}), EvaluationFailed);
}

TEST_CASE("stopwords_path overrides the built-in list") {
    auto scenario = fixtures::make_scenario();
    {
        std::ofstream out(scenario.dir.path() / "stop.txt");
        out << "# project stopwords\nhallmark\nmotif\n";
    }
    scenario.config.stopwords_path = "stop.txt";
    auto gateway = make_gateway(scenario.config);
    Harness harness(*gateway, scenario.manifest, scenario.config);

    const auto report = harness.run_pairs({{"groupA", "groupB"}});
    const auto& words = report.word_frequency_tables.at("groupA");
    REQUIRE(words.size() == 2);
    CHECK(words[0].first == "groupa");
    CHECK(words[1].first == "imagery");
}
