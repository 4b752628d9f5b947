#include "archilens/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"
#include "archilens/extractor.hpp"

namespace archilens {

namespace {

using nlohmann::json;

constexpr const char* kEvaluationsHeader =
    "pair\trank\thypothesis\tscore1\tscore2\tdiff\ts_y\tt_stat\tdf\tp_value\tsignificant\t"
    "aucroc\tretained\tstrategy\tmatcher";

std::string sanitize_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '-' || c == '_';
        out.push_back(keep ? c : '_');
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write file: " + file.string());
    return out;
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DomainError("cannot read file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json sample_to_json(const GroupSample& sample) {
    json obj;
    obj["group"] = sample.group;
    obj["seed"] = sample.seed;
    obj["requested_n"] = sample.requested_n;
    json records = json::array();
    for (const auto& rec : sample.records) {
        json r;
        r["id"] = rec.id;
        r["group"] = rec.group;
        r["uri"] = rec.uri;
        r["content_hash"] = rec.content_hash;
        records.push_back(std::move(r));
    }
    obj["records"] = std::move(records);
    return obj;
}

GroupSample sample_from_json(const json& obj) {
    GroupSample sample;
    sample.group = obj.at("group").get<std::string>();
    sample.seed = obj.at("seed").get<std::uint64_t>();
    sample.requested_n = obj.at("requested_n").get<std::size_t>();
    for (const auto& r : obj.at("records")) {
        sample.records.push_back(ImageRecord{r.at("id").get<std::string>(),
                                             r.at("group").get<std::string>(),
                                             r.at("uri").get<std::string>(),
                                             r.at("content_hash").get<std::string>()});
    }
    return sample;
}

json description_to_json(const StyleDescription& d) {
    json obj;
    obj["text"] = d.text;
    obj["strategy"] = d.strategy;
    obj["group_a"] = d.group_a;
    obj["group_b"] = d.group_b;
    obj["run_seed"] = d.run_seed;
    return obj;
}

StyleDescription description_from_json(const json& obj) {
    StyleDescription d;
    d.text = obj.at("text").get<std::string>();
    d.strategy = obj.at("strategy").get<std::string>();
    d.group_a = obj.at("group_a").get<std::string>();
    d.group_b = obj.at("group_b").get<std::string>();
    d.run_seed = obj.at("run_seed").get<std::uint64_t>();
    return d;
}

json evaluation_to_json(const DescriptionEvaluation& e) {
    json obj;
    obj["description"] = description_to_json(e.description);
    obj["score1"] = e.score1;
    obj["score2"] = e.score2;
    obj["diff"] = e.diff;
    obj["s_y"] = e.s_y;
    obj["auroc"] = e.auroc;
    obj["t_stat"] = e.ttest.t_stat;
    obj["df"] = e.ttest.df;
    obj["p_value"] = e.ttest.p_value;
    obj["significant"] = e.ttest.significant;
    obj["matcher"] = to_string(e.matcher);
    obj["retained"] = e.retained;
    obj["auroc_tie_warning"] = e.auroc_tie_warning;
    obj["scores_a"] = e.scores_a;
    obj["scores_b"] = e.scores_b;
    obj["failed_images"] = e.failed_images;
    return obj;
}

DescriptionEvaluation evaluation_from_json(const json& obj) {
    DescriptionEvaluation e;
    e.description = description_from_json(obj.at("description"));
    e.score1 = obj.at("score1").get<double>();
    e.score2 = obj.at("score2").get<double>();
    e.diff = obj.at("diff").get<double>();
    e.s_y = obj.at("s_y").get<double>();
    e.auroc = obj.at("auroc").get<double>();
    e.ttest.t_stat = obj.at("t_stat").get<double>();
    e.ttest.df = obj.at("df").get<double>();
    e.ttest.p_value = obj.at("p_value").get<double>();
    e.ttest.significant = obj.at("significant").get<bool>();
    e.matcher = matcher_from_string(obj.at("matcher").get<std::string>());
    e.retained = obj.at("retained").get<bool>();
    e.auroc_tie_warning = obj.at("auroc_tie_warning").get<bool>();
    e.scores_a = obj.at("scores_a").get<std::vector<double>>();
    e.scores_b = obj.at("scores_b").get<std::vector<double>>();
    e.failed_images = obj.at("failed_images").get<std::vector<std::string>>();
    return e;
}

json summary_to_json(const stats::DistributionSummary& s) {
    json obj;
    json hist = json::array();
    for (const auto& bin : s.histogram) hist.push_back({bin.left, bin.right, bin.count});
    obj["histogram"] = std::move(hist);
    json kde = json::array();
    for (const auto& [x, d] : s.kde) kde.push_back({x, d});
    obj["kde"] = std::move(kde);
    obj["five_number"] = {s.five_number.min, s.five_number.q1, s.five_number.median,
                          s.five_number.q3, s.five_number.max};
    obj["outliers"] = s.outliers;
    return obj;
}

stats::DistributionSummary summary_from_json(const json& obj) {
    stats::DistributionSummary s;
    for (const auto& bin : obj.at("histogram")) {
        s.histogram.push_back(stats::HistogramBin{bin.at(0).get<double>(),
                                                  bin.at(1).get<double>(),
                                                  bin.at(2).get<std::size_t>()});
    }
    for (const auto& point : obj.at("kde")) {
        s.kde.emplace_back(point.at(0).get<double>(), point.at(1).get<double>());
    }
    const auto& five = obj.at("five_number");
    s.five_number = {five.at(0).get<double>(), five.at(1).get<double>(),
                     five.at(2).get<double>(), five.at(3).get<double>(),
                     five.at(4).get<double>()};
    s.outliers = obj.at("outliers").get<std::vector<double>>();
    return s;
}

/// Retained evaluations attributed to `group` across all pairs (group_a
/// attribution), deduplicated by normalized text, best rank first.
std::vector<const DescriptionEvaluation*> retained_for_group(const ExperimentReport& report,
                                                             const std::string& group) {
    std::vector<const DescriptionEvaluation*> evals;
    for (const auto& pair : report.pairs) {
        if (pair.group_a != group) continue;
        for (std::size_t i = 0; i < pair.retained_count; ++i) {
            evals.push_back(&pair.evaluations[i]);
        }
    }
    std::stable_sort(evals.begin(), evals.end(),
                     [](const DescriptionEvaluation* a, const DescriptionEvaluation* b) {
                         return evaluation_order(*a, *b);
                     });
    std::set<std::string> seen;
    std::vector<const DescriptionEvaluation*> unique;
    for (const auto* e : evals) {
        if (seen.insert(normalized_key(e->description.text)).second) unique.push_back(e);
    }
    return unique;
}

}  // namespace

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

std::string report_to_json(const ExperimentReport& report) {
    json obj;
    obj["config"] = json::parse(report.config_snapshot);

    json pairs = json::array();
    for (const auto& pair : report.pairs) {
        json p;
        p["group_a"] = pair.group_a;
        p["group_b"] = pair.group_b;
        p["seed"] = pair.seed;
        p["sample_a"] = sample_to_json(pair.sample_a);
        p["sample_b"] = sample_to_json(pair.sample_b);
        json candidates = json::array();
        for (const auto& c : pair.candidates) candidates.push_back(description_to_json(c));
        p["candidates"] = std::move(candidates);
        json evaluations = json::array();
        for (const auto& e : pair.evaluations) evaluations.push_back(evaluation_to_json(e));
        p["evaluations"] = std::move(evaluations);
        p["retained_count"] = pair.retained_count;
        p["failed_candidates"] = pair.failed_candidates;
        pairs.push_back(std::move(p));
    }
    obj["pairs"] = std::move(pairs);
    obj["failed_pairs"] = report.failed_pairs;
    obj["significance_counts"] = report.significance_counts;
    obj["ttest_true_counts"] = report.ttest_true_counts;

    json similarity;
    similarity["groups"] = report.similarity_groups;
    similarity["matrix"] = report.similarity;
    similarity["absent"] = report.similarity_absent;
    similarity["source"] = report.similarity_source;
    obj["similarity"] = std::move(similarity);

    json distributions = json::array();
    for (const auto& d : report.distributions) {
        json entry;
        entry["group_a"] = d.group_a;
        entry["group_b"] = d.group_b;
        entry["description"] = d.description_text;
        entry["side_a"] = summary_to_json(d.side_a);
        entry["side_b"] = summary_to_json(d.side_b);
        distributions.push_back(std::move(entry));
    }
    obj["distributions"] = std::move(distributions);

    json wordfreq;
    for (const auto& [group, table] : report.word_frequency_tables) {
        json rows = json::array();
        for (const auto& [token, count] : table) rows.push_back({token, count});
        wordfreq[group] = std::move(rows);
    }
    obj["word_frequencies"] = std::move(wordfreq);

    return obj.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& bytes) {
    json obj = json::parse(bytes, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw MalformedConfig("report.json is not a JSON object");
    }
    ExperimentReport report;
    report.config_snapshot = obj.at("config").dump(2) + "\n";
    for (const auto& p : obj.at("pairs")) {
        PairComparison pair;
        pair.group_a = p.at("group_a").get<std::string>();
        pair.group_b = p.at("group_b").get<std::string>();
        pair.seed = p.at("seed").get<std::uint64_t>();
        pair.sample_a = sample_from_json(p.at("sample_a"));
        pair.sample_b = sample_from_json(p.at("sample_b"));
        for (const auto& c : p.at("candidates")) {
            pair.candidates.push_back(description_from_json(c));
        }
        for (const auto& e : p.at("evaluations")) {
            pair.evaluations.push_back(evaluation_from_json(e));
        }
        pair.retained_count = p.at("retained_count").get<std::size_t>();
        pair.failed_candidates = p.at("failed_candidates").get<std::vector<std::string>>();
        report.pairs.push_back(std::move(pair));
    }
    report.failed_pairs = obj.at("failed_pairs").get<std::vector<std::string>>();
    report.significance_counts =
        obj.at("significance_counts").get<std::map<std::string, std::size_t>>();
    report.ttest_true_counts =
        obj.at("ttest_true_counts").get<std::map<std::string, std::size_t>>();
    const auto& similarity = obj.at("similarity");
    report.similarity_groups = similarity.at("groups").get<std::vector<std::string>>();
    report.similarity = similarity.at("matrix").get<std::vector<std::vector<double>>>();
    report.similarity_absent = similarity.at("absent").get<std::vector<std::string>>();
    report.similarity_source = similarity.at("source").get<std::string>();
    for (const auto& d : obj.at("distributions")) {
        PairDistributions entry;
        entry.group_a = d.at("group_a").get<std::string>();
        entry.group_b = d.at("group_b").get<std::string>();
        entry.description_text = d.at("description").get<std::string>();
        entry.side_a = summary_from_json(d.at("side_a"));
        entry.side_b = summary_from_json(d.at("side_b"));
        report.distributions.push_back(std::move(entry));
    }
    for (const auto& [group, rows] : obj.at("word_frequencies").items()) {
        std::vector<std::pair<std::string, std::size_t>> table;
        for (const auto& row : rows) {
            table.emplace_back(row.at(0).get<std::string>(), row.at(1).get<std::size_t>());
        }
        report.word_frequency_tables[group] = std::move(table);
    }
    return report;
}

void emit_evaluations_table(const ExperimentReport& report, const std::filesystem::path& file) {
    auto out = open_out(file);
    out << kEvaluationsHeader << '\n';
    for (const auto& pair : report.pairs) {
        for (std::size_t i = 0; i < pair.evaluations.size(); ++i) {
            const auto& e = pair.evaluations[i];
            const std::size_t rank = i < pair.retained_count ? i + 1 : 0;
            out << pair.group_a << " vs " << pair.group_b << '\t' << rank << '\t'
                << e.description.text << '\t' << format_fixed(e.score1) << '\t'
                << format_fixed(e.score2) << '\t' << format_fixed(e.diff) << '\t'
                << format_fixed(e.s_y) << '\t' << format_fixed(e.ttest.t_stat) << '\t'
                << format_fixed(e.ttest.df) << '\t' << format_fixed(e.ttest.p_value) << '\t'
                << (e.ttest.significant ? "true" : "false") << '\t' << format_fixed(e.auroc)
                << '\t' << (e.retained ? "true" : "false") << '\t' << e.description.strategy
                << '\t' << to_string(e.matcher) << '\n';
        }
    }
}

std::vector<std::string> emit_chart_data(const ExperimentReport& report,
                                         const std::filesystem::path& run_dir) {
    std::vector<std::string> written;

    for (std::size_t i = 0; i < report.distributions.size(); ++i) {
        const auto& d = report.distributions[i];
        char index[8];
        std::snprintf(index, sizeof index, "%03zu", i);
        const std::string stem = "charts/pair_" + std::string(index) + "_" +
                                 sanitize_name(d.group_a) + "_vs_" + sanitize_name(d.group_b);

        {
            auto out = open_out(run_dir / (stem + "_histogram.tsv"));
            out << "bin_left\tbin_right\tcount_a\tcount_b\n";
            for (std::size_t b = 0; b < d.side_a.histogram.size(); ++b) {
                const auto& bin_a = d.side_a.histogram[b];
                const auto& bin_b = d.side_b.histogram[b];
                out << format_fixed(bin_a.left) << '\t' << format_fixed(bin_a.right) << '\t'
                    << bin_a.count << '\t' << bin_b.count << '\n';
            }
            written.push_back(stem + "_histogram.tsv");
        }
        {
            auto out = open_out(run_dir / (stem + "_kde.tsv"));
            out << "x\tdensity_a\tdensity_b\n";
            const auto& kde_a = d.side_a.kde;
            const auto& kde_b = d.side_b.kde;
            const std::size_t points = std::max(kde_a.size(), kde_b.size());
            for (std::size_t p = 0; p < points; ++p) {
                const double x = p < kde_a.size() ? kde_a[p].first
                                                  : (p < kde_b.size() ? kde_b[p].first : 0.0);
                out << format_fixed(x) << '\t'
                    << (p < kde_a.size() ? format_fixed(kde_a[p].second) : "") << '\t'
                    << (p < kde_b.size() ? format_fixed(kde_b[p].second) : "") << '\n';
            }
            written.push_back(stem + "_kde.tsv");
        }
        {
            auto out = open_out(run_dir / (stem + "_boxplot.tsv"));
            out << "group\tmin\tq1\tmedian\tq3\tmax\toutliers\n";
            auto row = [&](const std::string& label, const stats::DistributionSummary& s) {
                out << label << '\t' << format_fixed(s.five_number.min) << '\t'
                    << format_fixed(s.five_number.q1) << '\t'
                    << format_fixed(s.five_number.median) << '\t'
                    << format_fixed(s.five_number.q3) << '\t' << format_fixed(s.five_number.max);
                for (double v : s.outliers) out << '\t' << format_fixed(v);
                out << '\n';
            };
            row(d.group_a, d.side_a);
            row(d.group_b, d.side_b);
            written.push_back(stem + "_boxplot.tsv");
        }
    }

    {
        auto out = open_out(run_dir / "similarity_matrix.tsv");
        out << "group";
        for (const auto& g : report.similarity_groups) out << '\t' << g;
        out << '\n';
        for (std::size_t i = 0; i < report.similarity_groups.size(); ++i) {
            out << report.similarity_groups[i];
            for (std::size_t j = 0; j < report.similarity_groups.size(); ++j) {
                out << '\t' << format_fixed(report.similarity[i][j]);
            }
            out << '\n';
        }
        written.push_back("similarity_matrix.tsv");
    }

    for (const auto& [group, table] : report.word_frequency_tables) {
        const std::string rel = "wordfreq/" + sanitize_name(group) + ".tsv";
        auto out = open_out(run_dir / rel);
        out << "token\tcount\n";
        for (const auto& [token, count] : table) out << token << '\t' << count << '\n';
        written.push_back(rel);
    }
    return written;
}

void export_t2i_prompts(const ExperimentReport& report, std::size_t top_m,
                        const std::filesystem::path& file) {
    auto out = open_out(file);
    std::set<std::string> groups;
    for (const auto& pair : report.pairs) groups.insert(pair.group_a);
    for (const auto& group : groups) {
        out << "## group: " << group << '\n';
        const auto evals = retained_for_group(report, group);
        if (evals.empty()) {
            out << "EMPTY\n";
        } else {
            for (std::size_t i = 0; i < evals.size() && i < top_m; ++i) {
                out << evals[i]->description.text << '\n';
            }
        }
        out << '\n';
    }
}

std::vector<std::string> emit_data_files(const ExperimentReport& report,
                                         const std::filesystem::path& run_dir) {
    std::vector<std::string> written;
    {
        auto out = open_out(run_dir / "report.json");
        out << report_to_json(report);
        written.push_back("report.json");
    }
    emit_evaluations_table(report, run_dir / "evaluations.tsv");
    written.push_back("evaluations.tsv");
    auto charts = emit_chart_data(report, run_dir);
    written.insert(written.end(), charts.begin(), charts.end());
    return written;
}

ReportBundle emit_bundle(const ExperimentReport& report, const GatewayStats& stats,
                         const std::filesystem::path& runs_root) {
    const auto now = std::chrono::system_clock::now();
    const auto ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(now.time_since_epoch()).count();

    ReportBundle bundle;
    bundle.run_id =
        sha256_hex(report.config_snapshot + "\x1f" + std::to_string(ns)).substr(0, 16);
    bundle.dir = runs_root / bundle.run_id;
    std::filesystem::create_directories(bundle.dir);

    const auto files = emit_data_files(report, bundle.dir);
    for (const auto& rel : files) {
        bundle.file_digests[rel] = sha256_hex(read_file(bundle.dir / rel));
    }

    const std::time_t seconds = std::chrono::system_clock::to_time_t(now);
    char timestamp[32];
    std::tm utc{};
    gmtime_r(&seconds, &utc);
    std::strftime(timestamp, sizeof timestamp, "%Y-%m-%dT%H:%M:%SZ", &utc);

    json meta;
    meta["run_id"] = bundle.run_id;
    meta["created_utc"] = timestamp;
    meta["backend_calls"] = stats.backend_calls;
    meta["cache_hits"] = stats.cache_hits;
    meta["network_calls"] = stats.network_calls;
    meta["files"] = bundle.file_digests;
    auto out = open_out(bundle.dir / "run_meta.json");
    out << meta.dump(2) << '\n';

    return bundle;
}

}  // namespace archilens
