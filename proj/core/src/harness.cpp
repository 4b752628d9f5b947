#include "archilens/harness.hpp"

#include <algorithm>
#include <cmath>

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"

namespace archilens {

namespace {

/// 200 evenly spaced points spanning [lo, hi] (a single point when the
/// range is degenerate).
std::vector<double> kde_grid(double lo, double hi) {
    constexpr std::size_t kPoints = 200;
    std::vector<double> grid;
    grid.reserve(kPoints);
    if (hi <= lo) {
        grid.push_back(lo);
        return grid;
    }
    const double step = (hi - lo) / static_cast<double>(kPoints - 1);
    for (std::size_t i = 0; i < kPoints; ++i) grid.push_back(lo + step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

stats::DistributionSummary summarize_side(const std::vector<double>& values,
                                          double lo, double hi,
                                          const std::vector<double>& grid) {
    stats::DistributionSummary s;
    s.histogram = stats::histogram_range(values, 20, lo, hi);
    try {
        s.kde = stats::kde(values, grid);
    } catch (const ZeroBandwidth&) {
        // A constant side (every theta identical) has no density estimate;
        // the histogram and five-number summary still describe it fully.
        s.kde.clear();
    }
    s.five_number = stats::five_number_summary(values);
    s.outliers = stats::outliers(values);
    return s;
}

}  // namespace

std::uint64_t derive_pair_seed(std::uint64_t master_seed, const std::string& group_a,
                               const std::string& group_b) {
    std::string bytes;
    bytes.reserve(8 + group_a.size() + 1 + group_b.size());
    for (int i = 0; i < 8; ++i) {
        bytes.push_back(static_cast<char>((master_seed >> (8 * i)) & 0xff));
    }
    bytes += group_a;
    bytes.push_back('\x1f');
    bytes += group_b;
    return sha256_seed(bytes);
}

Harness::Harness(Gateway& gateway, const DatasetManifest& manifest, RunConfig config)
    : gateway_(gateway), manifest_(manifest), config_(std::move(config)) {}

PairComparison Harness::run_pair(const std::string& group_a, const std::string& group_b) {
    if (!manifest_.groups.contains(group_a)) throw UnknownGroup("no such group: " + group_a);
    if (!manifest_.groups.contains(group_b)) throw UnknownGroup("no such group: " + group_b);

    PairComparison pair;
    pair.group_a = group_a;
    pair.group_b = group_b;
    pair.seed = derive_pair_seed(config_.master_seed, group_a, group_b);
    // Both sides draw from the same seed: a self-pair then evaluates two
    // identical samples, making "no retained difference" exact rather than
    // merely likely.
    pair.sample_a = sample_group(manifest_, group_a, config_.n_per_group, pair.seed);
    pair.sample_b = sample_group(manifest_, group_b, config_.n_per_group, pair.seed);

    Extractor extractor(gateway_, config_.extractor);
    pair.candidates =
        extractor.extract(config_.strategy, pair.sample_a, pair.sample_b, config_.k_candidates);

    Evaluator evaluator(gateway_, evaluator_options(config_));
    std::vector<DescriptionEvaluation> evaluations;
    for (const auto& candidate : pair.candidates) {
        try {
            evaluations.push_back(
                evaluator.evaluate_description(candidate, pair.sample_a, pair.sample_b));
        } catch (const Error& e) {
            pair.failed_candidates.push_back(candidate.text + ": " + e.what());
        }
    }
    if (evaluations.empty()) {
        throw EvaluationFailed("pair " + group_a + "|" + group_b +
                               ": every candidate evaluation failed" +
                               (pair.failed_candidates.empty()
                                    ? std::string()
                                    : "; first: " + pair.failed_candidates.front()));
    }

    auto ranked = rank_and_filter(evaluations, config_.alpha);
    pair.retained_count = ranked.size();
    std::vector<DescriptionEvaluation> rest;
    for (auto& eval : evaluations) {
        if (!(eval.ttest.p_value < config_.alpha && eval.diff > 0.0)) {
            rest.push_back(std::move(eval));
        }
    }
    std::stable_sort(rest.begin(), rest.end(), evaluation_order);
    pair.evaluations = std::move(ranked);
    pair.evaluations.insert(pair.evaluations.end(), std::make_move_iterator(rest.begin()),
                            std::make_move_iterator(rest.end()));
    return pair;
}

ExperimentReport Harness::run_all() {
    return run_pairs(enumerate_pairs(manifest_, pair_mode_from_string(config_.pair_mode)));
}

ExperimentReport Harness::run_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    ExperimentReport report;
    report.config_snapshot = config_snapshot_json(config_);
    report.similarity_source = config_.similarity_source;

    for (const auto& [a, b] : pairs) {
        try {
            report.pairs.push_back(run_pair(a, b));
        } catch (const Error& e) {
            report.failed_pairs.push_back(a + "|" + b + ": " + e.what());
        }
    }
    if (report.pairs.empty()) {
        throw EvaluationFailed("all " + std::to_string(pairs.size()) + " pairs failed" +
                               (report.failed_pairs.empty()
                                    ? std::string()
                                    : "; first: " + report.failed_pairs.front()));
    }
    aggregate(report);
    return report;
}

void Harness::aggregate(ExperimentReport& report) {
    const bool attribute_both = config_.significance_attribution == "both";

    // Counts start at zero for every group that completed a pair, so groups
    // with nothing retained still appear explicitly.
    std::map<std::string, std::vector<std::string>> retained_texts;
    for (const auto& pair : report.pairs) {
        report.significance_counts.try_emplace(pair.group_a, 0);
        report.ttest_true_counts.try_emplace(pair.group_a, 0);
        retained_texts.try_emplace(pair.group_a);
        if (attribute_both) {
            report.significance_counts.try_emplace(pair.group_b, 0);
            report.ttest_true_counts.try_emplace(pair.group_b, 0);
            retained_texts.try_emplace(pair.group_b);
        }
        for (const auto& eval : pair.evaluations) {
            if (eval.retained) {
                ++report.significance_counts[pair.group_a];
                retained_texts[pair.group_a].push_back(eval.description.text);
                if (attribute_both) {
                    ++report.significance_counts[pair.group_b];
                    retained_texts[pair.group_b].push_back(eval.description.text);
                }
            }
            if (eval.ttest.significant) {
                ++report.ttest_true_counts[pair.group_a];
                if (attribute_both) ++report.ttest_true_counts[pair.group_b];
            }
        }
    }

    // Word frequencies over each group's retained description texts.
    const auto stopwords = config_.stopwords_path.empty()
                               ? stats::default_stopwords()
                               : stats::load_stopwords(
                                     config_.resolve(config_.stopwords_path).string());
    for (const auto& [group, texts] : retained_texts) {
        report.word_frequency_tables[group] = stats::word_frequencies(texts, stopwords);
    }

    // Similarity matrix over mean embeddings; groups with no retained
    // descriptions are omitted and listed as absent.
    std::map<std::string, EmbeddingVec> group_vecs;
    if (config_.similarity_source == "images") {
        for (const auto& [group, _] : retained_texts) {
            std::vector<EmbeddingVec> embeddings;
            for (const auto& record : manifest_.groups.at(group)) {
                embeddings.push_back(gateway_.embed_image(record).values);
            }
            if (embeddings.empty()) continue;
            EmbeddingVec m = mean_embedding(embeddings);
            if (norm(m) == 0.0) continue;
            normalize(m);
            group_vecs[group] = std::move(m);
        }
    } else {
        for (const auto& [group, texts] : retained_texts) {
            if (texts.empty()) continue;
            std::vector<EmbeddingVec> embeddings;
            embeddings.reserve(texts.size());
            for (const auto& text : texts) {
                embeddings.push_back(gateway_.embed_text(text).values);
            }
            EmbeddingVec m = mean_embedding(embeddings);
            if (norm(m) == 0.0) continue;
            normalize(m);
            group_vecs[group] = std::move(m);
        }
    }
    for (const auto& [group, _] : retained_texts) {
        if (!group_vecs.contains(group)) report.similarity_absent.push_back(group);
    }
    for (const auto& [group, _] : group_vecs) report.similarity_groups.push_back(group);
    const std::size_t n = report.similarity_groups.size();
    report.similarity.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        report.similarity[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double value = stats::cosine(group_vecs.at(report.similarity_groups[i]),
                                               group_vecs.at(report.similarity_groups[j]));
            report.similarity[i][j] = value;
            report.similarity[j][i] = value;  // computed once; symmetric by construction
        }
    }

    // Distribution summaries for each pair's top retained description:
    // shared 20 bins and a shared 200-point KDE grid over the union range.
    for (const auto& pair : report.pairs) {
        if (pair.retained_count == 0) continue;
        const auto& top = pair.evaluations.front();
        if (top.scores_a.empty() || top.scores_b.empty()) continue;
        double lo = *std::min_element(top.scores_a.begin(), top.scores_a.end());
        double hi = *std::max_element(top.scores_a.begin(), top.scores_a.end());
        lo = std::min(lo, *std::min_element(top.scores_b.begin(), top.scores_b.end()));
        hi = std::max(hi, *std::max_element(top.scores_b.begin(), top.scores_b.end()));
        if (lo == hi) hi = lo + 1.0;  // histogram's degenerate-range convention

        PairDistributions d;
        d.group_a = pair.group_a;
        d.group_b = pair.group_b;
        d.description_text = top.description.text;
        const auto grid = kde_grid(lo, hi);
        d.side_a = summarize_side(top.scores_a, lo, hi, grid);
        d.side_b = summarize_side(top.scores_b, lo, hi, grid);
        report.distributions.push_back(std::move(d));
    }
}

std::map<std::string, std::size_t> significance_counts(const ExperimentReport& report) {
    return report.significance_counts;
}

std::size_t total_evaluations(const ExperimentReport& report) {
    std::size_t n = 0;
    for (const auto& pair : report.pairs) n += pair.evaluations.size();
    return n;
}

std::size_t total_retained(const ExperimentReport& report) {
    std::size_t n = 0;
    for (const auto& pair : report.pairs) n += pair.retained_count;
    return n;
}

double significance_rate(const ExperimentReport& report) {
    std::size_t total = 0;
    std::size_t significant = 0;
    for (const auto& pair : report.pairs) {
        for (const auto& eval : pair.evaluations) {
            ++total;
            if (eval.ttest.significant) ++significant;
        }
    }
    if (total == 0) throw EmptyReport("no evaluations recorded");
    return static_cast<double>(significant) / static_cast<double>(total);
}

}  // namespace archilens
