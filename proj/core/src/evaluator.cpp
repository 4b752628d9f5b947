#include "archilens/evaluator.hpp"

#include <algorithm>
#include <set>

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"
#include "archilens/parallel.hpp"

namespace archilens {

namespace {

struct SideScores {
    std::vector<double> values;                // ordered by image_id
    std::vector<std::string> failed_images;
};

bool sides_share_a_value(const std::vector<double>& a, const std::vector<double>& b) {
    std::set<double> seen(a.begin(), a.end());
    return std::any_of(b.begin(), b.end(), [&](double v) { return seen.contains(v); });
}

}  // namespace

MatcherKind matcher_from_string(const std::string& name) {
    if (name == "embedding") return MatcherKind::Embedding;
    if (name == "vqa") return MatcherKind::Vqa;
    if (name == "caption-qa") return MatcherKind::CaptionQa;
    throw DomainError("unknown matcher: " + name);
}

std::string to_string(MatcherKind matcher) {
    switch (matcher) {
        case MatcherKind::Embedding: return "embedding";
        case MatcherKind::Vqa: return "vqa";
        case MatcherKind::CaptionQa: return "caption-qa";
    }
    throw DomainError("invalid matcher value");
}

Evaluator::Evaluator(Gateway& gateway, EvaluatorOptions options)
    : gateway_(gateway), options_(options) {}

MatchScore Evaluator::match_embedding(const ImageRecord& image,
                                      const StyleDescription& description) {
    const Embedding image_vec = gateway_.embed_image(image);
    const Embedding text_vec = gateway_.embed_text(description.text);
    return MatchScore{image.id, sha256_hex(normalized_key(description.text)),
                      stats::cosine(image_vec.values, text_vec.values), MatcherKind::Embedding};
}

MatchScore Evaluator::match_vqa(const ImageRecord& image, const StyleDescription& description) {
    const bool yes = gateway_.vqa_match(image, description.text);
    return MatchScore{image.id, sha256_hex(normalized_key(description.text)), yes ? 1.0 : 0.0,
                      MatcherKind::Vqa};
}

MatchScore Evaluator::match_caption_qa(const ImageRecord& image,
                                       const StyleDescription& description) {
    const Caption caption = gateway_.caption_image(image);
    const bool yes = gateway_.caption_qa_match(caption, description.text);
    return MatchScore{image.id, sha256_hex(normalized_key(description.text)), yes ? 1.0 : 0.0,
                      MatcherKind::CaptionQa};
}

MatchScore Evaluator::match(const ImageRecord& image, const StyleDescription& description) {
    switch (options_.matcher) {
        case MatcherKind::Embedding: return match_embedding(image, description);
        case MatcherKind::Vqa: return match_vqa(image, description);
        case MatcherKind::CaptionQa: return match_caption_qa(image, description);
    }
    throw DomainError("invalid matcher value");
}

DescriptionEvaluation Evaluator::evaluate_description(const StyleDescription& description,
                                                      const GroupSample& sample_a,
                                                      const GroupSample& sample_b) {
    if (sample_a.records.empty() || sample_b.records.empty()) {
        throw EmptyInput("evaluation requires non-empty samples");
    }

    auto score_side = [&](const GroupSample& sample) {
        auto attempts =
            parallel_try_map(sample.records, options_.max_inflight,
                             [&](const ImageRecord& rec) { return match(rec, description); });
        SideScores side;
        std::vector<MatchScore> ok;
        for (std::size_t i = 0; i < attempts.size(); ++i) {
            if (attempts[i].ok()) {
                ok.push_back(std::move(*attempts[i].value));
            } else {
                side.failed_images.push_back(sample.records[i].id + ": " + attempts[i].message);
            }
        }
        // Deterministic aggregation order, independent of completion order.
        std::sort(ok.begin(), ok.end(), [](const MatchScore& a, const MatchScore& b) {
            return a.image_id < b.image_id;
        });
        side.values.reserve(ok.size());
        for (const auto& score : ok) side.values.push_back(score.value);
        return side;
    };
    SideScores side_a = score_side(sample_a);
    SideScores side_b = score_side(sample_b);

    const std::size_t total = sample_a.records.size() + sample_b.records.size();
    const std::size_t failed = side_a.failed_images.size() + side_b.failed_images.size();
    if (static_cast<double>(failed) > options_.failure_budget * static_cast<double>(total)) {
        std::string detail = side_a.failed_images.empty() ? side_b.failed_images.front()
                                                          : side_a.failed_images.front();
        throw EvaluationFailed(std::to_string(failed) + "/" + std::to_string(total) +
                               " theta calls failed (budget " +
                               std::to_string(options_.failure_budget) + "); first: " + detail);
    }

    DescriptionEvaluation eval;
    eval.description = description;
    eval.scores_a = std::move(side_a.values);
    eval.scores_b = std::move(side_b.values);
    eval.failed_images = std::move(side_a.failed_images);
    eval.failed_images.insert(eval.failed_images.end(), side_b.failed_images.begin(),
                              side_b.failed_images.end());

    eval.score1 = stats::mean(eval.scores_a);
    eval.score2 = stats::mean(eval.scores_b);
    eval.diff = eval.score1 - eval.score2;
    double sum_a = 0.0, sum_b = 0.0;
    for (double v : eval.scores_a) sum_a += v;
    for (double v : eval.scores_b) sum_b += v;
    eval.s_y = sum_a - sum_b;
    eval.auroc = stats::auroc(eval.scores_a, eval.scores_b);
    eval.ttest = stats::welch_t_test(eval.scores_a, eval.scores_b, options_.ttest);
    eval.matcher = options_.matcher;
    eval.retained = eval.ttest.significant && eval.diff > 0.0;
    eval.auroc_tie_warning = options_.matcher != MatcherKind::Embedding &&
                             sides_share_a_value(eval.scores_a, eval.scores_b);
    return eval;
}

bool evaluation_order(const DescriptionEvaluation& a, const DescriptionEvaluation& b) {
    if (a.auroc != b.auroc) return a.auroc > b.auroc;
    if (a.diff != b.diff) return a.diff > b.diff;
    return normalized_key(a.description.text) < normalized_key(b.description.text);
}

std::vector<DescriptionEvaluation> rank_and_filter(std::vector<DescriptionEvaluation> evals,
                                                   double alpha) {
    std::vector<DescriptionEvaluation> retained;
    retained.reserve(evals.size());
    for (auto& eval : evals) {
        if (eval.ttest.p_value < alpha && eval.diff > 0.0) retained.push_back(std::move(eval));
    }
    std::stable_sort(retained.begin(), retained.end(), evaluation_order);
    return retained;
}

}  // namespace archilens
