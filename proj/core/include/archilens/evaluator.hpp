#pragma once

#include <string>
#include <vector>

#include "archilens/extractor.hpp"
#include "archilens/gateway.hpp"
#include "archilens/stats.hpp"

namespace archilens {

enum class MatcherKind { Embedding, Vqa, CaptionQa };

MatcherKind matcher_from_string(const std::string& name);
std::string to_string(MatcherKind matcher);

/// theta(x, y): how well image x matches description y. Continuous in
/// [-1, 1] for the embedding matcher, {0, 1} for the binary matchers.
struct MatchScore {
    std::string image_id;
    std::string description_hash;  // sha256 of normalized_key(text)
    double value = 0.0;
    MatcherKind matcher = MatcherKind::Embedding;
};

/// A description scored against one sampled pair of groups.
struct DescriptionEvaluation {
    StyleDescription description;
    double score1 = 0.0;  // mean theta over D_A
    double score2 = 0.0;  // mean theta over D_B
    double diff = 0.0;    // score1 - score2
    double s_y = 0.0;     // sum over D_A minus sum over D_B
    double auroc = 0.5;
    stats::TTestResult ttest;
    MatcherKind matcher = MatcherKind::Embedding;
    bool retained = false;           // significant AND diff > 0
    bool auroc_tie_warning = false;  // binary matcher with tied scores across sides
    std::vector<double> scores_a;    // theta per D_A image, ordered by image_id
    std::vector<double> scores_b;
    std::vector<std::string> failed_images;  // ids whose theta call errored
};

struct EvaluatorOptions {
    MatcherKind matcher = MatcherKind::Embedding;
    stats::TTestOptions ttest;          // alpha lives here (default 0.05)
    double failure_budget = 0.10;       // max tolerated fraction of failed theta calls
    std::size_t max_inflight = 8;
};

/// The Style Evaluator: scores candidate descriptions against both image
/// samples, tests significance, and ranks survivors.
class Evaluator {
  public:
    Evaluator(Gateway& gateway, EvaluatorOptions options = {});

    MatchScore match_embedding(const ImageRecord& image, const StyleDescription& description);
    MatchScore match_vqa(const ImageRecord& image, const StyleDescription& description);
    MatchScore match_caption_qa(const ImageRecord& image, const StyleDescription& description);
    MatchScore match(const ImageRecord& image, const StyleDescription& description);

    /// Score a description over every image in both samples. Failed theta
    /// calls are dropped from both sides and recorded; more than
    /// failure_budget of them fails the evaluation (EvaluationFailed).
    DescriptionEvaluation evaluate_description(const StyleDescription& description,
                                               const GroupSample& sample_a,
                                               const GroupSample& sample_b);

    const EvaluatorOptions& options() const { return options_; }

  private:
    Gateway& gateway_;
    EvaluatorOptions options_;
};

/// Drop non-retained evaluations (retention re-derived as p < alpha and
/// diff > 0) and sort by auroc descending, diff descending, normalized text
/// ascending. Idempotent.
std::vector<DescriptionEvaluation> rank_and_filter(std::vector<DescriptionEvaluation> evals,
                                                   double alpha);

/// The rank_and_filter ordering, exposed for callers that need to order
/// non-retained entries consistently.
bool evaluation_order(const DescriptionEvaluation& a, const DescriptionEvaluation& b);

}  // namespace archilens
