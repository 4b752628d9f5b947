#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archilens/dataset.hpp"
#include "archilens/gateway.hpp"

namespace archilens {

/// One candidate difference description, normalized to a single line.
struct StyleDescription {
    std::string text;
    std::string strategy;  // text-based | image-grid | embedding-diff
    std::string group_a;
    std::string group_b;
    std::uint64_t run_seed = 0;
};

struct ExtractorOptions {
    std::size_t grid_per_group = 4;  // images per group in the grid strategy
    std::size_t max_inflight = 8;    // bounded parallelism for captioning/embedding

    // Prompt templates; variables {captions_a} {captions_b} {k} {grid_note}.
    std::string text_based_prompt =
        "Group A images are described by:\n{captions_a}\n"
        "Group B images are described by:\n{captions_b}\n"
        "List up to {k} visual style differences that hold for group A but not group B, "
        "one per line.";
    std::string image_grid_prompt =
        "The attached grid shows two image groups. {grid_note} "
        "List up to {k} visual style differences that hold for the top row's group but not "
        "the bottom row's group, one per line.";
    std::string embedding_diff_prompt =
        "The attached embedding is the normalized difference between the mean style "
        "embeddings of two image groups. List up to {k} visual style differences it "
        "encodes, one per line.";
};

/// Collapse all whitespace runs (including newlines) to single spaces and
/// trim; descriptions must survive tab-separated serialization.
std::string normalize_single_line(const std::string& text);

/// Key used for deduplication and rank tie-breaking: normalize_single_line,
/// lowercased, terminal punctuation stripped.
std::string normalized_key(const std::string& text);

/// Order-preserving removal of candidates whose normalized_key collides
/// with an earlier entry. Idempotent.
std::vector<StyleDescription> dedup_candidates(std::vector<StyleDescription> candidates);

/// The Style Extractor: turns a sampled pair of image groups into candidate
/// difference descriptions through one of three strategies.
class Extractor {
  public:
    Extractor(Gateway& gateway, ExtractorOptions options = {});

    /// Default strategy: caption every image, have the proposer compare the
    /// two caption lists.
    std::vector<StyleDescription> extract_text_based(const GroupSample& sample_a,
                                                     const GroupSample& sample_b, std::size_t k);

    /// Reference the first grid_per_group images of each seeded sample in a
    /// row-major 2-row grid (row 0 = group A, row 1 = group B).
    std::vector<StyleDescription> extract_image_grid(const GroupSample& sample_a,
                                                     const GroupSample& sample_b, std::size_t k);

    /// Mean image embedding per group (re-normalized), difference
    /// re-normalized; throws DegenerateDiff when the difference norm is
    /// below 1e-12.
    std::vector<StyleDescription> extract_embedding_diff(const GroupSample& sample_a,
                                                         const GroupSample& sample_b,
                                                         std::size_t k);

    std::vector<StyleDescription> extract(const std::string& strategy,
                                          const GroupSample& sample_a,
                                          const GroupSample& sample_b, std::size_t k);

  private:
    std::vector<StyleDescription> finalize(std::vector<std::string> texts,
                                           const std::string& strategy,
                                           const GroupSample& sample_a,
                                           const GroupSample& sample_b, std::size_t k) const;

    Gateway& gateway_;
    ExtractorOptions options_;
};

}  // namespace archilens
