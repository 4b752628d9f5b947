#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "archilens/embedding.hpp"
#include "archilens/gateway.hpp"

namespace archilens {

/// Configuration for the deterministic offline backend.
///
/// Two modes:
///  - generic (group_axes empty): every embedding is a seeded unit-norm
///    pseudo-random vector, a pure function of (seed, kind, input).
///  - planted: groups own orthogonal style axes. Images listed in
///    image_groups embed as their group's axis plus seeded Gaussian noise on
///    noise_axes (normalized); noise_axes conventionally cover the group
///    axes too, so the off-group side of a planted comparison gets small
///    dispersed scores rather than constants. Texts in planted_texts embed
///    exactly onto their group's axis; any other text embeds into the
///    reserved axes (those in neither group_axes nor noise_axes), so its
///    cosine against every planted image is exactly zero — distractor AUROC
///    is exactly 0.5 and planted separation is analytically predictable.
struct MockConfig {
    std::uint64_t seed = 0;
    std::size_t dims = 16;
    double embedding_scale = 1.0;  // multiplies every emitted embedding
    double noise_sigma = 0.0;
    double vqa_threshold = 0.5;

    std::map<std::string, std::size_t> group_axes;     // group -> axis index
    std::vector<std::size_t> noise_axes;               // image noise support
    std::map<std::string, std::string> image_groups;   // content_hash -> group
    std::map<std::string, std::string> planted_texts;  // exact text -> group

    // Optional per-pair proposal override, keyed "groupA|groupB". When a
    // propose request resolves to that pair, exactly these candidates are
    // returned. Otherwise the planted text for group A plus generated
    // distractors fill the requested k.
    std::map<std::string, std::vector<std::string>> proposals;
};

class MockBackend : public Backend {
  public:
    explicit MockBackend(MockConfig config);

    std::string id() const override { return id_; }
    std::size_t embedding_dims() const override { return config_.dims; }
    std::string invoke(const std::string& kind, const std::string& model_id,
                       const std::string& payload_json) override;

    // Exposed for tests that verify the documented derivations directly.
    EmbeddingVec text_embedding(const std::string& text) const;
    EmbeddingVec image_embedding(const std::string& content_hash) const;

  private:
    EmbeddingVec generic_embedding(const std::string& kind_tag, const std::string& key,
                                   const std::vector<std::size_t>& axes) const;
    std::string resolve_group_from_captions(const std::vector<std::string>& captions) const;
    std::string resolve_group_from_hashes(const std::vector<std::string>& hashes) const;
    std::string lookup_hash_by_prefix(const std::string& prefix) const;

    MockConfig config_;
    std::string id_;
    std::vector<std::size_t> reserved_axes_;  // generic-text support in planted mode
};

}  // namespace archilens
