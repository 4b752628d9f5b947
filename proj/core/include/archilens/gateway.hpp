#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "archilens/dataset.hpp"
#include "archilens/embedding.hpp"

namespace archilens {

/// Embedding tagged with the model that produced it. Construction via
/// make_embedding enforces: >= 1 finite values, nonzero norm.
struct Embedding {
    std::string model_id;
    EmbeddingVec values;

    std::size_t dims() const { return values.size(); }
};

Embedding make_embedding(std::string model_id, EmbeddingVec values);

struct Caption {
    std::string image_id;
    std::string text;  // non-empty after trim
    std::string model_id;
};

/// Inputs to propose_differences: one variant per extraction strategy.
struct CaptionsPair {
    std::vector<std::string> captions_a;
    std::vector<std::string> captions_b;
};

struct GridImages {
    std::vector<std::string> hashes_a;  // content hashes, row-major top row
    std::vector<std::string> hashes_b;  // bottom row
};

struct DiffEmbedding {
    EmbeddingVec values;
};

struct ProposerPayload {
    std::variant<CaptionsPair, GridImages, DiffEmbedding> input;
    std::string prompt;  // fully rendered prompt text
    std::size_t k = 5;   // requested candidate count
};

/// Model identifiers recorded on outputs and used in cache keys.
struct ModelIds {
    std::string embed = "mock-embed";
    std::string caption = "mock-caption";
    std::string propose = "mock-propose";
    std::string vqa = "mock-vqa";
};

struct GatewayOptions {
    ModelIds models;
    // Yes/no question templates; variables {description} and {caption}.
    std::string vqa_prompt =
        "Does this image match the description? Answer yes or no. Description: {description}";
    std::string caption_qa_prompt =
        "Caption: {caption}\nDescription: {description}\n"
        "Does the caption align with the description? Answer yes or no.";
};

/// A backend answers canonicalized requests with raw JSON response bytes.
/// `kind` is one of embed_text | embed_image | caption | propose | vqa.
class Backend {
  public:
    virtual ~Backend() = default;

    /// Stable identity folded into cache keys (so differently-configured
    /// backends never share cache entries).
    virtual std::string id() const = 0;

    virtual std::size_t embedding_dims() const = 0;

    /// `payload_json` is the canonical JSON payload for the request kind.
    /// Returns raw response bytes. Throws BackendUnavailable on transport
    /// failure, BackendRejected on a definitive backend error.
    virtual std::string invoke(const std::string& kind, const std::string& model_id,
                               const std::string& payload_json) = 0;

    /// Wire-level request count (attempts, including retries). Zero for
    /// offline backends.
    virtual std::uint64_t network_calls() const { return 0; }
};

struct GatewayStats {
    std::uint64_t backend_calls = 0;  // requests that reached the backend
    std::uint64_t cache_hits = 0;     // requests answered from disk
    std::uint64_t network_calls = 0;  // wire attempts (HTTP backend only)
};

/// Canonical request encoding shared by cache keys and backends: compact
/// JSON of {"backend","kind","model","payload"} with lexicographically
/// sorted keys.
std::string canonical_request(const std::string& backend_id, const std::string& kind,
                              const std::string& model_id, const std::string& payload_json);

/// Replace {name} tokens in a prompt template. Unknown tokens are left
/// verbatim so template typos are visible in outputs rather than silent.
std::string render_template(const std::string& tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

/// Typed front door to the model backends with a content-addressed response
/// cache ({cache_root}/{kind}/{hh}/{hash}.bin, atomic writes). Responses are
/// parsed and validated identically on cold and warm paths, so a cache hit
/// is bit-for-bit equivalent to a backend call. Safe for concurrent use.
class Gateway {
  public:
    /// Empty cache_root disables caching.
    Gateway(std::shared_ptr<Backend> backend, std::filesystem::path cache_root,
            GatewayOptions options = {});

    Embedding embed_text(const std::string& text);
    Embedding embed_image(const ImageRecord& image);
    Caption caption_image(const ImageRecord& image);
    std::vector<std::string> propose_differences(const ProposerPayload& payload);
    bool vqa_match(const ImageRecord& image, const std::string& description);
    bool caption_qa_match(const Caption& caption, const std::string& description);

    std::size_t embedding_dims() const { return backend_->embedding_dims(); }
    const ModelIds& models() const { return options_.models; }

    GatewayStats stats() const;
    void reset_stats();

  private:
    std::string fetch(const std::string& kind, const std::string& payload_json);
    Embedding parse_embedding(const std::string& bytes) const;
    bool parse_yes_no(const std::string& bytes) const;

    std::shared_ptr<Backend> backend_;
    std::filesystem::path cache_root_;
    GatewayOptions options_;
    std::atomic<std::uint64_t> backend_calls_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
};

/// Serialize a ProposerPayload to its canonical JSON form (used for cache
/// keys, backend requests, and tests that inspect payload contents).
std::string proposer_payload_json(const ProposerPayload& payload);

}  // namespace archilens
