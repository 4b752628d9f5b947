#include "archilens/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "archilens/errors.hpp"
#include "archilens/parallel.hpp"

namespace archilens {

namespace {

std::string bullet_list(const std::vector<std::string>& lines) {
    std::ostringstream out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out << '\n';
        out << "- " << lines[i];
    }
    return out.str();
}

void check_samples(const GroupSample& a, const GroupSample& b, std::size_t k) {
    if (a.records.empty() || b.records.empty()) {
        throw EmptyInput("extraction requires non-empty samples");
    }
    if (k < 1) throw DomainError("extraction requires k >= 1");
}

}  // namespace

std::string normalize_single_line(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;  // leading whitespace is dropped
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string normalized_key(const std::string& text) {
    std::string key = normalize_single_line(text);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    while (!key.empty()) {
        const char c = key.back();
        if (c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':') {
            key.pop_back();
            while (!key.empty() && key.back() == ' ') key.pop_back();
        } else {
            break;
        }
    }
    return key;
}

std::vector<StyleDescription> dedup_candidates(std::vector<StyleDescription> candidates) {
    std::set<std::string> seen;
    std::vector<StyleDescription> out;
    out.reserve(candidates.size());
    for (auto& c : candidates) {
        if (seen.insert(normalized_key(c.text)).second) out.push_back(std::move(c));
    }
    return out;
}

Extractor::Extractor(Gateway& gateway, ExtractorOptions options)
    : gateway_(gateway), options_(std::move(options)) {}

std::vector<StyleDescription> Extractor::finalize(std::vector<std::string> texts,
                                                  const std::string& strategy,
                                                  const GroupSample& sample_a,
                                                  const GroupSample& sample_b,
                                                  std::size_t k) const {
    std::vector<StyleDescription> described;
    described.reserve(texts.size());
    for (auto& text : texts) {
        StyleDescription d;
        d.text = normalize_single_line(text);
        if (d.text.empty()) continue;
        d.strategy = strategy;
        d.group_a = sample_a.group;
        d.group_b = sample_b.group;
        d.run_seed = sample_a.seed;
        described.push_back(std::move(d));
    }
    auto unique = dedup_candidates(std::move(described));
    if (unique.empty()) throw EmptyProposal("no candidates survived normalization");
    if (unique.size() > k) unique.resize(k);
    return unique;
}

std::vector<StyleDescription> Extractor::extract_text_based(const GroupSample& sample_a,
                                                            const GroupSample& sample_b,
                                                            std::size_t k) {
    check_samples(sample_a, sample_b, k);

    auto caption_all = [&](const std::vector<ImageRecord>& records) {
        return parallel_map(records, options_.max_inflight,
                            [&](const ImageRecord& rec) { return gateway_.caption_image(rec).text; });
    };
    CaptionsPair captions{caption_all(sample_a.records), caption_all(sample_b.records)};

    ProposerPayload payload;
    payload.prompt = render_template(options_.text_based_prompt,
                                     {{"captions_a", bullet_list(captions.captions_a)},
                                      {"captions_b", bullet_list(captions.captions_b)},
                                      {"k", std::to_string(k)}});
    payload.k = k;
    payload.input = std::move(captions);

    return finalize(gateway_.propose_differences(payload), "text-based", sample_a, sample_b, k);
}

std::vector<StyleDescription> Extractor::extract_image_grid(const GroupSample& sample_a,
                                                            const GroupSample& sample_b,
                                                            std::size_t k) {
    check_samples(sample_a, sample_b, k);
    if (options_.grid_per_group < 1) throw DomainError("grid_per_group must be >= 1");

    auto first_hashes = [&](const GroupSample& sample) {
        std::vector<std::string> hashes;
        const std::size_t g = std::min(options_.grid_per_group, sample.records.size());
        hashes.reserve(g);
        for (std::size_t i = 0; i < g; ++i) hashes.push_back(sample.records[i].content_hash);
        return hashes;
    };
    GridImages grid{first_hashes(sample_a), first_hashes(sample_b)};

    const std::string grid_note =
        "Row-major layout: row 1 holds " + std::to_string(grid.hashes_a.size()) +
        " images from the first group, row 2 holds " + std::to_string(grid.hashes_b.size()) +
        " images from the second group.";
    ProposerPayload payload;
    payload.prompt = render_template(options_.image_grid_prompt,
                                     {{"grid_note", grid_note}, {"k", std::to_string(k)}});
    payload.k = k;
    payload.input = std::move(grid);

    return finalize(gateway_.propose_differences(payload), "image-grid", sample_a, sample_b, k);
}

std::vector<StyleDescription> Extractor::extract_embedding_diff(const GroupSample& sample_a,
                                                                const GroupSample& sample_b,
                                                                std::size_t k) {
    check_samples(sample_a, sample_b, k);

    auto mean_of = [&](const std::vector<ImageRecord>& records) {
        auto embeddings =
            parallel_map(records, options_.max_inflight,
                         [&](const ImageRecord& rec) { return gateway_.embed_image(rec).values; });
        EmbeddingVec m = mean_embedding(embeddings);
        normalize(m);
        return m;
    };

    EmbeddingVec diff = mean_of(sample_a.records);
    const EmbeddingVec mean_b = mean_of(sample_b.records);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= mean_b[i];
    if (norm(diff) < 1e-12) {
        throw DegenerateDiff("mean embeddings of " + sample_a.group + " and " + sample_b.group +
                             " coincide");
    }
    normalize(diff);

    ProposerPayload payload;
    payload.prompt =
        render_template(options_.embedding_diff_prompt, {{"k", std::to_string(k)}});
    payload.k = k;
    payload.input = DiffEmbedding{std::move(diff)};

    return finalize(gateway_.propose_differences(payload), "embedding-diff", sample_a, sample_b,
                    k);
}

std::vector<StyleDescription> Extractor::extract(const std::string& strategy,
                                                 const GroupSample& sample_a,
                                                 const GroupSample& sample_b, std::size_t k) {
    if (strategy == "text-based") return extract_text_based(sample_a, sample_b, k);
    if (strategy == "image-grid") return extract_image_grid(sample_a, sample_b, k);
    if (strategy == "embedding-diff") return extract_embedding_diff(sample_a, sample_b, k);
    throw DomainError("unknown extraction strategy: " + strategy);
}

}  // namespace archilens
