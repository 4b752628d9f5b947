#include "archilens/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"
#include "archilens/rng.hpp"
#include "archilens/stats.hpp"

namespace archilens {

namespace {

using nlohmann::json;

std::string embedding_response(const EmbeddingVec& values) {
    json r;
    r["embedding"] = values;
    return r.dump();
}

}  // namespace

MockBackend::MockBackend(MockConfig config) : config_(std::move(config)) {
    if (config_.dims < 1) throw MalformedConfig("mock dims must be >= 1");

    // Noise axes may overlap group axes (images then jitter along the style
    // directions themselves, which is what makes the non-planted side's
    // scores disperse), but each group needs its own axis.
    std::set<std::size_t> taken;
    for (const auto& [group, axis] : config_.group_axes) {
        if (axis >= config_.dims) {
            throw MalformedConfig("mock group \"" + group + "\" axis out of range");
        }
        if (!taken.insert(axis).second) {
            throw MalformedConfig("mock group \"" + group + "\" axis collides with another group");
        }
    }
    for (std::size_t axis : config_.noise_axes) {
        if (axis >= config_.dims) throw MalformedConfig("mock noise axis out of range");
        taken.insert(axis);
    }
    if (config_.noise_sigma > 0.0 && !config_.group_axes.empty() && config_.noise_axes.empty()) {
        throw MalformedConfig("mock noise_sigma > 0 requires noise_axes");
    }
    for (const auto& [text, group] : config_.planted_texts) {
        if (!config_.group_axes.contains(group)) {
            throw MalformedConfig("mock planted text \"" + text + "\" names unknown group");
        }
    }
    for (const auto& [hash, group] : config_.image_groups) {
        if (!config_.group_axes.contains(group)) {
            throw MalformedConfig("mock image \"" + hash + "\" names unknown group");
        }
    }

    if (!config_.group_axes.empty()) {
        for (std::size_t axis = 0; axis < config_.dims; ++axis) {
            if (!taken.contains(axis)) reserved_axes_.push_back(axis);
        }
        if (reserved_axes_.empty()) {
            throw MalformedConfig(
                "mock planted mode needs at least one axis free of groups and noise");
        }
    }

    // Fold the full configuration into the backend identity so cache entries
    // from differently-configured mocks can never be confused.
    json fingerprint;
    fingerprint["seed"] = config_.seed;
    fingerprint["dims"] = config_.dims;
    fingerprint["embedding_scale"] = config_.embedding_scale;
    fingerprint["noise_sigma"] = config_.noise_sigma;
    fingerprint["vqa_threshold"] = config_.vqa_threshold;
    fingerprint["group_axes"] = config_.group_axes;
    fingerprint["noise_axes"] = config_.noise_axes;
    fingerprint["image_groups"] = config_.image_groups;
    fingerprint["planted_texts"] = config_.planted_texts;
    fingerprint["proposals"] = config_.proposals;
    id_ = "mock-" + sha256_hex(fingerprint.dump()).substr(0, 16);
}

EmbeddingVec MockBackend::generic_embedding(const std::string& kind_tag, const std::string& key,
                                            const std::vector<std::size_t>& axes) const {
    SplitMix64 rng(config_.seed ^ sha256_seed(kind_tag + "\x1f" + key));
    EmbeddingVec v(config_.dims, 0.0);
    if (axes.empty()) {
        for (double& x : v) x = rng.normal();
    } else {
        for (std::size_t axis : axes) v[axis] = rng.normal();
    }
    normalize(v);
    for (double& x : v) x *= config_.embedding_scale;
    return v;
}

EmbeddingVec MockBackend::text_embedding(const std::string& text) const {
    if (!config_.group_axes.empty()) {
        const auto planted = config_.planted_texts.find(text);
        if (planted != config_.planted_texts.end()) {
            EmbeddingVec v(config_.dims, 0.0);
            v[config_.group_axes.at(planted->second)] = config_.embedding_scale;
            return v;
        }
        return generic_embedding("embed_text", text, reserved_axes_);
    }
    return generic_embedding("embed_text", text, {});
}

EmbeddingVec MockBackend::image_embedding(const std::string& content_hash) const {
    if (!config_.group_axes.empty()) {
        const auto it = config_.image_groups.find(content_hash);
        if (it != config_.image_groups.end()) {
            // Style direction plus seeded jitter on the noise axes, unit
            // normalized. Axes outside group/noise support stay exactly
            // zero, so generic-text cosines are exactly zero.
            EmbeddingVec v(config_.dims, 0.0);
            v[config_.group_axes.at(it->second)] = 1.0;
            if (config_.noise_sigma > 0.0) {
                SplitMix64 rng(config_.seed ^ sha256_seed("noise\x1f" + content_hash));
                for (std::size_t axis : config_.noise_axes) {
                    v[axis] += config_.noise_sigma * rng.normal();
                }
            }
            normalize(v);
            for (double& x : v) x *= config_.embedding_scale;
            return v;
        }
    }
    return generic_embedding("embed_image", content_hash, {});
}

std::string MockBackend::lookup_hash_by_prefix(const std::string& prefix) const {
    // image_groups is sorted, so the first prefix match is deterministic.
    const auto it = config_.image_groups.lower_bound(prefix);
    if (it != config_.image_groups.end() && it->first.compare(0, prefix.size(), prefix) == 0) {
        return it->first;
    }
    return {};
}

std::string MockBackend::resolve_group_from_hashes(const std::vector<std::string>& hashes) const {
    std::map<std::string, std::size_t> votes;
    for (const auto& hash : hashes) {
        const auto it = config_.image_groups.find(hash);
        if (it != config_.image_groups.end()) ++votes[it->second];
    }
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [group, count] : votes) {
        if (count > best_count) {
            best = group;
            best_count = count;
        }
    }
    return best;
}

std::string MockBackend::resolve_group_from_captions(
    const std::vector<std::string>& captions) const {
    // Mock captions end in the first 8 hex chars of the image hash.
    std::vector<std::string> hashes;
    for (const auto& caption : captions) {
        const auto space = caption.find_last_of(' ');
        const std::string prefix =
            space == std::string::npos ? caption : caption.substr(space + 1);
        const std::string hash = lookup_hash_by_prefix(prefix);
        if (!hash.empty()) hashes.push_back(hash);
    }
    return resolve_group_from_hashes(hashes);
}

std::string MockBackend::invoke(const std::string& kind, const std::string& /*model_id*/,
                                const std::string& payload_json) {
    const json payload = json::parse(payload_json);

    if (kind == "embed_text") {
        return embedding_response(text_embedding(payload.at("text").get<std::string>()));
    }

    if (kind == "embed_image") {
        return embedding_response(
            image_embedding(payload.at("content_hash").get<std::string>()));
    }

    if (kind == "caption") {
        const auto hash = payload.at("content_hash").get<std::string>();
        json r;
        r["caption"] = "mock caption for " + hash.substr(0, 8);
        return r.dump();
    }

    if (kind == "propose") {
        const auto k = payload.value("k", std::size_t{5});
        std::string group_a, group_b;
        const auto strategy = payload.value("strategy", std::string{});
        if (strategy == "text-based") {
            group_a = resolve_group_from_captions(
                payload.at("captions_a").get<std::vector<std::string>>());
            group_b = resolve_group_from_captions(
                payload.at("captions_b").get<std::vector<std::string>>());
        } else if (strategy == "image-grid") {
            group_a = resolve_group_from_hashes(
                payload.at("images_a").get<std::vector<std::string>>());
            group_b = resolve_group_from_hashes(
                payload.at("images_b").get<std::vector<std::string>>());
        } else if (strategy == "embedding-diff") {
            const auto diff = payload.at("diff_embedding").get<EmbeddingVec>();
            double best = 0.0, worst = 0.0;
            for (const auto& [group, axis] : config_.group_axes) {
                if (axis >= diff.size()) continue;
                if (diff[axis] > best) {
                    best = diff[axis];
                    group_a = group;
                }
                if (diff[axis] < worst) {
                    worst = diff[axis];
                    group_b = group;
                }
            }
        }

        std::vector<std::string> candidates;
        if (!group_a.empty()) {
            const auto override_it = config_.proposals.find(group_a + "|" + group_b);
            if (override_it != config_.proposals.end()) {
                candidates = override_it->second;
            } else {
                // One planted description for the A side (lexicographically
                // first configured text), then distinct filler distractors.
                for (const auto& [text, group] : config_.planted_texts) {
                    if (group == group_a) {
                        candidates.push_back(text);
                        break;
                    }
                }
                const std::string contrast = group_b.empty() ? "other" : group_b;
                for (std::size_t i = 1; candidates.size() < k; ++i) {
                    candidates.push_back("mock distractor " + std::to_string(i) +
                                         " distinguishing " + group_a + " from " + contrast);
                }
            }
        } else {
            // Generic mode: deterministic per-payload candidate list.
            const std::string tag = sha256_hex(payload_json).substr(0, 8);
            for (std::size_t i = 1; i <= k; ++i) {
                candidates.push_back("mock candidate " + std::to_string(i) + " for " + tag);
            }
        }
        json r;
        r["candidates"] = candidates;
        return r.dump();
    }

    if (kind == "vqa") {
        const auto description = payload.at("description").get<std::string>();
        EmbeddingVec image_vec;
        if (payload.contains("content_hash")) {
            image_vec = image_embedding(payload.at("content_hash").get<std::string>());
        } else {
            // Caption-QA path: recover the image from the caption's hash
            // prefix when possible, else treat the caption as plain text.
            const auto caption = payload.at("caption").get<std::string>();
            const auto space = caption.find_last_of(' ');
            const std::string prefix =
                space == std::string::npos ? caption : caption.substr(space + 1);
            const std::string hash = lookup_hash_by_prefix(prefix);
            image_vec = hash.empty() ? text_embedding(caption) : image_embedding(hash);
        }
        const EmbeddingVec text_vec = text_embedding(description);
        const double theta = stats::cosine(image_vec, text_vec);
        json r;
        r["answer"] = theta > config_.vqa_threshold ? "yes" : "no";
        return r.dump();
    }

    throw BackendRejected("mock backend: unknown request kind \"" + kind + "\"");
}

}  // namespace archilens
