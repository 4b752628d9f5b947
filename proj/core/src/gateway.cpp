#include "archilens/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "archilens/digest.hpp"
#include "archilens/errors.hpp"

namespace archilens {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    auto begin = s.begin();
    auto end = s.end();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
    return std::string(begin, end);
}

json parse_response(const std::string& bytes, const std::string& kind) {
    json parsed = json::parse(bytes, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        if (kind == "propose") throw EmptyProposal("backend reply is not a JSON object");
        throw BackendRejected("backend reply for " + kind + " is not a JSON object");
    }
    return parsed;
}

}  // namespace

Embedding make_embedding(std::string model_id, EmbeddingVec values) {
    if (values.empty()) throw DimensionMismatch("embedding must have >= 1 dims");
    validate_embedding(values, values.size());
    if (norm(values) == 0.0) throw DomainError("embedding has zero norm");
    return Embedding{std::move(model_id), std::move(values)};
}

std::string canonical_request(const std::string& backend_id, const std::string& kind,
                              const std::string& model_id, const std::string& payload_json) {
    json req;
    req["backend"] = backend_id;
    req["kind"] = kind;
    req["model"] = model_id;
    req["payload"] = json::parse(payload_json);
    return req.dump();  // nlohmann objects hold sorted keys; dump() is compact
}

std::string render_template(const std::string& tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars) {
    std::string out = tmpl;
    for (const auto& [name, value] : vars) {
        const std::string token = "{" + name + "}";
        std::string::size_type pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string proposer_payload_json(const ProposerPayload& payload) {
    json p;
    if (const auto* captions = std::get_if<CaptionsPair>(&payload.input)) {
        p["strategy"] = "text-based";
        p["captions_a"] = captions->captions_a;
        p["captions_b"] = captions->captions_b;
    } else if (const auto* grid = std::get_if<GridImages>(&payload.input)) {
        p["strategy"] = "image-grid";
        p["images_a"] = grid->hashes_a;
        p["images_b"] = grid->hashes_b;
        // Row-major grid: row 0 holds group A's images, row 1 group B's.
        p["grid_rows"] = 2;
        p["grid_cols"] = std::max(grid->hashes_a.size(), grid->hashes_b.size());
    } else {
        const auto& diff = std::get<DiffEmbedding>(payload.input);
        p["strategy"] = "embedding-diff";
        p["diff_embedding"] = diff.values;
    }
    p["prompt"] = payload.prompt;
    p["k"] = payload.k;
    return p.dump();
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::filesystem::path cache_root,
                 GatewayOptions options)
    : backend_(std::move(backend)), cache_root_(std::move(cache_root)),
      options_(std::move(options)) {
    if (!backend_) throw DomainError("gateway requires a backend");
}

std::string Gateway::fetch(const std::string& kind, const std::string& payload_json) {
    namespace fs = std::filesystem;

    std::string model;
    if (kind == "embed_text" || kind == "embed_image") model = options_.models.embed;
    else if (kind == "caption") model = options_.models.caption;
    else if (kind == "propose") model = options_.models.propose;
    else model = options_.models.vqa;

    const std::string key =
        sha256_hex(canonical_request(backend_->id(), kind, model, payload_json));

    fs::path entry;
    if (!cache_root_.empty()) {
        entry = cache_root_ / kind / key.substr(0, 2) / (key + ".bin");
        std::ifstream in(entry, std::ios::binary);
        if (in) {
            std::ostringstream buf;
            buf << in.rdbuf();
            ++cache_hits_;
            return buf.str();
        }
    }

    const std::string bytes = backend_->invoke(kind, model, payload_json);
    ++backend_calls_;

    if (!cache_root_.empty()) {
        // Atomic publish: write a unique temp file, then rename into place.
        fs::create_directories(entry.parent_path());
        static std::atomic<std::uint64_t> temp_counter{0};
        const fs::path temp =
            entry.parent_path() / (key + ".tmp" + std::to_string(temp_counter++));
        {
            std::ofstream out(temp, std::ios::binary | std::ios::trunc);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw DomainError("cache write failed: " + temp.string());
        }
        fs::rename(temp, entry);
    }
    return bytes;
}

Embedding Gateway::parse_embedding(const std::string& bytes) const {
    const json parsed = parse_response(bytes, "embed");
    if (!parsed.contains("embedding") || !parsed["embedding"].is_array()) {
        throw BackendRejected("embed reply lacks an \"embedding\" array");
    }
    EmbeddingVec values;
    values.reserve(parsed["embedding"].size());
    for (const auto& v : parsed["embedding"]) {
        if (!v.is_number()) throw BackendRejected("embedding contains a non-numeric entry");
        values.push_back(v.get<double>());
    }
    if (values.size() != backend_->embedding_dims()) {
        throw DimensionMismatch("backend returned " + std::to_string(values.size()) +
                                " dims, model declares " +
                                std::to_string(backend_->embedding_dims()));
    }
    return make_embedding(options_.models.embed, std::move(values));
}

bool Gateway::parse_yes_no(const std::string& bytes) const {
    const json parsed = parse_response(bytes, "vqa");
    if (!parsed.contains("answer") || !parsed["answer"].is_string()) {
        throw UnparseableAnswer("vqa reply lacks an \"answer\" string");
    }
    std::string answer = trim(parsed["answer"].get<std::string>());
    std::transform(answer.begin(), answer.end(), answer.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    while (!answer.empty() && (answer.back() == '.' || answer.back() == '!')) answer.pop_back();
    if (answer == "yes") return true;
    if (answer == "no") return false;
    throw UnparseableAnswer("vqa answer is neither yes nor no: \"" + answer + "\"");
}

Embedding Gateway::embed_text(const std::string& text) {
    if (trim(text).empty()) throw DomainError("embed_text requires non-empty text");
    json payload;
    payload["text"] = text;
    return parse_embedding(fetch("embed_text", payload.dump()));
}

Embedding Gateway::embed_image(const ImageRecord& image) {
    // Keyed by content hash alone: records with equal bytes share embeddings.
    json payload;
    payload["content_hash"] = image.content_hash;
    return parse_embedding(fetch("embed_image", payload.dump()));
}

Caption Gateway::caption_image(const ImageRecord& image) {
    json payload;
    payload["content_hash"] = image.content_hash;
    const json parsed = parse_response(fetch("caption", payload.dump()), "caption");
    if (!parsed.contains("caption") || !parsed["caption"].is_string()) {
        throw BackendRejected("caption reply lacks a \"caption\" string");
    }
    const std::string text = trim(parsed["caption"].get<std::string>());
    if (text.empty()) throw BackendRejected("backend returned an empty caption");
    return Caption{image.id, text, options_.models.caption};
}

std::vector<std::string> Gateway::propose_differences(const ProposerPayload& payload) {
    if (const auto* captions = std::get_if<CaptionsPair>(&payload.input)) {
        if (captions->captions_a.empty() || captions->captions_b.empty()) {
            throw EmptyInput("propose_differences requires non-empty caption lists");
        }
    }
    const json parsed =
        parse_response(fetch("propose", proposer_payload_json(payload)), "propose");
    if (!parsed.contains("candidates") || !parsed["candidates"].is_array()) {
        throw EmptyProposal("propose reply lacks a \"candidates\" array");
    }
    std::vector<std::string> candidates;
    for (const auto& c : parsed["candidates"]) {
        if (!c.is_string()) continue;
        const std::string text = trim(c.get<std::string>());
        if (!text.empty()) candidates.push_back(text);
    }
    if (candidates.empty()) throw EmptyProposal("backend proposed no usable candidates");
    return candidates;
}

bool Gateway::vqa_match(const ImageRecord& image, const std::string& description) {
    if (trim(description).empty()) throw DomainError("vqa_match requires non-empty description");
    json payload;
    payload["content_hash"] = image.content_hash;
    payload["description"] = description;
    payload["prompt"] = render_template(options_.vqa_prompt, {{"description", description}});
    return parse_yes_no(fetch("vqa", payload.dump()));
}

bool Gateway::caption_qa_match(const Caption& caption, const std::string& description) {
    if (trim(description).empty()) {
        throw DomainError("caption_qa_match requires non-empty description");
    }
    json payload;
    payload["caption"] = caption.text;
    payload["description"] = description;
    payload["prompt"] = render_template(options_.caption_qa_prompt,
                                        {{"caption", caption.text}, {"description", description}});
    return parse_yes_no(fetch("vqa", payload.dump()));
}

GatewayStats Gateway::stats() const {
    return GatewayStats{backend_calls_.load(), cache_hits_.load(), backend_->network_calls()};
}

void Gateway::reset_stats() {
    backend_calls_ = 0;
    cache_hits_ = 0;
}

}  // namespace archilens
