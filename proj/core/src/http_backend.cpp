#include "archilens/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "archilens/errors.hpp"

namespace archilens {

namespace {

std::string endpoint_for(const std::string& kind) {
    if (kind == "embed_text" || kind == "embed_image") return "/v1/embed";
    if (kind == "caption") return "/v1/caption";
    if (kind == "propose") return "/v1/propose";
    if (kind == "vqa") return "/v1/vqa";
    throw BackendRejected("http backend: unknown request kind \"" + kind + "\"");
}

}  // namespace

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw MalformedConfig("http backend requires a base_url");
    if (config_.max_attempts < 1) throw MalformedConfig("http max_attempts must be >= 1");
}

std::string HttpBackend::invoke(const std::string& kind, const std::string& model_id,
                                const std::string& payload_json) {
    const std::string path = endpoint_for(kind);

    nlohmann::json body;
    body["kind"] = kind;
    body["model"] = model_id;
    body["payload"] = nlohmann::json::parse(payload_json);
    const std::string body_str = body.dump();

    httplib::Headers headers;
    if (const char* token = std::getenv(config_.token_env.c_str());
        token != nullptr && token[0] != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    std::string last_error;
    int backoff_ms = config_.backoff_initial_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.connect_timeout_s, 0);
        client.set_read_timeout(config_.read_timeout_s, 0);

        ++network_calls_;
        auto result = client.Post(path, headers, body_str, "application/json");
        if (result) {
            if (result->status >= 200 && result->status < 300) return result->body;
            // A definitive backend answer: do not retry.
            throw BackendRejected("http backend: " + path + " returned status " +
                                  std::to_string(result->status));
        }
        last_error = httplib::to_string(result.error());
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
    }
    throw BackendUnavailable("http backend: " + path + " unreachable after " +
                             std::to_string(config_.max_attempts) + " attempts (" + last_error +
                             ")");
}

}  // namespace archilens
