#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "archilens/gateway.hpp"

namespace archilens {

struct HttpConfig {
    std::string base_url;  // e.g. "http://models.internal:8080"
    std::size_t embedding_dims = 768;
    int connect_timeout_s = 10;
    int read_timeout_s = 120;
    int max_attempts = 3;        // total tries per request
    int backoff_initial_ms = 250;  // doubles per retry
    // Bearer token is read from this environment variable when present.
    std::string token_env = "ARCHILENS_API_TOKEN";
};

/// JSON-over-HTTP adapter. One request shape for every kind:
///   POST {base_url}/v1/{embed|caption|propose|vqa}
///   body: {"kind": ..., "model": ..., "payload": {...}}
/// embed_text and embed_image both post to /v1/embed (the kind field
/// distinguishes them). Transport failures are retried with exponential
/// backoff, at most max_attempts tries; non-2xx responses are terminal.
class HttpBackend : public Backend {
  public:
    explicit HttpBackend(HttpConfig config);

    std::string id() const override { return "http-" + config_.base_url; }
    std::size_t embedding_dims() const override { return config_.embedding_dims; }
    std::string invoke(const std::string& kind, const std::string& model_id,
                       const std::string& payload_json) override;
    std::uint64_t network_calls() const override { return network_calls_.load(); }

  private:
    HttpConfig config_;
    std::atomic<std::uint64_t> network_calls_{0};
};

}  // namespace archilens
