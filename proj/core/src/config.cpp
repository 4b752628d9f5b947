#include "archilens/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

#include "archilens/errors.hpp"

namespace archilens {

namespace {

using nlohmann::json;

void require_known_keys(const json& obj, const std::set<std::string>& allowed,
                        const std::string& context) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            throw MalformedConfig("unknown key \"" + key + "\" in " + context);
        }
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw MalformedConfig(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

void parse_mock(const json& obj, MockConfig& mock) {
    require_known_keys(obj,
                       {"seed", "dims", "embedding_scale", "noise_sigma", "vqa_threshold",
                        "group_axes", "noise_axes", "image_groups", "planted_texts", "proposals"},
                       "backend.mock");
    read_into(obj, "seed", mock.seed);
    read_into(obj, "dims", mock.dims);
    read_into(obj, "embedding_scale", mock.embedding_scale);
    read_into(obj, "noise_sigma", mock.noise_sigma);
    read_into(obj, "vqa_threshold", mock.vqa_threshold);
    read_into(obj, "group_axes", mock.group_axes);
    read_into(obj, "noise_axes", mock.noise_axes);
    read_into(obj, "image_groups", mock.image_groups);
    read_into(obj, "planted_texts", mock.planted_texts);
    read_into(obj, "proposals", mock.proposals);
}

void parse_http(const json& obj, HttpConfig& http) {
    require_known_keys(obj,
                       {"base_url", "embedding_dims", "connect_timeout_s", "read_timeout_s",
                        "max_attempts", "backoff_initial_ms", "token_env"},
                       "backend.http");
    read_into(obj, "base_url", http.base_url);
    read_into(obj, "embedding_dims", http.embedding_dims);
    read_into(obj, "connect_timeout_s", http.connect_timeout_s);
    read_into(obj, "read_timeout_s", http.read_timeout_s);
    read_into(obj, "max_attempts", http.max_attempts);
    read_into(obj, "backoff_initial_ms", http.backoff_initial_ms);
    read_into(obj, "token_env", http.token_env);
}

json mock_to_json(const MockConfig& mock) {
    json obj;
    obj["seed"] = mock.seed;
    obj["dims"] = mock.dims;
    obj["embedding_scale"] = mock.embedding_scale;
    obj["noise_sigma"] = mock.noise_sigma;
    obj["vqa_threshold"] = mock.vqa_threshold;
    obj["group_axes"] = mock.group_axes;
    obj["noise_axes"] = mock.noise_axes;
    obj["image_groups"] = mock.image_groups;
    obj["planted_texts"] = mock.planted_texts;
    obj["proposals"] = mock.proposals;
    return obj;
}

json http_to_json(const HttpConfig& http) {
    json obj;
    obj["base_url"] = http.base_url;
    obj["embedding_dims"] = http.embedding_dims;
    obj["connect_timeout_s"] = http.connect_timeout_s;
    obj["read_timeout_s"] = http.read_timeout_s;
    obj["max_attempts"] = http.max_attempts;
    obj["backoff_initial_ms"] = http.backoff_initial_ms;
    obj["token_env"] = http.token_env;
    return obj;
}

json config_to_json(const RunConfig& config) {
    json obj;
    obj["manifest_path"] = config.manifest_path;
    json backend;
    backend["kind"] = config.backend_kind;
    backend["mock"] = mock_to_json(config.mock);
    backend["http"] = http_to_json(config.http);
    obj["backend"] = backend;
    json models;
    models["embed"] = config.models.embed;
    models["caption"] = config.models.caption;
    models["propose"] = config.models.propose;
    models["vqa"] = config.models.vqa;
    obj["models"] = models;
    obj["strategy"] = config.strategy;
    obj["matcher"] = config.matcher;
    obj["pair_mode"] = config.pair_mode;
    obj["n_per_group"] = config.n_per_group;
    obj["k_candidates"] = config.k_candidates;
    obj["grid_per_group"] = config.grid_per_group;
    obj["alpha"] = config.alpha;
    obj["master_seed"] = config.master_seed;
    obj["max_inflight"] = config.max_inflight;
    obj["failure_budget"] = config.failure_budget;
    json ttest;
    ttest["variance"] = config.ttest_variance;
    ttest["tails"] = config.ttest_tails;
    obj["ttest"] = ttest;
    obj["significance_attribution"] = config.significance_attribution;
    obj["similarity_source"] = config.similarity_source;
    obj["cache_dir"] = config.cache_dir;
    obj["runs_dir"] = config.runs_dir;
    obj["stopwords_path"] = config.stopwords_path;
    json prompts;
    prompts["text_based"] = config.extractor.text_based_prompt;
    prompts["image_grid"] = config.extractor.image_grid_prompt;
    prompts["embedding_diff"] = config.extractor.embedding_diff_prompt;
    prompts["vqa"] = config.gateway.vqa_prompt;
    prompts["caption_qa"] = config.gateway.caption_qa_prompt;
    obj["prompts"] = prompts;
    return obj;
}

void validate(const RunConfig& config) {
    if (config.manifest_path.empty()) throw MalformedConfig("manifest_path is required");
    if (config.backend_kind != "mock" && config.backend_kind != "http") {
        throw MalformedConfig("backend.kind must be \"mock\" or \"http\", got \"" +
                              config.backend_kind + "\"");
    }
    if (config.backend_kind == "http" && config.http.base_url.empty()) {
        throw MalformedConfig("backend.http.base_url is required for the http backend");
    }
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw MalformedConfig("alpha must be in (0,1)");
    }
    if (config.n_per_group < 2) {
        throw MalformedConfig("n_per_group must be >= 2 (t-tests need two values per side)");
    }
    if (config.k_candidates < 1) throw MalformedConfig("k_candidates must be >= 1");
    if (config.grid_per_group < 1) throw MalformedConfig("grid_per_group must be >= 1");
    if (config.max_inflight < 1) throw MalformedConfig("max_inflight must be >= 1");
    if (!(config.failure_budget >= 0.0 && config.failure_budget < 1.0)) {
        throw MalformedConfig("failure_budget must be in [0,1)");
    }
    if (config.ttest_variance != "welch" && config.ttest_variance != "pooled") {
        throw MalformedConfig("ttest.variance must be \"welch\" or \"pooled\"");
    }
    if (config.ttest_tails != "two" && config.ttest_tails != "one") {
        throw MalformedConfig("ttest.tails must be \"two\" or \"one\"");
    }
    if (config.significance_attribution != "group_a" &&
        config.significance_attribution != "both") {
        throw MalformedConfig("significance_attribution must be \"group_a\" or \"both\"");
    }
    if (config.similarity_source != "descriptions" && config.similarity_source != "images") {
        throw MalformedConfig("similarity_source must be \"descriptions\" or \"images\"");
    }
    // These throw DomainError with a clear message on bad values.
    try {
        pair_mode_from_string(config.pair_mode);
        matcher_from_string(config.matcher);
        if (config.strategy != "text-based" && config.strategy != "image-grid" &&
            config.strategy != "embedding-diff") {
            throw DomainError("unknown extraction strategy: " + config.strategy);
        }
    } catch (const DomainError& e) {
        throw MalformedConfig(e.what());
    }
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& relative) const {
    const std::filesystem::path p(relative);
    if (p.is_absolute()) return p;
    return workspace / p;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedConfig("cannot open config: " + path.string());
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw MalformedConfig("config is not a JSON object: " + path.string());
    }

    require_known_keys(obj,
                       {"workspace", "manifest_path", "backend", "models", "strategy", "matcher",
                        "pair_mode", "n_per_group", "k_candidates", "grid_per_group", "alpha",
                        "master_seed", "max_inflight", "failure_budget", "ttest",
                        "significance_attribution", "similarity_source", "cache_dir", "runs_dir",
                        "stopwords_path", "prompts"},
                       "config");

    RunConfig config;
    config.workspace = std::filesystem::absolute(path).parent_path();
    if (obj.contains("workspace")) {
        const std::filesystem::path declared(obj.at("workspace").get<std::string>());
        config.workspace =
            declared.is_absolute() ? declared : config.workspace / declared;
    }

    read_into(obj, "manifest_path", config.manifest_path);
    if (obj.contains("backend")) {
        const json& backend = obj["backend"];
        require_known_keys(backend, {"kind", "mock", "http"}, "backend");
        read_into(backend, "kind", config.backend_kind);
        if (backend.contains("mock")) parse_mock(backend["mock"], config.mock);
        if (backend.contains("http")) parse_http(backend["http"], config.http);
    }
    if (obj.contains("models")) {
        const json& models = obj["models"];
        require_known_keys(models, {"embed", "caption", "propose", "vqa"}, "models");
        read_into(models, "embed", config.models.embed);
        read_into(models, "caption", config.models.caption);
        read_into(models, "propose", config.models.propose);
        read_into(models, "vqa", config.models.vqa);
    }
    read_into(obj, "strategy", config.strategy);
    read_into(obj, "matcher", config.matcher);
    read_into(obj, "pair_mode", config.pair_mode);
    read_into(obj, "n_per_group", config.n_per_group);
    read_into(obj, "k_candidates", config.k_candidates);
    read_into(obj, "grid_per_group", config.grid_per_group);
    read_into(obj, "alpha", config.alpha);
    read_into(obj, "master_seed", config.master_seed);
    read_into(obj, "max_inflight", config.max_inflight);
    read_into(obj, "failure_budget", config.failure_budget);
    if (obj.contains("ttest")) {
        const json& ttest = obj["ttest"];
        require_known_keys(ttest, {"variance", "tails"}, "ttest");
        read_into(ttest, "variance", config.ttest_variance);
        read_into(ttest, "tails", config.ttest_tails);
    }
    read_into(obj, "significance_attribution", config.significance_attribution);
    read_into(obj, "similarity_source", config.similarity_source);
    read_into(obj, "cache_dir", config.cache_dir);
    read_into(obj, "runs_dir", config.runs_dir);
    read_into(obj, "stopwords_path", config.stopwords_path);
    if (obj.contains("prompts")) {
        const json& prompts = obj["prompts"];
        require_known_keys(prompts,
                           {"text_based", "image_grid", "embedding_diff", "vqa", "caption_qa"},
                           "prompts");
        read_into(prompts, "text_based", config.extractor.text_based_prompt);
        read_into(prompts, "image_grid", config.extractor.image_grid_prompt);
        read_into(prompts, "embedding_diff", config.extractor.embedding_diff_prompt);
        read_into(prompts, "vqa", config.gateway.vqa_prompt);
        read_into(prompts, "caption_qa", config.gateway.caption_qa_prompt);
    }

    config.extractor.grid_per_group = config.grid_per_group;
    config.extractor.max_inflight = config.max_inflight;
    config.gateway.models = config.models;

    validate(config);
    return config;
}

std::string config_snapshot_json(const RunConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw MalformedConfig("cannot write config: " + path.string());
    out << config_snapshot_json(config);
}

std::shared_ptr<Backend> make_backend(const RunConfig& config) {
    if (config.backend_kind == "http") return std::make_shared<HttpBackend>(config.http);
    return std::make_shared<MockBackend>(config.mock);
}

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
    std::filesystem::path cache_root;
    if (!config.cache_dir.empty()) cache_root = config.resolve(config.cache_dir);
    return std::make_unique<Gateway>(make_backend(config), cache_root, config.gateway);
}

stats::TTestOptions ttest_options(const RunConfig& config) {
    stats::TTestOptions options;
    options.alpha = config.alpha;
    options.variance = config.ttest_variance == "pooled" ? stats::Variance::Pooled
                                                         : stats::Variance::Welch;
    options.tails = config.ttest_tails == "one" ? stats::Tails::One : stats::Tails::Two;
    return options;
}

EvaluatorOptions evaluator_options(const RunConfig& config) {
    EvaluatorOptions options;
    options.matcher = matcher_from_string(config.matcher);
    options.ttest = ttest_options(config);
    options.failure_budget = config.failure_budget;
    options.max_inflight = config.max_inflight;
    return options;
}

}  // namespace archilens
