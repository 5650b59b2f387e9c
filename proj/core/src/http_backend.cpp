#include <chrono>

#include "icsel/backend.hpp"
#include "icsel/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace icsel {

namespace {

struct ParsedEndpoint {
    std::string host_and_port;  // scheme://host[:port]
    std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw ContractError("endpoint must include a scheme: " + endpoint);
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return ParsedEndpoint{endpoint, "/"};
    }
    return ParsedEndpoint{endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config)
        : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint)) {
        if (config_.timeout_seconds < 1) {
            throw ContractError("backend timeout must be at least one second");
        }
    }

    GenerationResponse generate(const GenerationRequest& request) override {
        if (request.prompt.empty()) throw ContractError("generation prompt is empty");
        if (request.max_new_tokens < 1) throw ContractError("max_new_tokens must be at least 1");

        nlohmann::json payload{{"prompt", request.prompt},
                               {"max_new_tokens", request.max_new_tokens},
                               {"stop", request.stop_sequence}};

        auto start = std::chrono::steady_clock::now();
        // One client per call keeps generate() safe to run from many threads.
        httplib::Client client(endpoint_.host_and_port);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);

        auto result = client.Post(endpoint_.path, payload.dump(), "application/json");
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);

        if (!result) {
            throw RemoteError("request to " + config_.endpoint + " failed: " +
                                  httplib::to_string(result.error()),
                              0);
        }
        if (result->status < 200 || result->status >= 300) {
            throw RemoteError("endpoint " + config_.endpoint + " returned status " +
                                  std::to_string(result->status) + ": " +
                                  body_excerpt(result->body),
                              result->status);
        }

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            throw RemoteError("endpoint " + config_.endpoint +
                                  " returned malformed payload: " + e.what(),
                              result->status);
        }
        if (!parsed.contains("text") || !parsed.at("text").is_string()) {
            throw RemoteError("endpoint " + config_.endpoint + " response lacks a text field",
                              result->status);
        }

        std::string completion = clean_completion(parsed.at("text").get<std::string>(),
                                                  request.prompt, request.stop_sequence);
        return GenerationResponse{std::move(completion), id(), latency};
    }

    std::string id() const override { return "http:" + config_.endpoint; }

private:
    HttpBackendConfig config_;
    ParsedEndpoint endpoint_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& config) {
    return std::make_unique<HttpBackend>(config);
}

}  // namespace icsel
