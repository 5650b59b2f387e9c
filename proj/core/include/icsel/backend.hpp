#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <unordered_map>

namespace icsel {

struct GenerationRequest {
    std::string prompt;
    int max_new_tokens = 256;
    std::string stop_sequence = "\n";
};

struct GenerationResponse {
    std::string completion;  // never includes the prompt text
    std::string backend_id;
    std::chrono::milliseconds latency{0};
};

// Text-generation interface. Implementations decide how a completion is
// produced; mock implementations must be pure functions of the request.
// generate() may be called concurrently from several threads.
class Backend {
public:
    virtual ~Backend() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) = 0;
    virtual std::string id() const = 0;
};

// Returns the test source from the prompt's trailing stub line.
class EchoBackend : public Backend {
public:
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return "mock-echo"; }
};

// Returns the target of the first example pair in the prompt. Useful for
// closed-loop tests where the wanted translation is planted in the prompt.
class CopyTargetBackend : public Backend {
public:
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return "mock-copy-target"; }
};

// Word-by-word mapping of the test source through a fixed dictionary.
// Unknown words pass through unchanged.
class LexiconBackend : public Backend {
public:
    explicit LexiconBackend(std::unordered_map<std::string, std::string> lexicon)
        : lexicon_(std::move(lexicon)) {}
    GenerationResponse generate(const GenerationRequest& request) override;
    std::string id() const override { return "mock-lexicon"; }

private:
    std::unordered_map<std::string, std::string> lexicon_;
};

struct HttpBackendConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:8080/generate"
    int timeout_seconds = 120;
};

// POSTs {prompt, max_new_tokens, stop} to the endpoint and reads {text}
// back. The stop sequence is applied client-side as well, and an echoed
// prompt prefix is stripped. Non-success statuses raise RemoteError.
std::unique_ptr<Backend> make_http_backend(const HttpBackendConfig& config);

// Shared by mocks and callers: trims the completion at the stop sequence and
// removes a leading copy of the prompt if the backend echoed it.
std::string clean_completion(std::string completion, const std::string& prompt,
                             const std::string& stop_sequence);

}  // namespace icsel
