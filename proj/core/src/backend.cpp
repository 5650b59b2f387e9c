#include "icsel/backend.hpp"

#include "icsel/corpus.hpp"
#include "icsel/errors.hpp"
#include "icsel/prompting.hpp"

namespace icsel {

namespace {

void check_request(const GenerationRequest& request) {
    if (request.prompt.empty()) throw ContractError("generation prompt is empty");
    if (request.max_new_tokens < 1) throw ContractError("max_new_tokens must be at least 1");
}

}  // namespace

std::string clean_completion(std::string completion, const std::string& prompt,
                             const std::string& stop_sequence) {
    if (!prompt.empty() && completion.size() >= prompt.size() &&
        completion.compare(0, prompt.size(), prompt) == 0) {
        completion.erase(0, prompt.size());
        // A separator right after the echoed prompt belongs to the echo.
        if (!completion.empty() && completion.front() == ' ') completion.erase(0, 1);
    }
    if (!stop_sequence.empty()) {
        auto cut = completion.find(stop_sequence);
        if (cut != std::string::npos) completion.resize(cut);
    }
    return completion;
}

GenerationResponse EchoBackend::generate(const GenerationRequest& request) {
    check_request(request);
    auto parsed = parse_prompt(request.prompt);
    return GenerationResponse{parsed.test_source, id(), std::chrono::milliseconds(0)};
}

GenerationResponse CopyTargetBackend::generate(const GenerationRequest& request) {
    check_request(request);
    auto parsed = parse_prompt(request.prompt);
    if (parsed.examples.empty()) {
        throw ContractError("copy-target mock needs at least one example in the prompt");
    }
    return GenerationResponse{parsed.examples.front().second, id(),
                              std::chrono::milliseconds(0)};
}

GenerationResponse LexiconBackend::generate(const GenerationRequest& request) {
    check_request(request);
    auto parsed = parse_prompt(request.prompt);
    std::string out;
    for (const auto& word : tokenize(parsed.test_source)) {
        if (!out.empty()) out.push_back(' ');
        auto it = lexicon_.find(word);
        out.append(it == lexicon_.end() ? word : it->second);
    }
    return GenerationResponse{out, id(), std::chrono::milliseconds(0)};
}

}  // namespace icsel
