#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mcfr {

// Transport-level failure: unreachable endpoint, timeout, non-2xx status or
// a response body without a completion.
class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sends one chat-completion request and returns the completion text.
class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    // `request` is an OpenAI-style chat body: {"model", "messages", ...}.
    virtual std::string complete(const nlohmann::json& request) = 0;
};

struct HttpEndpoint {
    std::string url; // full URL of the chat-completions route
    std::string api_key;
    std::chrono::milliseconds timeout{ 60'000 };
};

// POSTs the request as JSON and reads choices[0].message.content.
class HttpLlmTransport final : public LlmTransport {
public:
    explicit HttpLlmTransport(HttpEndpoint endpoint);
    std::string complete(const nlohmann::json& request) override;

private:
    HttpEndpoint endpoint_;
};

// The query is the last non-empty line of a completion, with Markdown code
// fences and surrounding backticks removed.
[[nodiscard]] std::string extract_query_line(std::string_view completion);

} // namespace mcfr
