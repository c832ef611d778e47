#pragma once

#include "mcfr/checker.hpp"
#include "mcfr/llm_client.hpp"
#include "mcfr/model_dsl.hpp"
#include "mcfr/query.hpp"

#include <doctest.h>

#include <atomic>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcfr::test {

inline std::string diagnostics_text(const std::vector<Diagnostic>& diags)
{
    std::string out;
    for (const auto& d : diags)
        out += format_diagnostic(d, "input") + '\n';
    return out;
}

inline Model must_parse(std::string_view text)
{
    auto m = parse_model(text);
    INFO(diagnostics_text(m.diagnostics()));
    REQUIRE(m.ok());
    return std::move(m).value();
}

inline BoundQuery must_query(std::string_view text, const Model& model, const AliasMap& aliases = {})
{
    auto q = compile_query(text, model, aliases);
    INFO(text, "\n", diagnostics_text(q.diagnostics()));
    REQUIRE(q.ok());
    return std::move(q).value();
}

inline Verdict run(const Model& model, std::string_view query, const ExploreLimits& limits = {})
{
    return check(model, must_query(query, model), limits);
}

// Replies with the scripted completions in order, then repeats the last.
class ScriptedTransport : public LlmTransport {
public:
    explicit ScriptedTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string complete(const nlohmann::json& request) override
    {
        std::lock_guard lock(mutex_);
        requests.push_back(request);
        const auto i = std::min(requests.size(), replies_.size()) - 1;
        return replies_[i];
    }

    std::vector<nlohmann::json> requests;

private:
    std::vector<std::string> replies_;
    std::mutex mutex_;
};

// Counts calls and fails them, standing in for a network that must not be used.
class PoisonTransport : public LlmTransport {
public:
    std::string complete(const nlohmann::json&) override
    {
        ++calls;
        throw NetworkError("network access is disabled in this test");
    }

    std::atomic<int> calls{ 0 };
};

inline constexpr std::string_view counter_model = R"(model counter

var int[0,5] x = 0;
var bool done = false;

process P {
    init A;
    loc A, B, C;
    trans A -> A { guard x < 5; update x = x + 1; label "inc"; }
    trans A -> B { guard x >= 3; label "leave"; }
    trans B -> C { update done = true; }
    trans C -> C;
}
)";

} // namespace mcfr::test
