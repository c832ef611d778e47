#pragma once

#include "mcfr/binder.hpp"
#include "mcfr/checker.hpp"
#include "mcfr/dataset.hpp"
#include "mcfr/edu_model.hpp"
#include "mcfr/llm_client.hpp"
#include "mcfr/query.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcfr {

// What a translator needs to know about a model: names, types, ranges and
// the query grammar. Derived deterministically from the model.
struct ModelSignature {
    struct ProcessInfo {
        std::string name;
        std::vector<std::string> locations;
    };
    struct VariableInfo {
        std::string name;
        Type type = Type::integer;
        std::int64_t lower = 0;
        std::int64_t upper = 0;
    };

    std::string model_name;
    std::vector<ProcessInfo> processes;
    std::vector<VariableInfo> variables;
    std::string grammar;

    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] ModelSignature signature_of(const Model& model);

enum class Strategy { template_rules, spec_passthrough, llm };

[[nodiscard]] std::string_view strategy_name(Strategy s); // "template", "spec", "llm"
[[nodiscard]] std::optional<Strategy> parse_strategy(std::string_view text);

using Environment = std::map<std::string, std::string, std::less<>>;

struct TranslatorConfig {
    Strategy strategy = Strategy::template_rules;
    // llm only
    std::string endpoint;
    std::string model_name;
    std::string api_key_env = "MCFR_LLM_API_KEY";
    std::string api_key; // value of api_key_env, resolved by from_environment
    unsigned max_retries = 3;
    std::chrono::milliseconds timeout{ 60'000 };
    std::string transcript_path; // JSON lines, one per endpoint call
    // Dataset spellings accepted when binding translated queries.
    AliasMap aliases;

    // Reads MCFR_LLM_ENDPOINT, MCFR_LLM_MODEL and the api key variable.
    [[nodiscard]] static TranslatorConfig from_environment(Strategy strategy, const Environment& env);
    // Endpoint and model name are required iff the strategy is llm.
    [[nodiscard]] std::vector<Diagnostic> validate() const;
};

// A regex over the normalized question and a query skeleton whose `{N}`
// slots take capture group N. Number words in captures become digits.
struct TemplateRule {
    std::string pattern;
    std::string query;
    std::regex regex;
};

[[nodiscard]] Result<std::vector<TemplateRule>> parse_templates(const nlohmann::json& doc);
[[nodiscard]] Result<std::vector<TemplateRule>> load_templates(const std::string& path);

// Folds typographic quotes, dashes and comparison signs to ASCII and
// collapses whitespace. Case is kept; rule patterns match case-insensitively.
[[nodiscard]] std::string normalize_question(std::string_view question);

// First matching rule's filled query text and its index.
[[nodiscard]] std::optional<std::pair<std::size_t, std::string>>
apply_templates(const std::vector<TemplateRule>& rules, std::string_view question);

enum class FailureKind { no_rule, missing_spec, invalid_query, network, config };

[[nodiscard]] std::string_view failure_kind_name(FailureKind k);

struct TranslationFailure {
    FailureKind kind = FailureKind::no_rule;
    std::string message;
    std::vector<Diagnostic> diagnostics; // from the last rejected attempt
};

struct Translation {
    std::optional<BoundQuery> query;
    std::optional<TranslationFailure> failure;
    std::string source;          // "template rule 3", "formal_spec", "llm attempt 2"
    unsigned endpoint_calls = 0; // llm only

    [[nodiscard]] bool ok() const { return query.has_value(); }
};

// The chat body for the first llm attempt.
[[nodiscard]] nlohmann::json build_llm_request(std::string_view question, const ModelSignature& sig,
                                               const std::vector<std::string>& context,
                                               const std::vector<QAItem>& examples, const std::string& model_name);

class Translator {
public:
    // `transport` is only used by the llm strategy; when null an HTTP
    // transport is built from the config. `examples` are few-shot pairs for
    // the llm prompt.
    explicit Translator(TranslatorConfig config, std::vector<TemplateRule> rules = {},
                        std::shared_ptr<LlmTransport> transport = nullptr, std::vector<QAItem> examples = {});

    [[nodiscard]] const TranslatorConfig& config() const { return config_; }

    // `item` supplies formal_spec for the spec strategy.
    [[nodiscard]] Translation translate(std::string_view question, const Model& model,
                                        const std::vector<std::string>& context, const QAItem* item = nullptr) const;

private:
    Translation translate_llm(std::string_view question, const Model& model,
                              const std::vector<std::string>& context) const;
    void log_exchange(const nlohmann::json& record) const;

    TranslatorConfig config_;
    std::vector<TemplateRule> rules_;
    std::shared_ptr<LlmTransport> transport_;
    std::vector<QAItem> examples_;
    std::shared_ptr<std::mutex> transcript_mutex_;
};

// Facts sharing at least one whole-word content token with the question,
// most shared tokens first, ties in fact order.
[[nodiscard]] std::vector<std::string> retrieve_context(std::string_view question, const FactBase& facts);

struct QAAnswer {
    Answer verdict = Answer::uncertain;
    std::string query_used; // empty when translation failed
    std::string answer_text;
    std::optional<std::string> trace_text;
    std::vector<std::string> context;
    std::string reason;
    std::optional<FailureKind> failure;
    std::string translation_source;
    unsigned endpoint_calls = 0;
    std::optional<Verdict> check_result;
};

// Retrieve context, translate, check, render. Never throws for bad input;
// every failure becomes an Uncertain answer with a reason.
[[nodiscard]] QAAnswer ask(std::string_view question, const Model& model, const FactBase& facts,
                           const Translator& translator, const ExploreLimits& limits = {},
                           const QAItem* item = nullptr);

// `Yes. Query: E<> (...).` followed by a second line holding the trace
// (`Trace: ...` / `Counterexample: ...`) or the reason.
[[nodiscard]] std::string render_answer(Answer verdict, std::string_view query,
                                        const std::optional<std::string>& trace, std::string_view reason,
                                        std::string_view trace_heading = "Trace");

// Why an `E<>` predicate is unreachable, phrased over the guards of the
// transitions that could establish it.
[[nodiscard]] std::string explain_unreachable(const Model& model, const Expr& predicate);

} // namespace mcfr
