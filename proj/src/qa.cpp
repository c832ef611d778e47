#include "mcfr/qa.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace mcfr {

using nlohmann::json;

namespace {

constexpr std::string_view query_grammar = R"(query     := quantifier predicate
quantifier:= "E<>" (exists a path that eventually reaches)
           | "A[]" (on all paths, always)
           | "E[]" (exists a path that always)
           | "A<>" (on all paths, eventually)
predicate := boolean expression, no nested quantifiers
atoms     := variable names, integer literals, true, false, Process.Location
operators := ! && || imply == != < <= > >= + - * and parentheses)";

std::string ascii_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<int> number_word(std::string_view w)
{
    static constexpr std::string_view words[] = { "zero",    "one",     "two",       "three",    "four",
                                                  "five",    "six",     "seven",     "eight",    "nine",
                                                  "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                                                  "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
                                                  "twenty" };
    const auto l = ascii_lower(w);
    for (std::size_t i = 0; i < std::size(words); ++i)
        if (words[i] == l)
            return static_cast<int>(i);
    return std::nullopt;
}

std::vector<std::string> content_tokens(std::string_view text)
{
    static const std::set<std::string, std::less<>> stop = {
        "a",    "an",   "the",  "is",   "it",   "its",   "to",    "for",  "of",   "in",   "on",   "at",
        "can",  "could", "i",   "if",   "be",   "been",  "by",    "and",  "or",   "not",  "no",   "yes",
        "do",   "does", "did",  "has",  "have", "had",   "haven", "t",    "s",    "that", "this", "they",
        "them", "their", "yet", "with", "without", "within", "any", "all", "are", "was", "were", "will",
        "would", "what", "when", "who", "how", "there", "then", "than", "as", "so", "my", "me", "student",
    };
    std::vector<std::string> out;
    std::string cur;
    const auto flush = [&] {
        if (!cur.empty() && !stop.contains(cur))
            out.push_back(cur);
        cur.clear();
    };
    for (const unsigned char c : text) {
        if (std::isalnum(c))
            cur.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    return out;
}

void collect_reads(const Expr& e, std::set<std::size_t>& vars, std::set<std::pair<std::size_t, std::int32_t>>* locs)
{
    if (e.op == Op::var_ref)
        vars.insert(static_cast<std::size_t>(e.value));
    else if (e.op == Op::loc_atom && locs)
        locs->emplace(static_cast<std::size_t>(e.value), e.location);
    for (const auto& a : e.args)
        collect_reads(a, vars, locs);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// signature

std::string ModelSignature::to_text() const
{
    std::ostringstream out;
    out << "model " << model_name << '\n';
    for (const auto& p : processes)
        out << "process " << p.name << " locations: " << join(p.locations, ", ") << '\n';
    for (const auto& v : variables) {
        out << "var " << v.name << ": ";
        if (v.type == Type::boolean)
            out << "bool\n";
        else
            out << "int[" << v.lower << ',' << v.upper << "]\n";
    }
    out << "location atoms are written Process.Location, e.g. "
        << (processes.empty() || processes[0].locations.empty()
                ? std::string("P.L")
                : processes[0].name + '.' + processes[0].locations.back())
        << '\n';
    out << grammar << '\n';
    return out.str();
}

json ModelSignature::to_json() const
{
    json procs = json::array();
    for (const auto& p : processes)
        procs.push_back({ { "name", p.name }, { "locations", p.locations } });
    json vars = json::array();
    for (const auto& v : variables) {
        json rec{ { "name", v.name }, { "type", type_name(v.type) } };
        if (v.type == Type::integer) {
            rec["lower"] = v.lower;
            rec["upper"] = v.upper;
        }
        vars.push_back(std::move(rec));
    }
    return json{ { "model", model_name }, { "processes", procs }, { "variables", vars }, { "grammar", grammar } };
}

ModelSignature signature_of(const Model& model)
{
    ModelSignature sig;
    sig.model_name = model.name;
    for (const auto& p : model.processes)
        sig.processes.push_back({ p.name, p.locations });
    for (const auto& v : model.vars)
        sig.variables.push_back({ v.name, v.type, v.lower, v.upper });
    sig.grammar = std::string(query_grammar);
    return sig;
}

// ---------------------------------------------------------------------------
// configuration

std::string_view strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::template_rules:
        return "template";
    case Strategy::spec_passthrough:
        return "spec";
    case Strategy::llm:
        return "llm";
    }
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view text)
{
    if (text == "template")
        return Strategy::template_rules;
    if (text == "spec" || text == "spec-passthrough")
        return Strategy::spec_passthrough;
    if (text == "llm")
        return Strategy::llm;
    return std::nullopt;
}

TranslatorConfig TranslatorConfig::from_environment(Strategy strategy, const Environment& env)
{
    TranslatorConfig cfg;
    cfg.strategy = strategy;
    if (const auto it = env.find("MCFR_LLM_ENDPOINT"); it != env.end())
        cfg.endpoint = it->second;
    if (const auto it = env.find("MCFR_LLM_MODEL"); it != env.end())
        cfg.model_name = it->second;
    if (const auto it = env.find(cfg.api_key_env); it != env.end())
        cfg.api_key = it->second;
    return cfg;
}

std::vector<Diagnostic> TranslatorConfig::validate() const
{
    std::vector<Diagnostic> diags;
    if (strategy != Strategy::llm)
        return diags;
    if (endpoint.empty())
        diags.push_back(make_error(codes::missing_field, "llm translator needs an endpoint (MCFR_LLM_ENDPOINT)"));
    if (model_name.empty())
        diags.push_back(make_error(codes::missing_field, "llm translator needs a model name (MCFR_LLM_MODEL)"));
    return diags;
}

// ---------------------------------------------------------------------------
// templates

Result<std::vector<TemplateRule>> parse_templates(const json& doc)
{
    if (!doc.is_array())
        return std::vector<Diagnostic>{ make_error(codes::syntax, "template file must be a JSON array") };
    std::vector<TemplateRule> rules;
    std::vector<Diagnostic> diags;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        const auto where = "rule " + std::to_string(i + 1) + ": ";
        if (!rec.is_object() || !rec.contains("pattern") || !rec.contains("query") || !rec["pattern"].is_string()
            || !rec["query"].is_string()) {
            diags.push_back(make_error(codes::missing_field, where + "needs string fields 'pattern' and 'query'"));
            continue;
        }
        TemplateRule r;
        r.pattern = rec["pattern"].get<std::string>();
        r.query = rec["query"].get<std::string>();
        try {
            r.regex = std::regex(r.pattern, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            diags.push_back(make_error(codes::syntax, where + "bad pattern: " + e.what()));
            continue;
        }
        rules.push_back(std::move(r));
    }
    if (!diags.empty())
        return diags;
    return rules;
}

Result<std::vector<TemplateRule>> load_templates(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::vector<Diagnostic>{ make_error(codes::io, "cannot open '" + path + "'") };
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_templates(json::parse(buf.str()));
    } catch (const json::parse_error& e) {
        return std::vector<Diagnostic>{ make_error(codes::syntax, "'" + path + "' is not valid JSON: " + e.what()) };
    }
}

std::string normalize_question(std::string_view q)
{
    static constexpr std::pair<std::string_view, std::string_view> folds[] = {
        { "‘", "'" }, { "’", "'" },  { "“", "\"" }, { "”", "\"" }, { "‐", "-" },
        { "‑", "-" }, { "‒", "-" },  { "–", "-" },  { "—", "-" },  { "−", "-" },
        { " ", " " }, { "≤", "<=" }, { "≥", ">=" },
    };
    std::string out;
    out.reserve(q.size());
    bool space = false;
    for (std::size_t i = 0; i < q.size();) {
        std::string_view piece = q.substr(i, 1);
        std::size_t len = 1;
        for (const auto& [from, to] : folds) {
            if (q.substr(i).starts_with(from)) {
                piece = to;
                len = from.size();
                break;
            }
        }
        i += len;
        if (piece == " " || piece == "\t" || piece == "\n" || piece == "\r") {
            space = !out.empty();
            continue;
        }
        if (space)
            out += ' ';
        space = false;
        out += piece;
    }
    return out;
}

std::optional<std::pair<std::size_t, std::string>> apply_templates(const std::vector<TemplateRule>& rules,
                                                                   std::string_view question)
{
    const auto text = normalize_question(question);
    for (std::size_t i = 0; i < rules.size(); ++i) {
        std::smatch m;
        if (!std::regex_search(text, m, rules[i].regex))
            continue;
        std::string out;
        const auto& skel = rules[i].query;
        for (std::size_t k = 0; k < skel.size(); ++k) {
            if (skel[k] == '{') {
                const auto close = skel.find('}', k);
                if (close != std::string::npos && close > k + 1
                    && std::all_of(skel.begin() + static_cast<std::ptrdiff_t>(k + 1),
                                   skel.begin() + static_cast<std::ptrdiff_t>(close),
                                   [](unsigned char c) { return std::isdigit(c); })) {
                    const auto group = std::stoul(skel.substr(k + 1, close - k - 1));
                    if (group < m.size()) {
                        const auto captured = m[group].str();
                        const auto n = number_word(captured);
                        out += n ? std::to_string(*n) : captured;
                    }
                    k = close;
                    continue;
                }
            }
            out += skel[k];
        }
        return std::pair{ i, out };
    }
    return std::nullopt;
}

std::string_view failure_kind_name(FailureKind k)
{
    switch (k) {
    case FailureKind::no_rule:
        return "no-rule";
    case FailureKind::missing_spec:
        return "missing-spec";
    case FailureKind::invalid_query:
        return "invalid-query";
    case FailureKind::network:
        return "network";
    case FailureKind::config:
        return "config";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// translator

json build_llm_request(std::string_view question, const ModelSignature& sig, const std::vector<std::string>& context,
                       const std::vector<QAItem>& examples, const std::string& model_name)
{
    std::string system = "Translate the user's question about the model below into exactly one query. "
                         "Use only the names listed. Put the query alone on the final line of the reply.\n\n";
    system += sig.to_text();

    std::string user;
    if (!examples.empty()) {
        user += "Examples:\n";
        for (const auto& ex : examples)
            user += "Q: " + ex.question + "\nA: " + ex.formal_spec + "\n";
        user += '\n';
    }
    if (!context.empty()) {
        user += "Relevant facts:\n";
        for (const auto& c : context)
            user += "- " + c + '\n';
        user += '\n';
    }
    user += "Question: " + std::string(question);

    return json{ { "model", model_name },
                 { "temperature", 0 },
                 { "messages",
                   json::array({ { { "role", "system" }, { "content", system } },
                                 { { "role", "user" }, { "content", user } } }) } };
}

Translator::Translator(TranslatorConfig config, std::vector<TemplateRule> rules, std::shared_ptr<LlmTransport> transport,
                       std::vector<QAItem> examples)
    : config_(std::move(config)),
      rules_(std::move(rules)),
      transport_(std::move(transport)),
      examples_(std::move(examples)),
      transcript_mutex_(std::make_shared<std::mutex>())
{
    if (config_.strategy == Strategy::llm && !transport_ && config_.validate().empty())
        transport_ = std::make_shared<HttpLlmTransport>(HttpEndpoint{ config_.endpoint, config_.api_key, config_.timeout });
}

Translation Translator::translate(std::string_view question, const Model& model,
                                  const std::vector<std::string>& context, const QAItem* item) const
{
    Translation t;
    switch (config_.strategy) {
    case Strategy::template_rules: {
        const auto hit = apply_templates(rules_, question);
        if (!hit) {
            t.failure = TranslationFailure{ FailureKind::no_rule, "no template rule matches the question", {} };
            return t;
        }
        t.source = "template rule " + std::to_string(hit->first + 1);
        auto bound = compile_query(hit->second, model, config_.aliases);
        if (!bound) {
            t.failure = TranslationFailure{ FailureKind::invalid_query,
                                            "template produced an invalid query '" + hit->second + "'",
                                            bound.diagnostics() };
            return t;
        }
        t.query = std::move(bound).value();
        return t;
    }
    case Strategy::spec_passthrough: {
        if (!item || item->formal_spec.empty()) {
            t.failure = TranslationFailure{ FailureKind::missing_spec,
                                            "spec strategy needs a dataset item with a formal_spec", {} };
            return t;
        }
        t.source = "formal_spec";
        auto bound = compile_query(item->formal_spec, model, config_.aliases);
        if (!bound) {
            t.failure = TranslationFailure{ FailureKind::invalid_query,
                                            "formal_spec '" + item->formal_spec + "' is invalid", bound.diagnostics() };
            return t;
        }
        t.query = std::move(bound).value();
        return t;
    }
    case Strategy::llm:
        return translate_llm(question, model, context);
    }
    return t;
}

Translation Translator::translate_llm(std::string_view question, const Model& model,
                                      const std::vector<std::string>& context) const
{
    Translation t;
    if (const auto problems = config_.validate(); !problems.empty() || !transport_) {
        t.failure = TranslationFailure{ FailureKind::config, "llm translator is not configured", problems };
        return t;
    }

    std::vector<QAItem> shots;
    for (const auto& ex : examples_)
        if (ex.question != question)
            shots.push_back(ex);
    auto request = build_llm_request(question, signature_of(model), context, shots, config_.model_name);

    std::vector<Diagnostic> last;
    for (unsigned attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
        ++t.endpoint_calls;
        std::string reply;
        try {
            reply = transport_->complete(request);
        } catch (const NetworkError& e) {
            log_exchange({ { "attempt", attempt }, { "request", request }, { "error", e.what() } });
            t.failure = TranslationFailure{ FailureKind::network, std::string("llm endpoint: ") + e.what(), {} };
            return t;
        }
        log_exchange({ { "attempt", attempt }, { "request", request }, { "response", reply } });

        const auto text = extract_query_line(reply);
        auto bound = compile_query(text, model, config_.aliases);
        if (bound) {
            t.query = std::move(bound).value();
            t.source = "llm attempt " + std::to_string(attempt);
            return t;
        }
        last = bound.diagnostics();
        std::string feedback = "The query `" + text + "` was rejected:\n";
        for (const auto& d : last)
            feedback += "- " + d.message + '\n';
        feedback += "Reply with a corrected query on the final line.";
        request["messages"].push_back({ { "role", "assistant" }, { "content", reply } });
        request["messages"].push_back({ { "role", "user" }, { "content", feedback } });
    }
    t.failure = TranslationFailure{ FailureKind::invalid_query,
                                    "no valid query after " + std::to_string(t.endpoint_calls) + " llm attempts",
                                    std::move(last) };
    return t;
}

void Translator::log_exchange(const json& record) const
{
    if (config_.transcript_path.empty())
        return;
    const std::lock_guard lock(*transcript_mutex_);
    std::ofstream out(config_.transcript_path, std::ios::app);
    out << record.dump() << '\n';
}

// ---------------------------------------------------------------------------
// answering

std::vector<std::string> retrieve_context(std::string_view question, const FactBase& facts)
{
    const auto q = content_tokens(question);
    const std::set<std::string> qset(q.begin(), q.end());
    std::vector<std::pair<std::size_t, std::size_t>> scored; // (overlap, index)
    for (std::size_t i = 0; i < facts.size(); ++i) {
        const auto toks = content_tokens(facts[i].display);
        const std::set<std::string> fset(toks.begin(), toks.end());
        std::size_t overlap = 0;
        for (const auto& t : fset)
            overlap += qset.contains(t) ? 1 : 0;
        if (overlap > 0)
            scored.emplace_back(overlap, i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> out;
    for (const auto& [score, i] : scored)
        out.push_back(facts[i].display);
    return out;
}

std::string explain_unreachable(const Model& model, const Expr& predicate)
{
    std::set<std::size_t> pred_vars;
    std::set<std::pair<std::size_t, std::int32_t>> pred_locs;
    collect_reads(predicate, pred_vars, &pred_locs);

    std::vector<std::string> blocking;
    std::set<std::string> seen;
    for (std::size_t p = 0; p < model.processes.size(); ++p) {
        for (const auto& t : model.processes[p].transitions) {
            if (t.guard.is_true_literal())
                continue;
            std::set<std::size_t> writes;
            for (const auto& u : t.updates)
                writes.insert(u.var);
            std::set<std::size_t> guard_vars;
            collect_reads(t.guard, guard_vars, nullptr);

            bool relevant = pred_locs.contains({ p, static_cast<std::int32_t>(t.target) }) && t.source != t.target;
            for (const auto v : writes) {
                if (!pred_vars.contains(v))
                    continue;
                for (const auto g : guard_vars)
                    relevant = relevant || (pred_vars.contains(g) && !writes.contains(g));
            }
            if (!relevant)
                continue;
            auto line = "'" + t.label + "' requires " + to_string(t.guard);
            if (seen.insert(line).second)
                blocking.push_back(std::move(line));
        }
    }
    std::string out = "No reachable state satisfies " + to_string(predicate) + ".";
    if (!blocking.empty())
        out += " The guard" + std::string(blocking.size() > 1 ? "s" : "") + " blocking it: " + join(blocking, "; ") + ".";
    return out;
}

std::string render_answer(Answer verdict, std::string_view query, const std::optional<std::string>& trace,
                          std::string_view reason, std::string_view trace_heading)
{
    std::string out(answer_name(verdict));
    out += '.';
    if (!query.empty()) {
        out += " Query: ";
        out += query;
        out += '.';
    }
    if (trace) {
        out += '\n';
        out += trace_heading;
        out += ": " + *trace;
    } else if (!reason.empty()) {
        out += '\n';
        out += reason;
    }
    return out;
}

QAAnswer ask(std::string_view question, const Model& model, const FactBase& facts, const Translator& translator,
             const ExploreLimits& limits, const QAItem* item)
{
    QAAnswer a;
    a.context = retrieve_context(question, facts);
    if (a.context.empty() && item)
        a.context = item->context;

    const auto tr = translator.translate(question, model, a.context, item);
    a.translation_source = tr.source;
    a.endpoint_calls = tr.endpoint_calls;
    if (!tr.ok()) {
        a.failure = tr.failure->kind;
        a.reason = "Translation failed (" + std::string(failure_kind_name(tr.failure->kind)) + "): " + tr.failure->message;
        for (const auto& d : tr.failure->diagnostics)
            a.reason += "; " + d.message;
        a.answer_text = render_answer(a.verdict, {}, std::nullopt, a.reason);
        return a;
    }

    const auto& query = *tr.query;
    a.query_used = to_string(query);
    Verdict v;
    try {
        v = check(model, query, limits);
    } catch (const std::exception& e) {
        a.reason = std::string("Checking failed: ") + e.what();
        a.answer_text = render_answer(a.verdict, a.query_used, std::nullopt, a.reason);
        return a;
    }

    std::string heading = "Trace";
    switch (v.outcome) {
    case Outcome::yes:
        a.verdict = Answer::yes;
        break;
    case Outcome::no:
        a.verdict = Answer::no;
        break;
    case Outcome::inconclusive:
        a.verdict = Answer::uncertain;
        a.reason = "Exploration stopped at a resource limit after " + std::to_string(v.stats.states)
                   + " states without deciding the query.";
        break;
    }
    if (v.conclusive()) {
        if (v.evidence) {
            a.trace_text = render_trace(model, *v.evidence);
            if (!v.satisfied())
                heading = "Counterexample";
        } else if (query.quantifier() == Quantifier::exists_eventually) {
            a.reason = explain_unreachable(model, query.predicate());
        } else if (v.satisfied()) {
            a.reason = "The property holds in all " + std::to_string(v.stats.states) + " reachable states.";
        } else {
            a.reason = "No path satisfies the property.";
        }
    }
    a.answer_text = render_answer(a.verdict, a.query_used, a.trace_text, a.reason, heading);
    a.check_result = std::move(v);
    return a;
}

} // namespace mcfr
