#include "helpers.hpp"

#include "mcfr/edu_model.hpp"
#include "mcfr/qa.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace mcfr;
using mcfr::test::PoisonTransport;
using mcfr::test::ScriptedTransport;

namespace {

const Model& edu()
{
    static const Model m = build_edu_model();
    return m;
}

const std::vector<TemplateRule>& rules()
{
    static const auto r = [] {
        auto loaded = load_templates(asset_path("edu_templates.json"));
        REQUIRE(loaded.ok());
        return std::move(loaded).value();
    }();
    return r;
}

const QAItem& item(std::string_view id)
{
    static const auto items = edu_mini_dataset();
    const auto it = std::find_if(items.begin(), items.end(), [&](const QAItem& i) { return i.id == id; });
    REQUIRE(it != items.end());
    return *it;
}

TranslatorConfig llm_config(unsigned retries = 3)
{
    TranslatorConfig cfg;
    cfg.strategy = Strategy::llm;
    cfg.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    cfg.model_name = "stub";
    cfg.max_retries = retries;
    cfg.aliases = edu_aliases();
    return cfg;
}

// Independent tokenizer for the retrieval property.
std::set<std::string> words(std::string_view text)
{
    std::set<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty())
        out.insert(cur);
    return out;
}

} // namespace

TEST_SUITE("qa")
{
    TEST_CASE("question normalization")
    {
        CHECK(normalize_question("  Can I  register\tfor CourseX?  ") == "Can I register for CourseX?");
        CHECK(normalize_question("I haven’t completed English 1–3") == "I haven't completed English 1-3");
        CHECK(normalize_question("credits ≥ 100 and time ≤ 8") == "credits >= 100 and time <= 8");
        CHECK(normalize_question("Year 3") == "Year 3");
    }

    TEST_CASE("llm replies: the query is the last non-empty line")
    {
        CHECK(extract_query_line("E<> done") == "E<> done");
        CHECK(extract_query_line("Sure, here it is:\n\n`E<> (x > 1)`\n\n") == "E<> (x > 1)");
        CHECK(extract_query_line("```\nA[] ok\n```") == "A[] ok");
        CHECK(extract_query_line("") == "");
    }

    TEST_CASE("templates translate every bundled question to its formal spec")
    {
        const Translator tr(TranslatorConfig{}, rules());
        for (const char* id : { "Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q8" }) {
            CAPTURE(id);
            const auto& it = item(id);
            const auto t = tr.translate(it.question, edu(), {});
            REQUIRE(t.ok());
            CHECK(to_string(*t.query) == to_string(test::must_query(it.formal_spec, edu(), edu_aliases())));
            CHECK(t.source.starts_with("template rule "));
        }
        // Different query, same verdict.
        const auto q7 = tr.translate(item("Q7").question, edu(), {});
        REQUIRE(q7.ok());
        CHECK(to_string(*q7.query) == "E<> (internshipDone && foundCoursesDone == 1)");
    }

    TEST_CASE("template slots accept number words")
    {
        const auto hit = apply_templates(rules(), "Can a student graduate within seven semesters?");
        REQUIRE(hit);
        CHECK(hit->first == 0);
        CHECK(hit->second == "E<> (Student.Graduated && time <= 7)");
        CHECK_FALSE(apply_templates(rules(), "What is the airspeed of a swallow?"));
    }

    TEST_CASE("bad template files are rejected")
    {
        CHECK_FALSE(parse_templates(nlohmann::json::object()).ok());
        CHECK_FALSE(parse_templates(nlohmann::json::parse(R"([{"pattern": "x"}])")).ok());
        CHECK_FALSE(parse_templates(nlohmann::json::parse(R"([{"pattern": "(", "query": "E<> a"}])")).ok());
        CHECK_FALSE(load_templates("/nonexistent/templates.json").ok());
    }

    TEST_CASE("unmatched questions become Uncertain with a reason")
    {
        auto poison = std::make_shared<PoisonTransport>();
        const Translator tr(TranslatorConfig{}, rules(), poison);
        const auto a = ask("Is the cafeteria open on Sundays?", edu(), edu_facts(), tr);
        CHECK(a.verdict == Answer::uncertain);
        CHECK(a.failure == FailureKind::no_rule);
        CHECK(a.query_used.empty());
        CHECK(a.answer_text == "Uncertain.\nTranslation failed (no-rule): no template rule matches the question");
        CHECK(poison->calls == 0);
    }

    TEST_CASE("spec strategy uses the item's formal spec and needs one")
    {
        TranslatorConfig cfg;
        cfg.strategy = Strategy::spec_passthrough;
        cfg.aliases = edu_aliases();
        const Translator tr(cfg);
        const auto& q2 = item("Q2");
        const auto t = tr.translate(q2.question, edu(), {}, &q2);
        REQUIRE(t.ok());
        CHECK(t.source == "formal_spec");
        const auto missing = tr.translate(q2.question, edu(), {});
        REQUIRE(missing.failure);
        CHECK(missing.failure->kind == FailureKind::missing_spec);
    }

    TEST_CASE("answers: yes with trace, no with the blocking guard")
    {
        const Translator tr(TranslatorConfig{}, rules());
        const auto yes = ask(item("Q1").question, edu(), edu_facts(), tr);
        CHECK(yes.verdict == Answer::yes);
        CHECK(yes.query_used == "E<> (Student.Graduated && time <= 8)");
        REQUIRE(yes.trace_text);
        CHECK(yes.answer_text.starts_with("Yes. Query: E<> (Student.Graduated && time <= 8).\nTrace: Start → Year1"));

        const auto no = ask(item("Q2").question, edu(), edu_facts(), tr);
        CHECK(no.verdict == Answer::no);
        CHECK(no.answer_text.starts_with("No. Query: E<> (CourseX_Reg && !CourseY_Passed).\nNo reachable state"));
        CHECK(no.reason.find("'register CourseX' requires CourseY_Passed") != std::string::npos);
        CHECK(std::find(no.context.begin(), no.context.end(), "prerequisite(CourseX, CourseY)") != no.context.end());

        const auto a8 = ask(item("Q8").question, edu(), edu_facts(), tr);
        CHECK(a8.verdict == Answer::no);
        CHECK(a8.answer_text.find("\nCounterexample: ") != std::string::npos);
    }

    TEST_CASE("answers are deterministic")
    {
        const Translator tr(TranslatorConfig{}, rules());
        for (const char* id : { "Q1", "Q2", "Q4", "Q5" }) {
            const auto a = ask(item(id).question, edu(), edu_facts(), tr);
            const auto b = ask(item(id).question, edu(), edu_facts(), tr);
            CHECK(a.answer_text == b.answer_text);
        }
        CHECK(render_answer(Answer::yes, "E<> a", std::string("A → B"), "") == "Yes. Query: E<> a.\nTrace: A → B");
        CHECK(render_answer(Answer::no, "A[] a", std::nullopt, "Because.") == "No. Query: A[] a.\nBecause.");
    }

    TEST_CASE("resource limits make the answer Uncertain")
    {
        const Translator tr(TranslatorConfig{}, rules());
        ExploreLimits tiny;
        tiny.max_states = 20;
        const auto a = ask(item("Q2").question, edu(), edu_facts(), tr, tiny);
        CHECK(a.verdict == Answer::uncertain);
        CHECK(a.query_used == "E<> (CourseX_Reg && !CourseY_Passed)");
        CHECK(a.reason.starts_with("Exploration stopped at a resource limit after "));
    }

    TEST_CASE("llm translation retries with the diagnostics")
    {
        auto stub = std::make_shared<ScriptedTransport>(std::vector<std::string>{
            "E<> (semester <= 8 && AllRequirementsMet)",
            "Corrected:\nE<> (Student.Graduated && time <= 8)",
        });
        const Translator tr(llm_config(), {}, stub);
        const auto a = ask(item("Q1").question, edu(), edu_facts(), tr);
        CHECK(a.verdict == Answer::yes);
        CHECK(a.translation_source == "llm attempt 2");
        CHECK(a.endpoint_calls == 2);
        REQUIRE(stub->requests.size() == 2);
        const auto& second = stub->requests[1]["messages"];
        REQUIRE(second.size() == 4);
        const auto feedback = second[3]["content"].get<std::string>();
        CHECK(feedback.find("unknown identifier 'semester'") != std::string::npos);
        CHECK(feedback.find("unknown identifier 'AllRequirementsMet'") != std::string::npos);
        CHECK(stub->requests[0]["temperature"] == 0);
        CHECK(stub->requests[0]["model"] == "stub");
    }

    TEST_CASE("llm translation gives up after the retry budget")
    {
        for (unsigned retries : { 0u, 1u, 3u }) {
            auto stub = std::make_shared<ScriptedTransport>(std::vector<std::string>{ "E<> bogus" });
            const Translator tr(llm_config(retries), {}, stub);
            const auto a = ask("Can a student graduate?", edu(), edu_facts(), tr);
            CHECK(a.verdict == Answer::uncertain);
            CHECK(a.failure == FailureKind::invalid_query);
            CHECK(stub->requests.size() == retries + 1);
        }
    }

    TEST_CASE("llm network errors are not retried")
    {
        auto poison = std::make_shared<PoisonTransport>();
        const Translator tr(llm_config(), {}, poison);
        const auto a = ask("Can a student graduate?", edu(), edu_facts(), tr);
        CHECK(a.verdict == Answer::uncertain);
        CHECK(a.failure == FailureKind::network);
        CHECK(poison->calls == 1);
    }

    TEST_CASE("llm configuration comes from the environment")
    {
        const Environment env{ { "MCFR_LLM_ENDPOINT", "http://localhost:1/v1/chat/completions" },
                               { "MCFR_LLM_MODEL", "m" },
                               { "MCFR_LLM_API_KEY", "secret" } };
        const auto cfg = TranslatorConfig::from_environment(Strategy::llm, env);
        CHECK(cfg.endpoint == "http://localhost:1/v1/chat/completions");
        CHECK(cfg.model_name == "m");
        CHECK(cfg.api_key == "secret");
        CHECK(cfg.validate().empty());
        CHECK(TranslatorConfig::from_environment(Strategy::llm, {}).validate().size() == 2);
        CHECK(TranslatorConfig::from_environment(Strategy::template_rules, {}).validate().empty());

        const Translator unconfigured(TranslatorConfig::from_environment(Strategy::llm, {}));
        const auto t = unconfigured.translate("Can a student graduate?", edu(), {});
        REQUIRE(t.failure);
        CHECK(t.failure->kind == FailureKind::config);
    }

    TEST_CASE("llm prompt carries the model signature, facts and examples")
    {
        const auto sig = signature_of(edu());
        const auto req = build_llm_request("Can I graduate?", sig, { "prerequisite(CourseX, CourseY)" },
                                           { item("Q2") }, "m");
        const auto system = req["messages"][0]["content"].get<std::string>();
        const auto user = req["messages"][1]["content"].get<std::string>();
        CHECK(system.find("var totalCredits: int[0,256]") != std::string::npos);
        CHECK(system.find("process Student locations: Start, Year1") != std::string::npos);
        CHECK(user.find("- prerequisite(CourseX, CourseY)") != std::string::npos);
        CHECK(user.find("A: E<> (CourseX_Reg && !CourseY_Passed)") != std::string::npos);
        CHECK(user.ends_with("Question: Can I graduate?"));
        CHECK(sig.to_json()["variables"].size() == 16);
    }

    TEST_CASE("llm transcript records every call")
    {
        const auto path = std::filesystem::temp_directory_path() / "mcfr_transcript_test.jsonl";
        std::filesystem::remove(path);
        auto cfg = llm_config();
        cfg.transcript_path = path.string();
        auto stub = std::make_shared<ScriptedTransport>(std::vector<std::string>{ "E<> nope", "E<> Student.Graduated" });
        const Translator tr(cfg, {}, stub);
        (void)tr.translate("Can a student graduate?", edu(), {});
        std::ifstream in(path);
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            const auto rec = nlohmann::json::parse(line);
            CHECK(rec["attempt"] == ++n);
            CHECK(rec.contains("response"));
        }
        CHECK(n == 2);
        std::filesystem::remove(path);
    }

    TEST_CASE("retrieval examples")
    {
        const auto facts = edu_facts();
        const auto ctx = retrieve_context("Is it possible to register for CourseX without passing CourseY?", facts);
        REQUIRE_FALSE(ctx.empty());
        CHECK(ctx[0] == "prerequisite(CourseX, CourseY)");
        CHECK(retrieve_context("Is it the?", facts).empty());
        CHECK(retrieve_context("", facts).empty());
    }

    TEST_CASE("retrieval returns exactly the facts sharing a content word, best first")
    {
        const auto facts = edu_facts();
        std::mt19937_64 rng(42);
        const std::vector<std::string> filler{ "can", "the", "is", "it", "if", "i", "student", "a", "to" };
        std::set<std::string> stop(filler.begin(), filler.end());
        // Function words the retriever may ignore; never used as the probe.
        for (const char* w : { "have", "has", "had", "been", "that", "this", "they", "them", "their", "with",
                               "without", "within", "were", "will", "would", "what", "when", "there", "then",
                               "than", "does", "not", "and", "for", "of", "in", "on", "at", "by" })
            stop.insert(w);
        for (int n = 0; n < 100; ++n) {
            const auto& fact = facts[rng() % facts.size()];
            const auto fw = words(fact.display);
            std::vector<std::string> candidates;
            for (const auto& w : fw)
                if (!stop.contains(w))
                    candidates.push_back(w);
            REQUIRE_FALSE(candidates.empty());
            std::string question = filler[rng() % filler.size()] + ' ' + candidates[rng() % candidates.size()] + ' '
                                   + filler[rng() % filler.size()] + '?';
            CAPTURE(question);
            const auto ctx = retrieve_context(question, facts);
            CHECK(std::find(ctx.begin(), ctx.end(), fact.display) != ctx.end());

            const auto qw = words(question);
            std::size_t previous = SIZE_MAX;
            for (const auto& c : ctx) {
                const auto cw = words(c);
                std::size_t overlap = 0;
                for (const auto& w : cw)
                    overlap += qw.contains(w) && !stop.contains(w);
                CHECK(overlap >= 1);
                CHECK(overlap <= previous);
                previous = overlap;
            }
        }
    }

    TEST_CASE("template and spec strategies never touch the network")
    {
        auto poison = std::make_shared<PoisonTransport>();
        TranslatorConfig spec;
        spec.strategy = Strategy::spec_passthrough;
        spec.aliases = edu_aliases();
        const Translator by_spec(spec, {}, poison);
        const Translator by_template(TranslatorConfig{}, rules(), poison);
        for (const auto& it : edu_mini_dataset()) {
            (void)ask(it.question, edu(), edu_facts(), by_spec, {}, &it);
            (void)ask(it.question, edu(), edu_facts(), by_template, {}, &it);
        }
        CHECK(poison->calls == 0);
    }

    TEST_CASE("strategy names")
    {
        for (auto s : { Strategy::template_rules, Strategy::spec_passthrough, Strategy::llm })
            CHECK(parse_strategy(strategy_name(s)) == s);
        CHECK(parse_strategy("spec-passthrough") == Strategy::spec_passthrough);
        CHECK_FALSE(parse_strategy("oracle"));
    }
}
