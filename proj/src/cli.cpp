#include "mcfr/cli.hpp"

#include "mcfr/benchmark.hpp"
#include "mcfr/checker.hpp"
#include "mcfr/dataset.hpp"
#include "mcfr/edu_model.hpp"
#include "mcfr/model_dsl.hpp"
#include "mcfr/qa.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace mcfr {

namespace fs = std::filesystem;

namespace {

struct LimitFlags {
    std::size_t max_states = ExploreLimits{}.max_states;
    std::optional<std::size_t> max_depth;
    std::optional<double> time_budget;
    unsigned threads = 1;

    void attach(CLI::App& cmd)
    {
        cmd.add_option("--max-states", max_states, "Stop exploring after this many states")->capture_default_str();
        cmd.add_option("--max-depth", max_depth, "Stop exploring below this BFS depth");
        cmd.add_option("--time-budget", time_budget, "Wall-clock budget in seconds");
        cmd.add_option("--threads", threads, "Worker threads for successor generation")->capture_default_str();
    }

    [[nodiscard]] ExploreLimits limits() const
    {
        ExploreLimits l;
        l.max_states = max_states;
        l.max_depth = max_depth;
        l.time_budget_seconds = time_budget;
        l.threads = std::max(1u, threads);
        return l;
    }
};

struct TranslatorFlags {
    std::string strategy;
    std::string aliases;
    std::string templates;
    std::string facts;
    std::string transcript;
    unsigned max_retries = 3;

    void attach(CLI::App& cmd, const std::string& default_strategy)
    {
        strategy = default_strategy;
        cmd.add_option("--translator", strategy, "Question translator")
            ->check(CLI::IsMember({ "template", "spec", "llm" }))
            ->capture_default_str();
        cmd.add_option("--aliases", aliases, "Alias file mapping dataset names to model names");
        cmd.add_option("--templates", templates, "Template rule file (default: bundled rules)");
        cmd.add_option("--facts", facts, "Fact file (default: bundled facts)");
        cmd.add_option("--transcript", transcript, "Append llm requests and replies to this file");
        cmd.add_option("--max-retries", max_retries, "llm retries after a rejected query")->capture_default_str();
    }
};

// Paths that do not exist are looked up in the bundled asset directory.
std::string resolve_input(const std::string& path)
{
    std::error_code ec;
    if (path.empty() || fs::exists(path, ec))
        return path;
    const auto bundled = asset_dir() / path;
    if (fs::exists(bundled, ec))
        return bundled.string();
    return path;
}

void print_diagnostics(std::ostream& err, const std::vector<Diagnostic>& diags, std::string_view file)
{
    for (const auto& d : diags)
        err << format_diagnostic(d, file) << '\n';
}

std::optional<Model> load_model(const std::string& path, std::ostream& err)
{
    const auto resolved = resolve_input(path);
    auto m = load_model_file(resolved);
    if (!m) {
        print_diagnostics(err, m.diagnostics(), resolved);
        return std::nullopt;
    }
    return std::move(m).value();
}

std::optional<AliasMap> load_alias_file(const std::string& path, std::ostream& err)
{
    if (path.empty())
        return AliasMap{};
    const auto resolved = resolve_input(path);
    auto a = load_aliases(resolved);
    if (!a) {
        print_diagnostics(err, a.diagnostics(), resolved);
        return std::nullopt;
    }
    return std::move(a).value();
}

// The sidecar `aliases.json` next to a dataset is used when no alias file
// is given.
std::string default_alias_path(const std::string& explicit_path, const std::string& dataset)
{
    if (!explicit_path.empty() || dataset.empty())
        return explicit_path;
    std::error_code ec;
    const auto sidecar = fs::path(resolve_input(dataset)).parent_path() / "aliases.json";
    return fs::exists(sidecar, ec) ? sidecar.string() : std::string{};
}

struct TranslatorSetup {
    std::optional<Translator> translator;
    FactBase facts;
    int status = exit_ok;
};

TranslatorSetup make_translator(const TranslatorFlags& flags, const AliasMap& aliases, const CliContext& ctx,
                                std::ostream& err)
{
    TranslatorSetup s;
    const auto strategy = *parse_strategy(flags.strategy);
    auto cfg = TranslatorConfig::from_environment(strategy, ctx.env);
    cfg.aliases = aliases;
    cfg.max_retries = flags.max_retries;
    cfg.transcript_path = flags.transcript;
    if (const auto problems = cfg.validate(); !problems.empty()) {
        print_diagnostics(err, problems, "translator");
        s.status = exit_translator;
        return s;
    }

    std::vector<TemplateRule> rules;
    if (strategy == Strategy::template_rules) {
        const auto path = resolve_input(flags.templates.empty() ? asset_path("edu_templates.json") : flags.templates);
        auto r = load_templates(path);
        if (!r) {
            print_diagnostics(err, r.diagnostics(), path);
            s.status = exit_input;
            return s;
        }
        rules = std::move(r).value();
    }

    const auto facts_path = resolve_input(flags.facts.empty() ? asset_path("edu_facts.json") : flags.facts);
    auto f = load_facts(facts_path);
    if (!f) {
        print_diagnostics(err, f.diagnostics(), facts_path);
        s.status = exit_input;
        return s;
    }
    s.facts = std::move(f).value();

    std::vector<QAItem> examples;
    if (strategy == Strategy::llm) {
        // Few-shot pairs come from the bundled mini dataset when it binds
        // against nothing but its own names; a missing file just means no
        // examples.
        std::error_code ec;
        const auto mini = asset_path("edumc_mini.json");
        if (fs::exists(mini, ec)) {
            std::ifstream in(mini);
            try {
                const auto doc = nlohmann::json::parse(in);
                for (const auto& rec : doc)
                    if (rec.contains("q") && rec.contains("formal_spec"))
                        examples.push_back(QAItem{ {}, rec["q"].get<std::string>(), Category::safety, {}, {},
                                                   rec["formal_spec"].get<std::string>(), Answer::no });
            } catch (const nlohmann::json::exception&) {
                examples.clear();
            }
        }
    }
    s.translator.emplace(std::move(cfg), std::move(rules), ctx.transport, std::move(examples));
    return s;
}

void print_verdict_text(std::ostream& out, const Model& model, const Verdict& v, bool with_trace)
{
    switch (v.outcome) {
    case Outcome::yes:
        out << "Yes\n";
        break;
    case Outcome::no:
        out << "No\n";
        break;
    case Outcome::inconclusive:
        out << "Inconclusive (exploration stopped after " << v.stats.states << " states)\n";
        break;
    }
    if (with_trace && v.evidence) {
        out << (v.satisfied() ? "Trace: " : "Counterexample: ") << render_trace(model, *v.evidence) << '\n';
        out << "  0: " << describe_state(model, v.evidence->initial) << '\n';
        for (std::size_t i = 0; i < v.evidence->steps.size(); ++i) {
            const auto& step = v.evidence->steps[i];
            out << "  " << i + 1 << ": [" << step.label << "] " << describe_state(model, step.state) << '\n';
        }
    }
    out << "states explored: " << v.stats.states << ", transitions: " << v.stats.edges << '\n';
}

int verdict_status(const Verdict& v, const std::string& expect)
{
    if (!v.conclusive())
        return exit_resource_limit;
    if (expect.empty())
        return exit_ok;
    return v.satisfied() == (expect == "yes") ? exit_ok : exit_expectation;
}

bool looks_like_query(std::string_view line)
{
    for (const std::string_view q : { "E<>", "A[]", "E[]", "A<>" })
        if (line.starts_with(q))
            return true;
    for (const std::string_view q : { "EF", "AG", "EG", "AF" })
        if (line.starts_with(q) && (line.size() == 2 || line[2] == ' ' || line[2] == '('))
            return true;
    return false;
}

std::string trim(std::string s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

} // namespace

int run_cli(const std::vector<std::string>& args, const CliContext& ctx, const CliStreams& io)
{
    CLI::App app{ "Explicit-state model checking and question answering over transition models", "mcfr" };
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "Parse and validate a model file");
    std::string v_model;
    bool v_render = false;
    validate->add_option("model", v_model, "Model file (.mcm)")->required();
    validate->add_flag("--render", v_render, "Print the canonical form of the model");

    // check
    auto* check_cmd = app.add_subcommand("check", "Check one query against a model");
    std::string c_model;
    std::string c_query;
    std::string c_format = "text";
    std::string c_expect;
    std::string c_aliases;
    bool c_trace = false;
    LimitFlags c_limits;
    check_cmd->add_option("model", c_model, "Model file (.mcm)")->required();
    check_cmd->add_option("-q,--query", c_query, "Query, e.g. \"E<> (Student.Graduated && time <= 8)\"")->required();
    check_cmd->add_flag("--trace", c_trace, "Print the witness or counterexample");
    check_cmd->add_option("--format", c_format, "Output format")
        ->check(CLI::IsMember({ "text", "structured" }))
        ->capture_default_str();
    check_cmd->add_option("--expect", c_expect, "Exit with status 1 unless the verdict matches")
        ->check(CLI::IsMember({ "yes", "no" }));
    check_cmd->add_option("--aliases", c_aliases, "Alias file");
    c_limits.attach(*check_cmd);

    // ask
    auto* ask_cmd = app.add_subcommand("ask", "Answer a natural-language question");
    std::string a_model;
    std::string a_question;
    std::string a_dataset;
    std::string a_id;
    std::string a_format = "text";
    TranslatorFlags a_tr;
    LimitFlags a_limits;
    ask_cmd->add_option("model", a_model, "Model file (.mcm)")->required();
    ask_cmd->add_option("--question", a_question, "Question text");
    ask_cmd->add_option("--dataset", a_dataset, "Dataset file holding the item");
    ask_cmd->add_option("--id", a_id, "Item id inside --dataset");
    ask_cmd->add_option("--format", a_format, "Output format")
        ->check(CLI::IsMember({ "text", "structured" }))
        ->capture_default_str();
    a_tr.attach(*ask_cmd, "template");
    a_limits.attach(*ask_cmd);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Evaluate a dataset and report accuracy per category");
    std::string b_model;
    std::string b_dataset;
    std::string b_report;
    std::string b_format = "text";
    unsigned b_jobs = 1;
    TranslatorFlags b_tr;
    LimitFlags b_limits;
    bench_cmd->add_option("model", b_model, "Model file (.mcm)")->required();
    bench_cmd->add_option("dataset", b_dataset, "Dataset file (.json)")->required();
    bench_cmd->add_option("--report", b_report, "Write the structured report to this file");
    bench_cmd->add_option("--format", b_format, "Output format")
        ->check(CLI::IsMember({ "text", "structured" }))
        ->capture_default_str();
    bench_cmd->add_option("--jobs", b_jobs, "Items evaluated concurrently")->capture_default_str();
    b_tr.attach(*bench_cmd, "spec");
    b_limits.attach(*bench_cmd);

    // repl
    auto* repl_cmd = app.add_subcommand("repl", "Read queries or questions line by line");
    std::string r_model;
    TranslatorFlags r_tr;
    LimitFlags r_limits;
    repl_cmd->add_option("model", r_model, "Model file (.mcm)")->required();
    r_tr.attach(*repl_cmd, "template");
    r_limits.attach(*repl_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const auto code = app.exit(e, io.out, io.err);
        return code == 0 ? exit_ok : exit_usage;
    }

    auto& out = io.out;
    auto& err = io.err;

    if (validate->parsed()) {
        const auto model = load_model(v_model, err);
        if (!model)
            return exit_input;
        if (v_render) {
            out << render_model(*model);
            return exit_ok;
        }
        std::size_t transitions = 0;
        std::size_t locations = 0;
        for (const auto& p : model->processes) {
            transitions += p.transitions.size();
            locations += p.locations.size();
        }
        out << "ok: model " << model->name << ": " << model->vars.size() << " variables, "
            << model->processes.size() << " process" << (model->processes.size() == 1 ? "" : "es") << ", "
            << locations << " locations, " << transitions << " transitions\n";
        return exit_ok;
    }

    if (check_cmd->parsed()) {
        const auto model = load_model(c_model, err);
        if (!model)
            return exit_input;
        const auto aliases = load_alias_file(c_aliases, err);
        if (!aliases)
            return exit_input;
        const auto bound = compile_query(c_query, *model, *aliases);
        if (!bound) {
            print_diagnostics(err, bound.diagnostics(), "<query>");
            return exit_input;
        }
        Verdict v;
        try {
            v = check(*model, bound.value(), c_limits.limits());
        } catch (const RangeViolation& e) {
            err << c_model << ": error[bound]: " << e.what() << '\n';
            return exit_input;
        }
        if (c_format == "structured") {
            VerdictJsonOptions opts;
            opts.include_trace = c_trace;
            out << verdict_to_json(*model, bound.value(), v, opts).dump() << '\n';
        } else {
            print_verdict_text(out, *model, v, c_trace);
        }
        return verdict_status(v, c_expect);
    }

    if (ask_cmd->parsed()) {
        const auto model = load_model(a_model, err);
        if (!model)
            return exit_input;
        const auto aliases = load_alias_file(default_alias_path(a_tr.aliases, a_dataset), err);
        if (!aliases)
            return exit_input;

        std::optional<QAItem> item;
        if (!a_dataset.empty() || !a_id.empty()) {
            if (a_dataset.empty() || a_id.empty()) {
                err << "error: --dataset and --id must be given together\n";
                return exit_usage;
            }
            const auto path = resolve_input(a_dataset);
            auto items = load_dataset(path, *model, *aliases);
            if (!items) {
                print_diagnostics(err, items.diagnostics(), path);
                return exit_input;
            }
            const auto it = std::find_if(items->begin(), items->end(), [&](const QAItem& i) { return i.id == a_id; });
            if (it == items->end()) {
                err << path << ": error: no item with id '" << a_id << "'\n";
                return exit_input;
            }
            item = *it;
            if (a_question.empty())
                a_question = item->question;
        }
        if (a_question.empty()) {
            err << "error: --question is required unless --dataset/--id name an item\n";
            return exit_usage;
        }
        if (a_tr.strategy == "spec" && !item) {
            err << "error: --translator spec needs --dataset and --id\n";
            return exit_usage;
        }

        auto setup = make_translator(a_tr, *aliases, ctx, err);
        if (!setup.translator)
            return setup.status;
        const auto answer = ask(a_question, *model, setup.facts, *setup.translator, a_limits.limits(),
                                item ? &*item : nullptr);
        if (a_format == "structured") {
            nlohmann::json rec{ { "question", a_question },
                                { "verdict", answer_name(answer.verdict) },
                                { "query", answer.query_used },
                                { "answer", answer.answer_text },
                                { "context", answer.context },
                                { "source", answer.translation_source } };
            if (answer.trace_text)
                rec["trace"] = *answer.trace_text;
            if (!answer.reason.empty())
                rec["reason"] = answer.reason;
            if (answer.failure)
                rec["failure"] = failure_kind_name(*answer.failure);
            out << rec.dump() << '\n';
        } else {
            out << answer.answer_text << '\n';
        }
        if (answer.failure) {
            err << "translation failed: " << answer.reason << '\n';
            return exit_translator;
        }
        if (answer.check_result && !answer.check_result->conclusive())
            return exit_resource_limit;
        return exit_ok;
    }

    if (bench_cmd->parsed()) {
        const auto model = load_model(b_model, err);
        if (!model)
            return exit_input;
        const auto aliases = load_alias_file(default_alias_path(b_tr.aliases, b_dataset), err);
        if (!aliases)
            return exit_input;
        const auto path = resolve_input(b_dataset);
        auto items = load_dataset(path, *model, *aliases);
        if (!items) {
            print_diagnostics(err, items.diagnostics(), path);
            return exit_input;
        }
        auto setup = make_translator(b_tr, *aliases, ctx, err);
        if (!setup.translator)
            return setup.status;

        const bool stream = b_format == "structured";
        ProgressFn progress;
        if (stream)
            progress = [&out](const ItemResult& r) { out << item_result_to_json(r).dump() << '\n' << std::flush; };
        const auto report = evaluate(*model, std::move(items).value(), *setup.translator, setup.facts,
                                     b_limits.limits(), std::max(1u, b_jobs), progress);
        if (stream)
            out << summary_to_json(report).dump() << '\n';
        else
            out << render_report(report, ReportFormat::table_text);
        if (!b_report.empty()) {
            std::ofstream file(b_report, std::ios::binary);
            if (!file) {
                err << b_report << ": error[io]: cannot write report\n";
                return exit_input;
            }
            file << render_report(report, ReportFormat::structured);
        }
        return exit_ok;
    }

    // repl
    const auto model = load_model(r_model, err);
    if (!model)
        return exit_input;
    const auto aliases = load_alias_file(r_tr.aliases, err);
    if (!aliases)
        return exit_input;
    std::optional<Translator> translator;
    FactBase facts;
    if (r_tr.strategy != "spec") {
        auto setup = make_translator(r_tr, *aliases, ctx, err);
        if (!setup.translator)
            return setup.status;
        translator = std::move(setup.translator);
        facts = std::move(setup.facts);
    }

    bool show_trace = false;
    std::string line;
    const auto prompt = [&] {
        if (ctx.interactive)
            out << "mcfr> " << std::flush;
    };
    prompt();
    while (std::getline(io.in, line)) {
        line = trim(line);
        if (line.empty()) {
            prompt();
            continue;
        }
        if (line == ":quit" || line == ":q")
            break;
        if (line == ":trace") {
            show_trace = !show_trace;
            out << "trace " << (show_trace ? "on" : "off") << '\n';
        } else if (line == ":help") {
            out << "enter a query (E<> p, A[] p, E[] p, A<> p) or a question; :trace toggles traces, :quit exits\n";
        } else if (looks_like_query(line)) {
            const auto bound = compile_query(line, *model, *aliases);
            if (!bound) {
                print_diagnostics(err, bound.diagnostics(), "<query>");
            } else {
                try {
                    print_verdict_text(out, *model, check(*model, bound.value(), r_limits.limits()), show_trace);
                } catch (const RangeViolation& e) {
                    err << "error[bound]: " << e.what() << '\n';
                }
            }
        } else if (!translator) {
            err << "error: questions need --translator template or llm\n";
        } else {
            const auto answer = ask(line, *model, facts, *translator, r_limits.limits());
            const auto& text = answer.answer_text;
            out << (show_trace || !answer.trace_text ? text : text.substr(0, text.find('\n'))) << '\n';
        }
        prompt();
    }
    return exit_ok;
}

} // namespace mcfr
