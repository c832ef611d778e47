#include "mcfr/model_dsl.hpp"

#include "mcfr/binder.hpp"
#include "syntax.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace mcfr {

namespace {

using syntax::Parser;
using syntax::Tok;
using syntax::Token;

struct RawUpdate {
    Token var;
    Expr value;
};

struct RawTransition {
    Token source;
    Token target;
    std::optional<Expr> guard;
    std::vector<RawUpdate> updates;
    std::optional<std::string> label;
};

struct RawProcess {
    Token name;
    std::optional<Token> init;
    std::vector<Token> locations;
    std::vector<RawTransition> transitions;
};

struct RawModel {
    Token name;
    std::vector<VarDecl> vars;
    std::vector<RawProcess> processes;
};

bool plain_identifier(std::string_view s)
{
    return s.find_first_of("[(") == std::string_view::npos && !syntax::is_reserved_word(s);
}

class ModelParser {
public:
    explicit ModelParser(std::vector<Token> tokens) : p_{ std::move(tokens) } {}

    RawModel run()
    {
        RawModel m;
        p_.expect_word("model");
        m.name = name_token("as model name");
        p_.accept(Tok::semicolon);
        while (!p_.at(Tok::end)) {
            if (p_.at_word("var"))
                m.vars.push_back(var_decl());
            else if (p_.at_word("process"))
                m.processes.push_back(process());
            else
                p_.fail(p_.peek(), "expected 'var' or 'process' declaration");
        }
        return m;
    }

private:
    Token name_token(std::string_view context)
    {
        const Token& t = p_.expect(Tok::ident, context);
        if (!plain_identifier(t.text))
            p_.fail(t, "'" + t.text + "' is not a valid name");
        return t;
    }

    std::int64_t signed_integer(std::string_view context)
    {
        const bool negative = p_.accept(Tok::minus);
        const auto v = p_.expect(Tok::integer, context).number;
        return negative ? -v : v;
    }

    VarDecl var_decl()
    {
        const SourceSpan start = p_.advance().span;
        VarDecl v;
        if (p_.accept_word("int")) {
            v.type = Type::integer;
            p_.expect(Tok::lbracket, "after 'int'");
            v.lower = signed_integer("as lower bound");
            p_.expect(Tok::comma, "between bounds");
            v.upper = signed_integer("as upper bound");
            p_.expect(Tok::rbracket, "after bounds");
            v.name = name_token("as variable name").text;
            p_.expect(Tok::assign, "before initial value");
            v.initial = signed_integer("as initial value");
        } else if (p_.accept_word("bool")) {
            v.type = Type::boolean;
            v.lower = 0;
            v.upper = 1;
            v.name = name_token("as variable name").text;
            p_.expect(Tok::assign, "before initial value");
            if (p_.accept_word("true"))
                v.initial = 1;
            else if (p_.accept_word("false"))
                v.initial = 0;
            else
                p_.fail(p_.peek(), "expected 'true' or 'false' as initial value");
        } else {
            p_.fail(p_.peek(), "expected 'int[lo,hi]' or 'bool' after 'var'");
        }
        p_.expect(Tok::semicolon, "after variable declaration");
        v.span = p_.span_from(start);
        return v;
    }

    RawProcess process()
    {
        p_.advance();
        RawProcess proc;
        proc.name = name_token("as process name");
        p_.expect(Tok::lbrace, "to open process body");
        while (!p_.accept(Tok::rbrace)) {
            if (p_.at_word("init")) {
                const Token& kw = p_.advance();
                if (proc.init)
                    p_.fail(kw, "process '" + proc.name.text + "' declares 'init' twice");
                proc.init = name_token("as initial location");
                p_.expect(Tok::semicolon, "after 'init'");
            } else if (p_.accept_word("loc")) {
                do
                    proc.locations.push_back(name_token("as location name"));
                while (p_.accept(Tok::comma));
                p_.expect(Tok::semicolon, "after location list");
            } else if (p_.accept_word("trans")) {
                proc.transitions.push_back(transition());
            } else {
                p_.fail(p_.peek(), "expected 'init', 'loc', 'trans' or '}' in process body");
            }
        }
        if (!proc.init)
            p_.fail(proc.name, "process '" + proc.name.text + "' has no 'init' declaration");
        return proc;
    }

    RawTransition transition()
    {
        RawTransition t;
        t.source = name_token("as source location");
        p_.expect(Tok::arrow, "between source and target");
        t.target = name_token("as target location");
        if (p_.accept(Tok::semicolon))
            return t;
        p_.expect(Tok::lbrace, "or ';' after transition header");
        while (!p_.accept(Tok::rbrace)) {
            if (p_.at_word("guard")) {
                const Token& kw = p_.advance();
                if (t.guard)
                    p_.fail(kw, "transition declares 'guard' twice");
                t.guard = p_.parse_expr();
            } else if (p_.accept_word("update")) {
                do {
                    RawUpdate u{ name_token("as update target"), Expr{} };
                    p_.expect(Tok::assign, "in update");
                    u.value = p_.parse_expr();
                    t.updates.push_back(std::move(u));
                } while (p_.accept(Tok::comma));
            } else if (p_.at_word("label")) {
                const Token& kw = p_.advance();
                if (t.label)
                    p_.fail(kw, "transition declares 'label' twice");
                t.label = p_.expect(Tok::string, "after 'label'").text;
            } else {
                p_.fail(p_.peek(), "expected 'guard', 'update', 'label' or '}' in transition body");
            }
            p_.expect(Tok::semicolon, "after transition attribute");
        }
        return t;
    }

    Parser p_;
};

Model build(RawModel raw, std::vector<Diagnostic>& diags)
{
    Model m;
    m.name = raw.name.text;

    std::map<std::string, SourceSpan, std::less<>> names;
    const auto claim = [&](const std::string& name, const SourceSpan& span) {
        if (const auto it = names.find(name); it != names.end()) {
            diags.push_back(make_error(codes::duplicate_name,
                                       "duplicate name '" + name + "' (first declared at line "
                                           + std::to_string(it->second.line) + ")",
                                       span));
            return;
        }
        names.emplace(name, span);
    };

    for (auto& v : raw.vars) {
        claim(v.name, v.span);
        if (v.type == Type::integer) {
            if (v.lower > v.upper)
                diags.push_back(make_error(codes::bound,
                                           "empty range [" + std::to_string(v.lower) + ", "
                                               + std::to_string(v.upper) + "] for '" + v.name + "'",
                                           v.span));
            else if (v.initial < v.lower || v.initial > v.upper)
                diags.push_back(make_error(codes::bound,
                                           "initial value " + std::to_string(v.initial) + " of '" + v.name
                                               + "' is outside [" + std::to_string(v.lower) + ", "
                                               + std::to_string(v.upper) + "]",
                                           v.span));
        }
        m.vars.push_back(std::move(v));
    }

    // Locations first so that guards may name locations of any process.
    for (const auto& rp : raw.processes) {
        claim(rp.name.text, rp.name.span);
        Process proc;
        proc.name = rp.name.text;
        std::set<std::string, std::less<>> seen;
        for (const auto& l : rp.locations) {
            if (!seen.insert(l.text).second) {
                diags.push_back(make_error(codes::duplicate_name,
                                           "duplicate location '" + l.text + "' in process '" + proc.name + "'",
                                           l.span));
                continue;
            }
            proc.locations.push_back(l.text);
        }
        m.processes.push_back(std::move(proc));
    }
    if (m.processes.empty())
        diags.push_back(make_error(codes::syntax, "model '" + m.name + "' declares no process", raw.name.span));

    const auto location = [&](const Process& proc, const Token& t) -> std::optional<std::size_t> {
        const auto idx = proc.find_location(t.text);
        if (!idx)
            diags.push_back(make_error(codes::unknown_identifier,
                                       "unknown location '" + t.text + "' in process '" + proc.name + "'", t.span));
        return idx;
    };

    for (std::size_t pi = 0; pi < raw.processes.size(); ++pi) {
        auto& rp = raw.processes[pi];
        // Transitions are filled in a separate vector: `m` must stay readable
        // (for name resolution) while this process is being built.
        std::vector<Transition> transitions;
        const Process& proc = m.processes[pi];
        if (const auto init = location(proc, *rp.init))
            m.processes[pi].initial = *init;

        for (auto& rt : rp.transitions) {
            const auto src = location(proc, rt.source);
            const auto dst = location(proc, rt.target);
            Transition t;
            t.source = src.value_or(0);
            t.target = dst.value_or(0);
            t.label = rt.label.value_or(rt.source.text + "->" + rt.target.text);

            if (rt.guard) {
                t.guard = std::move(*rt.guard);
                const auto before = diags.size();
                resolve_names(t.guard, m, nullptr, diags);
                if (diags.size() == before) {
                    const auto type = infer_types(t.guard, m, diags);
                    if (type && *type != Type::boolean)
                        diags.push_back(make_error(codes::type,
                                                   "guard '" + to_string(t.guard) + "' must be bool, got int",
                                                   t.guard.span));
                }
            }

            std::set<std::size_t> assigned;
            for (auto& ru : rt.updates) {
                const auto var = m.find_var(ru.var.text);
                if (!var) {
                    diags.push_back(make_error(codes::unknown_identifier,
                                               "unknown identifier '" + ru.var.text + "'", ru.var.span));
                    continue;
                }
                if (!assigned.insert(*var).second)
                    diags.push_back(make_error(codes::duplicate_name,
                                               "variable '" + ru.var.text + "' is updated twice in one transition",
                                               ru.var.span));
                Update u{ *var, std::move(ru.value) };
                const auto before = diags.size();
                resolve_names(u.value, m, nullptr, diags);
                if (diags.size() == before) {
                    const auto want = m.vars[*var].type;
                    const auto type = infer_types(u.value, m, diags);
                    if (type && *type != want)
                        diags.push_back(make_error(codes::type,
                                                   "cannot assign " + std::string(type_name(*type)) + " to "
                                                       + std::string(type_name(want)) + " variable '"
                                                       + ru.var.text + "'",
                                                   u.value.span));
                }
                t.updates.push_back(std::move(u));
            }
            transitions.push_back(std::move(t));
        }
        m.processes[pi].transitions = std::move(transitions);
    }
    return m;
}

} // namespace

Result<Model> parse_model(std::string_view text)
{
    RawModel raw;
    try {
        raw = ModelParser(syntax::tokenize(text)).run();
    } catch (const syntax::SyntaxError& e) {
        return std::vector<Diagnostic>{ e.diagnostic };
    }
    std::vector<Diagnostic> diags;
    Model m = build(std::move(raw), diags);
    if (has_errors(diags))
        return diags;
    return Result<Model>(std::move(m), std::move(diags));
}

namespace {

std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (const char c : s) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            out += c;
        }
    }
    return out + '"';
}

} // namespace

std::string render_model(const Model& model)
{
    std::ostringstream out;
    out << "model " << model.name << "\n";
    if (!model.vars.empty())
        out << "\n";
    for (const auto& v : model.vars) {
        if (v.type == Type::boolean)
            out << "var bool " << v.name << " = " << (v.initial ? "true" : "false") << ";\n";
        else
            out << "var int[" << v.lower << "," << v.upper << "] " << v.name << " = " << v.initial << ";\n";
    }
    for (const auto& p : model.processes) {
        out << "\nprocess " << p.name << " {\n";
        out << "    init " << p.locations[p.initial] << ";\n";
        out << "    loc ";
        for (std::size_t i = 0; i < p.locations.size(); ++i)
            out << (i ? ", " : "") << p.locations[i];
        out << ";\n";
        for (const auto& t : p.transitions) {
            const auto& src = p.locations[t.source];
            const auto& dst = p.locations[t.target];
            out << "    trans " << src << " -> " << dst;
            const bool default_label = t.label == src + "->" + dst;
            if (t.guard.is_true_literal() && t.updates.empty() && default_label) {
                out << ";\n";
                continue;
            }
            out << " {\n";
            if (!t.guard.is_true_literal())
                out << "        guard " << to_string(t.guard) << ";\n";
            if (!t.updates.empty()) {
                out << "        update ";
                for (std::size_t i = 0; i < t.updates.size(); ++i)
                    out << (i ? ", " : "") << model.vars[t.updates[i].var].name << " = "
                        << to_string(t.updates[i].value);
                out << ";\n";
            }
            if (!default_label)
                out << "        label " << quote(t.label) << ";\n";
            out << "    }\n";
        }
        out << "}\n";
    }
    return out.str();
}

Result<Model> load_model_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::vector<Diagnostic>{ make_error(codes::io, "cannot open model file '" + path + "'") };
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

} // namespace mcfr
