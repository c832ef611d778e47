#include "mcfr/query.hpp"

#include "syntax.hpp"

#include <algorithm>

namespace mcfr {

std::string_view quantifier_symbol(Quantifier q)
{
    switch (q) {
    case Quantifier::exists_eventually:
        return "E<>";
    case Quantifier::forall_always:
        return "A[]";
    case Quantifier::exists_always:
        return "E[]";
    case Quantifier::forall_eventually:
        return "A<>";
    }
    return "?";
}

namespace {

std::optional<Quantifier> quantifier_from(std::string_view s)
{
    if (s == "E<>" || s == "EF")
        return Quantifier::exists_eventually;
    if (s == "A[]" || s == "AG")
        return Quantifier::forall_always;
    if (s == "E[]" || s == "EG")
        return Quantifier::exists_always;
    if (s == "A<>" || s == "AF")
        return Quantifier::forall_eventually;
    return std::nullopt;
}

} // namespace

Result<Query> parse_query(std::string_view text)
{
    try {
        syntax::Parser p(syntax::tokenize(text));
        const auto& head = p.peek();
        std::optional<Quantifier> q;
        if (head.kind == syntax::Tok::quantifier
            || (head.kind == syntax::Tok::ident && syntax::is_quantifier_keyword(head.text)))
            q = quantifier_from(head.text);
        if (!q)
            p.fail(head, "a query must start with one of E<>, A[], E[], A<> (or EF, AG, EG, AF)");
        p.advance();
        Query query{ *q, p.parse_expr() };
        if (!p.at(syntax::Tok::end))
            p.fail(p.peek(), "unexpected trailing input after the query predicate");
        return query;
    } catch (const syntax::SyntaxError& e) {
        return std::vector<Diagnostic>{ e.diagnostic };
    }
}

Result<BoundQuery> bind_query(const Query& query, const Model& model, const AliasMap& aliases)
{
    BoundQuery bound{ query, {} };
    for_each_leaf(query.predicate, [&](const Expr& leaf) {
        const auto known = std::find_if(bound.bindings.begin(), bound.bindings.end(),
                                        [&](const auto& b) { return b.first == leaf.name; });
        if (known == bound.bindings.end())
            bound.bindings.emplace_back(leaf.name, std::string{});
    });

    std::vector<Diagnostic> diags;
    resolve_names(bound.query.predicate, model, &aliases, diags);
    if (has_errors(diags))
        return diags;
    const auto type = infer_types(bound.query.predicate, model, diags);
    if (has_errors(diags))
        return diags;
    if (type != Type::boolean)
        return std::vector<Diagnostic>{ make_error(codes::type,
                                                   "query predicate '" + to_string(query.predicate)
                                                       + "' must be bool, got int",
                                                   query.predicate.span) };

    // Fill the resolved names: walk the original and bound trees in lockstep.
    std::vector<std::string> originals;
    std::vector<std::string> resolved;
    for_each_leaf(query.predicate, [&](const Expr& e) { originals.push_back(e.name); });
    for_each_leaf(bound.query.predicate, [&](const Expr& e) { resolved.push_back(e.name); });
    for (auto& [source, target] : bound.bindings) {
        const auto i = static_cast<std::size_t>(std::find(originals.begin(), originals.end(), source)
                                                - originals.begin());
        target = resolved[i];
    }
    return bound;
}

Result<BoundQuery> compile_query(std::string_view text, const Model& model, const AliasMap& aliases)
{
    auto parsed = parse_query(text);
    if (!parsed)
        return parsed.diagnostics();
    return bind_query(parsed.value(), model, aliases);
}

std::string to_string(const Query& q)
{
    std::string out(quantifier_symbol(q.quantifier));
    out += ' ';
    const auto& p = q.predicate;
    const bool atomic = precedence(p.op) >= 9;
    if (atomic)
        out += to_string(p);
    else
        out += '(' + to_string(p) + ')';
    return out;
}

} // namespace mcfr
