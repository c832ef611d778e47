#pragma once

#include "mcfr/binder.hpp"
#include "mcfr/diagnostic.hpp"
#include "mcfr/expr.hpp"
#include "mcfr/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mcfr {

// The four top-level forms of the UPPAAL query language.
enum class Quantifier {
    exists_eventually, // E<>  (EF)
    forall_always,     // A[]  (AG)
    exists_always,     // E[]  (EG)
    forall_eventually, // A<>  (AF)
};

[[nodiscard]] std::string_view quantifier_symbol(Quantifier q);

struct Query {
    Quantifier quantifier = Quantifier::exists_eventually;
    Expr predicate;

    friend bool operator==(const Query&, const Query&) = default;
};

// A query whose every identifier is resolved against one model and whose
// predicate is boolean-typed.
struct BoundQuery {
    Query query;
    // Source spelling -> resolved model name, one entry per distinct
    // identifier, in first-occurrence order.
    std::vector<std::pair<std::string, std::string>> bindings;

    [[nodiscard]] Quantifier quantifier() const { return query.quantifier; }
    [[nodiscard]] const Expr& predicate() const { return query.predicate; }
};

// Accepts `E<> p`, `A[] p`, `E[] p`, `A<> p` and the textual forms
// `EF`/`AG`/`EG`/`AF`. A quantifier inside the predicate is a nesting error.
[[nodiscard]] Result<Query> parse_query(std::string_view text);

[[nodiscard]] Result<BoundQuery> bind_query(const Query& query, const Model& model, const AliasMap& aliases = {});

// parse_query + bind_query.
[[nodiscard]] Result<BoundQuery> compile_query(std::string_view text, const Model& model,
                                               const AliasMap& aliases = {});

// UPPAAL-style canonical text: `E<> (a && b)`, `A[] true`.
[[nodiscard]] std::string to_string(const Query& q);
[[nodiscard]] inline std::string to_string(const BoundQuery& q) { return to_string(q.query); }

} // namespace mcfr
