#pragma once

#include "mcfr/diagnostic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcfr {

enum class Type { integer, boolean };

[[nodiscard]] std::string_view type_name(Type t);

enum class Op {
    int_lit,
    bool_lit,
    ident,    // unresolved name, only present before binding
    var_ref,  // value = variable index
    loc_atom, // value = process index, location = location index
    logical_not,
    logical_and,
    logical_or,
    imply,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    add,
    sub,
    mul,
};

[[nodiscard]] bool is_binary(Op op);

// Expression tree shared by model guards/updates and query predicates.
//
// `name` keeps the source spelling of identifiers; after binding it holds the
// resolved model name (`time`, `Student.Graduated`) so that printing a bound
// expression yields text that binds again without aliases.
struct Expr {
    Op op = Op::bool_lit;
    Type type = Type::boolean;
    std::int64_t value = 0;
    std::int32_t location = -1;
    std::string name;
    std::vector<Expr> args;
    SourceSpan span;

    [[nodiscard]] static Expr int_literal(std::int64_t v);
    [[nodiscard]] static Expr bool_literal(bool v);
    [[nodiscard]] static Expr identifier(std::string name);
    [[nodiscard]] static Expr unary(Op op, Expr operand);
    [[nodiscard]] static Expr binary(Op op, Expr lhs, Expr rhs);

    [[nodiscard]] bool is_true_literal() const { return op == Op::bool_lit && value != 0; }

    // Structural equality; spans are ignored.
    friend bool operator==(const Expr& a, const Expr& b);
};

// Binding strength used by parser and printer, higher binds tighter.
[[nodiscard]] int precedence(Op op);

[[nodiscard]] std::string_view op_symbol(Op op);

// Canonical text with the minimum parentheses needed to re-parse to the
// same tree.
[[nodiscard]] std::string to_string(const Expr& e);

// Visits every identifier-like leaf (ident, var_ref, loc_atom).
template < typename F >
void for_each_leaf(const Expr& e, F&& f)
{
    if (e.op == Op::ident || e.op == Op::var_ref || e.op == Op::loc_atom)
        f(e);
    for (const auto& a : e.args)
        for_each_leaf(a, f);
}

} // namespace mcfr
