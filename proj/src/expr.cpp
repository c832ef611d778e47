#include "mcfr/expr.hpp"

#include <cassert>

namespace mcfr {

std::string_view type_name(Type t)
{
    return t == Type::integer ? "int" : "bool";
}

bool is_binary(Op op)
{
    switch (op) {
    case Op::logical_and:
    case Op::logical_or:
    case Op::imply:
    case Op::eq:
    case Op::ne:
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge:
    case Op::add:
    case Op::sub:
    case Op::mul:
        return true;
    default:
        return false;
    }
}

Expr Expr::int_literal(std::int64_t v)
{
    Expr e;
    e.op = Op::int_lit;
    e.type = Type::integer;
    e.value = v;
    return e;
}

Expr Expr::bool_literal(bool v)
{
    Expr e;
    e.op = Op::bool_lit;
    e.type = Type::boolean;
    e.value = v ? 1 : 0;
    return e;
}

Expr Expr::identifier(std::string name)
{
    Expr e;
    e.op = Op::ident;
    e.name = std::move(name);
    return e;
}

Expr Expr::unary(Op op, Expr operand)
{
    Expr e;
    e.op = op;
    e.type = Type::boolean;
    e.args.push_back(std::move(operand));
    return e;
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs)
{
    Expr e;
    e.op = op;
    e.type = (op == Op::add || op == Op::sub || op == Op::mul) ? Type::integer : Type::boolean;
    e.args.reserve(2);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.op != b.op || a.args.size() != b.args.size())
        return false;
    switch (a.op) {
    case Op::int_lit:
    case Op::bool_lit:
        if (a.value != b.value)
            return false;
        break;
    case Op::ident:
        if (a.name != b.name)
            return false;
        break;
    case Op::var_ref:
        if (a.value != b.value)
            return false;
        break;
    case Op::loc_atom:
        if (a.value != b.value || a.location != b.location)
            return false;
        break;
    default:
        break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!(a.args[i] == b.args[i]))
            return false;
    return true;
}

int precedence(Op op)
{
    switch (op) {
    case Op::imply:
        return 1;
    case Op::logical_or:
        return 2;
    case Op::logical_and:
        return 3;
    case Op::eq:
    case Op::ne:
        return 4;
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge:
        return 5;
    case Op::add:
    case Op::sub:
        return 6;
    case Op::mul:
        return 7;
    case Op::logical_not:
        return 8;
    default:
        return 9;
    }
}

std::string_view op_symbol(Op op)
{
    switch (op) {
    case Op::logical_not:
        return "!";
    case Op::logical_and:
        return "&&";
    case Op::logical_or:
        return "||";
    case Op::imply:
        return "imply";
    case Op::eq:
        return "==";
    case Op::ne:
        return "!=";
    case Op::lt:
        return "<";
    case Op::le:
        return "<=";
    case Op::gt:
        return ">";
    case Op::ge:
        return ">=";
    case Op::add:
        return "+";
    case Op::sub:
        return "-";
    case Op::mul:
        return "*";
    default:
        return "";
    }
}

namespace {

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, int min_prec, std::string& out)
{
    if (precedence(child.op) < min_prec) {
        out += '(';
        print(child, out);
        out += ')';
    } else {
        print(child, out);
    }
}

void print(const Expr& e, std::string& out)
{
    switch (e.op) {
    case Op::int_lit:
        out += std::to_string(e.value);
        return;
    case Op::bool_lit:
        out += e.value ? "true" : "false";
        return;
    case Op::ident:
    case Op::var_ref:
    case Op::loc_atom:
        out += e.name;
        return;
    case Op::logical_not:
        out += '!';
        print_child(e.args[0], precedence(Op::logical_not), out);
        return;
    default:
        break;
    }
    assert(is_binary(e.op));
    const int p = precedence(e.op);
    // imply is right-associative, everything else left-associative. && and ||
    // operands of imply are bracketed even where precedence allows omitting
    // them; `a && b imply c` reads ambiguously.
    const bool right_assoc = e.op == Op::imply;
    const int connective = precedence(Op::logical_and) + 1;
    const int lhs = right_assoc ? connective : p;
    const int rhs = right_assoc ? (e.args[1].op == Op::imply ? p : connective) : p + 1;
    print_child(e.args[0], lhs, out);
    out += ' ';
    out += op_symbol(e.op);
    out += ' ';
    print_child(e.args[1], rhs, out);
}

} // namespace

std::string to_string(const Expr& e)
{
    std::string out;
    print(e, out);
    return out;
}

} // namespace mcfr
