#include "mcfr/binder.hpp"

namespace mcfr {

namespace {

// `Process.Location` split at the first dot.
bool try_location_atom(Expr& e, std::string_view text, const Model& model)
{
    const auto dot = text.find('.');
    if (dot == std::string_view::npos)
        return false;
    const auto proc = model.find_process(text.substr(0, dot));
    if (!proc)
        return false;
    const auto loc = model.processes[*proc].find_location(text.substr(dot + 1));
    if (!loc)
        return false;
    e.op = Op::loc_atom;
    e.type = Type::boolean;
    e.value = static_cast<std::int64_t>(*proc);
    e.location = static_cast<std::int32_t>(*loc);
    e.name = std::string(text);
    return true;
}

bool try_variable(Expr& e, std::string_view text, const Model& model)
{
    const auto var = model.find_var(text);
    if (!var)
        return false;
    e.op = Op::var_ref;
    e.type = model.vars[*var].type;
    e.value = static_cast<std::int64_t>(*var);
    e.name = std::string(text);
    return true;
}

} // namespace

void resolve_names(Expr& e, const Model& model, const AliasMap* aliases, std::vector<Diagnostic>& diags)
{
    if (e.op != Op::ident) {
        for (auto& a : e.args)
            resolve_names(a, model, aliases, diags);
        return;
    }
    std::string_view text = e.name;
    if (aliases) {
        if (const auto it = aliases->find(text); it != aliases->end())
            text = it->second;
    }
    const std::string target(text); // e.name is overwritten on success
    if (try_location_atom(e, target, model) || try_variable(e, target, model))
        return;
    std::string msg = "unknown identifier '" + e.name + "'";
    if (target != e.name)
        msg += " (alias target '" + target + "' is not declared)";
    diags.push_back(make_error(codes::unknown_identifier, std::move(msg), e.span));
}

std::optional<Type> infer_types(Expr& e, const Model& model, std::vector<Diagnostic>& diags)
{
    const auto expect = [&diags](const Expr& operand, Type got, Type want, Op op) {
        if (got == want)
            return true;
        diags.push_back(make_error(codes::type,
                                   "operand of '" + std::string(op_symbol(op)) + "' must be "
                                       + std::string(type_name(want)) + ", got " + std::string(type_name(got))
                                       + " in '" + to_string(operand) + "'",
                                   operand.span));
        return false;
    };

    switch (e.op) {
    case Op::int_lit:
        e.type = Type::integer;
        return e.type;
    case Op::bool_lit:
        e.type = Type::boolean;
        return e.type;
    case Op::var_ref:
        e.type = model.vars.at(static_cast<std::size_t>(e.value)).type;
        return e.type;
    case Op::loc_atom:
        e.type = Type::boolean;
        return e.type;
    case Op::ident:
        return std::nullopt;
    case Op::logical_not: {
        const auto t = infer_types(e.args[0], model, diags);
        if (!t || !expect(e.args[0], *t, Type::boolean, e.op))
            return std::nullopt;
        e.type = Type::boolean;
        return e.type;
    }
    default:
        break;
    }

    const auto lt = infer_types(e.args[0], model, diags);
    const auto rt = infer_types(e.args[1], model, diags);
    if (!lt || !rt)
        return std::nullopt;

    switch (e.op) {
    case Op::logical_and:
    case Op::logical_or:
    case Op::imply: {
        const bool l = expect(e.args[0], *lt, Type::boolean, e.op);
        const bool r = expect(e.args[1], *rt, Type::boolean, e.op);
        if (!l || !r)
            return std::nullopt;
        e.type = Type::boolean;
        return e.type;
    }
    case Op::eq:
    case Op::ne:
        // Equality compares two integers or two booleans.
        if (*lt != *rt) {
            diags.push_back(make_error(codes::type,
                                       "cannot compare " + std::string(type_name(*lt)) + " with "
                                           + std::string(type_name(*rt)) + " in '" + to_string(e) + "'",
                                       e.span));
            return std::nullopt;
        }
        e.type = Type::boolean;
        return e.type;
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge: {
        const bool l = expect(e.args[0], *lt, Type::integer, e.op);
        const bool r = expect(e.args[1], *rt, Type::integer, e.op);
        if (!l || !r)
            return std::nullopt;
        e.type = Type::boolean;
        return e.type;
    }
    default: {
        const bool l = expect(e.args[0], *lt, Type::integer, e.op);
        const bool r = expect(e.args[1], *rt, Type::integer, e.op);
        if (!l || !r)
            return std::nullopt;
        e.type = Type::integer;
        return e.type;
    }
    }
}

} // namespace mcfr
