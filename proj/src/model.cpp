#include "mcfr/model.hpp"

#include "mcfr/binder.hpp"

#include <cassert>
#include <cstring>
#include <set>

namespace mcfr {

std::optional<std::size_t> Process::find_location(std::string_view loc) const
{
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (locations[i] == loc)
            return i;
    return std::nullopt;
}

std::optional<std::size_t> Model::find_var(std::string_view var) const
{
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == var)
            return i;
    return std::nullopt;
}

std::optional<std::size_t> Model::find_process(std::string_view proc) const
{
    for (std::size_t i = 0; i < processes.size(); ++i)
        if (processes[i].name == proc)
            return i;
    return std::nullopt;
}

RangeViolation::RangeViolation(std::string variable, std::int64_t value)
    : std::runtime_error("update assigns " + std::to_string(value) + " to '" + variable
                         + "', outside its declared range"),
      variable_{ std::move(variable) }, value_{ value }
{
}

namespace {

void check_resolved(const Expr& e, const Model& model, std::vector<Diagnostic>& diags)
{
    switch (e.op) {
    case Op::ident:
        diags.push_back(make_error(codes::unknown_identifier, "unresolved identifier '" + e.name + "'", e.span));
        return;
    case Op::var_ref:
        if (e.value < 0 || static_cast<std::size_t>(e.value) >= model.vars.size())
            diags.push_back(make_error(codes::unknown_identifier, "variable reference out of range", e.span));
        return;
    case Op::loc_atom: {
        if (e.value < 0 || static_cast<std::size_t>(e.value) >= model.processes.size()) {
            diags.push_back(make_error(codes::unknown_identifier, "process reference out of range", e.span));
            return;
        }
        const auto& proc = model.processes[static_cast<std::size_t>(e.value)];
        if (e.location < 0 || static_cast<std::size_t>(e.location) >= proc.locations.size())
            diags.push_back(make_error(codes::unknown_identifier, "location reference out of range", e.span));
        return;
    }
    default:
        for (const auto& a : e.args)
            check_resolved(a, model, diags);
    }
}

void check_expr(const Expr& e, const Model& model, Type expected, std::string_view what,
                std::vector<Diagnostic>& diags)
{
    const auto before = diags.size();
    check_resolved(e, model, diags);
    if (diags.size() != before)
        return;
    Expr copy = e;
    const auto t = infer_types(copy, model, diags);
    if (t && *t != expected)
        diags.push_back(make_error(codes::type,
                                   std::string(what) + " must be " + std::string(type_name(expected)) + " but is "
                                       + std::string(type_name(*t)),
                                   e.span));
}

} // namespace

std::vector<Diagnostic> validate_model(const Model& model)
{
    std::vector<Diagnostic> diags;
    if (model.processes.empty())
        diags.push_back(make_error(codes::syntax, "model '" + model.name + "' declares no process"));

    std::set<std::string, std::less<>> names;
    for (const auto& v : model.vars) {
        if (!names.insert(v.name).second)
            diags.push_back(make_error(codes::duplicate_name, "duplicate name '" + v.name + "'", v.span));
        if (v.type == Type::boolean) {
            if (v.lower != 0 || v.upper != 1 || (v.initial != 0 && v.initial != 1))
                diags.push_back(make_error(codes::bound, "boolean '" + v.name + "' must range over {0, 1}", v.span));
        } else if (v.lower > v.upper) {
            diags.push_back(make_error(codes::bound, "empty range for '" + v.name + "'", v.span));
        } else if (v.initial < v.lower || v.initial > v.upper) {
            diags.push_back(make_error(codes::bound,
                                       "initial value " + std::to_string(v.initial) + " of '" + v.name
                                           + "' is outside [" + std::to_string(v.lower) + ", "
                                           + std::to_string(v.upper) + "]",
                                       v.span));
        }
    }
    for (const auto& p : model.processes) {
        if (!names.insert(p.name).second)
            diags.push_back(make_error(codes::duplicate_name, "duplicate name '" + p.name + "'"));
        if (p.locations.empty()) {
            diags.push_back(make_error(codes::syntax, "process '" + p.name + "' declares no location"));
            continue;
        }
        std::set<std::string, std::less<>> locs;
        for (const auto& l : p.locations)
            if (!locs.insert(l).second)
                diags.push_back(make_error(codes::duplicate_name,
                                           "duplicate location '" + l + "' in process '" + p.name + "'"));
        if (p.initial >= p.locations.size())
            diags.push_back(make_error(codes::unknown_identifier, "initial location of '" + p.name + "' is undeclared"));
        for (const auto& t : p.transitions) {
            if (t.source >= p.locations.size() || t.target >= p.locations.size()) {
                diags.push_back(make_error(codes::unknown_identifier,
                                           "transition '" + t.label + "' references an undeclared location"));
                continue;
            }
            check_expr(t.guard, model, Type::boolean, "guard of '" + t.label + "'", diags);
            std::set<std::size_t> assigned;
            for (const auto& u : t.updates) {
                if (u.var >= model.vars.size()) {
                    diags.push_back(make_error(codes::unknown_identifier, "update of undeclared variable"));
                    continue;
                }
                const auto& decl = model.vars[u.var];
                if (!assigned.insert(u.var).second)
                    diags.push_back(make_error(codes::duplicate_name,
                                               "variable '" + decl.name + "' updated twice in '" + t.label + "'",
                                               u.value.span));
                check_expr(u.value, model, decl.type, "update of '" + decl.name + "'", diags);
            }
        }
    }
    return diags;
}

State initial_state(const Model& model)
{
    State s;
    s.locs.reserve(model.processes.size());
    for (const auto& p : model.processes)
        s.locs.push_back(static_cast<std::int32_t>(p.initial));
    s.values.reserve(model.vars.size());
    for (const auto& v : model.vars)
        s.values.push_back(v.initial);
    return s;
}

std::int64_t evaluate(const Expr& e, const State& s)
{
    const auto wrap = [](std::uint64_t v) { return static_cast<std::int64_t>(v); };
    switch (e.op) {
    case Op::int_lit:
    case Op::bool_lit:
        return e.value;
    case Op::var_ref:
        return s.values[static_cast<std::size_t>(e.value)];
    case Op::loc_atom:
        return s.locs[static_cast<std::size_t>(e.value)] == e.location ? 1 : 0;
    case Op::logical_not:
        return evaluate(e.args[0], s) == 0 ? 1 : 0;
    case Op::logical_and:
        return (evaluate(e.args[0], s) != 0 && evaluate(e.args[1], s) != 0) ? 1 : 0;
    case Op::logical_or:
        return (evaluate(e.args[0], s) != 0 || evaluate(e.args[1], s) != 0) ? 1 : 0;
    case Op::imply:
        return (evaluate(e.args[0], s) == 0 || evaluate(e.args[1], s) != 0) ? 1 : 0;
    default:
        break;
    }
    const std::int64_t a = evaluate(e.args[0], s);
    const std::int64_t b = evaluate(e.args[1], s);
    switch (e.op) {
    case Op::eq:
        return a == b;
    case Op::ne:
        return a != b;
    case Op::lt:
        return a < b;
    case Op::le:
        return a <= b;
    case Op::gt:
        return a > b;
    case Op::ge:
        return a >= b;
    case Op::add:
        return wrap(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
    case Op::sub:
        return wrap(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
    case Op::mul:
        return wrap(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
    default:
        assert(false && "unbound expression");
        return 0;
    }
}

Value eval_expr(const Expr& expr, const State& state, const Model& /*model*/)
{
    const auto raw = evaluate(expr, state);
    if (expr.type == Type::boolean)
        return raw != 0;
    return raw;
}

std::vector<TransitionRef> enabled_transitions(const Model& model, const State& state)
{
    std::vector<TransitionRef> out;
    for (std::size_t p = 0; p < model.processes.size(); ++p) {
        const auto& proc = model.processes[p];
        const auto here = static_cast<std::size_t>(state.locs[p]);
        for (std::size_t i = 0; i < proc.transitions.size(); ++i) {
            const auto& t = proc.transitions[i];
            if (t.source == here && holds(t.guard, state))
                out.push_back({ p, i });
        }
    }
    return out;
}

const Transition& transition_at(const Model& model, TransitionRef t)
{
    return model.processes.at(t.process).transitions.at(t.index);
}

State apply_transition(const Model& model, const State& state, TransitionRef ref)
{
    const auto& t = transition_at(model, ref);
    State next = state;
    next.locs[ref.process] = static_cast<std::int32_t>(t.target);
    for (const auto& u : t.updates) {
        const auto v = evaluate(u.value, state);
        const auto& decl = model.vars[u.var];
        if (v < decl.lower || v > decl.upper)
            throw RangeViolation(decl.name, v);
        next.values[u.var] = v;
    }
    return next;
}

std::string describe_state(const Model& model, const State& state)
{
    std::string out;
    for (std::size_t p = 0; p < model.processes.size(); ++p) {
        if (p)
            out += ", ";
        out += model.processes[p].name + "@" + model.processes[p].locations[static_cast<std::size_t>(state.locs[p])];
    }
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        out += ", " + model.vars[i].name + "=";
        if (model.vars[i].type == Type::boolean)
            out += state.values[i] ? "true" : "false";
        else
            out += std::to_string(state.values[i]);
    }
    return out;
}

namespace {

std::uint8_t width_for(std::uint64_t span)
{
    if (span <= 0xFFu)
        return 1;
    if (span <= 0xFFFFu)
        return 2;
    if (span <= 0xFFFFFFFFu)
        return 4;
    return 8;
}

} // namespace

StateCodec::StateCodec(const Model& model)
{
    for (const auto& p : model.processes) {
        loc_slots_.push_back({ 0, width_for(p.locations.empty() ? 0 : p.locations.size() - 1) });
        key_size_ += loc_slots_.back().width;
    }
    for (const auto& v : model.vars) {
        const auto span = static_cast<std::uint64_t>(v.upper) - static_cast<std::uint64_t>(v.lower);
        var_slots_.push_back({ v.lower, width_for(span) });
        key_size_ += var_slots_.back().width;
    }
}

void StateCodec::encode(const State& state, char* out) const
{
    const auto put = [&out](std::uint64_t v, std::uint8_t width) {
        for (std::uint8_t b = 0; b < width; ++b) {
            *out++ = static_cast<char>(v & 0xFFu);
            v >>= 8;
        }
    };
    for (std::size_t i = 0; i < loc_slots_.size(); ++i)
        put(static_cast<std::uint64_t>(state.locs[i]), loc_slots_[i].width);
    for (std::size_t i = 0; i < var_slots_.size(); ++i)
        put(static_cast<std::uint64_t>(state.values[i]) - static_cast<std::uint64_t>(var_slots_[i].lower),
            var_slots_[i].width);
}

std::string StateCodec::encode(const State& state) const
{
    std::string key(key_size_, '\0');
    encode(state, key.data());
    return key;
}

State StateCodec::decode(std::string_view key) const
{
    assert(key.size() == key_size_);
    const auto* in = reinterpret_cast<const unsigned char*>(key.data());
    const auto get = [&in](std::uint8_t width) {
        std::uint64_t v = 0;
        for (std::uint8_t b = 0; b < width; ++b)
            v |= static_cast<std::uint64_t>(*in++) << (8 * b);
        return v;
    };
    State s;
    s.locs.reserve(loc_slots_.size());
    for (const auto& slot : loc_slots_)
        s.locs.push_back(static_cast<std::int32_t>(get(slot.width)));
    s.values.reserve(var_slots_.size());
    for (const auto& slot : var_slots_)
        s.values.push_back(static_cast<std::int64_t>(get(slot.width) + static_cast<std::uint64_t>(slot.lower)));
    return s;
}

std::string canonical_key(const Model& model, const State& state)
{
    return StateCodec(model).encode(state);
}

} // namespace mcfr
