#pragma once

#include "mcfr/expr.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mcfr {

struct VarDecl {
    std::string name;
    Type type = Type::integer;
    std::int64_t lower = 0; // booleans use [0, 1]
    std::int64_t upper = 1;
    std::int64_t initial = 0;
    SourceSpan span;

    friend bool operator==(const VarDecl& a, const VarDecl& b)
    {
        return a.name == b.name && a.type == b.type && a.lower == b.lower && a.upper == b.upper
               && a.initial == b.initial;
    }
};

struct Update {
    std::size_t var = 0;
    Expr value;

    friend bool operator==(const Update&, const Update&) = default;
};

struct Transition {
    std::size_t source = 0;
    std::size_t target = 0;
    Expr guard = Expr::bool_literal(true);
    std::vector<Update> updates;
    std::string label;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct Process {
    std::string name;
    std::vector<std::string> locations;
    std::size_t initial = 0;
    std::vector<Transition> transitions;

    [[nodiscard]] std::optional<std::size_t> find_location(std::string_view loc) const;

    friend bool operator==(const Process&, const Process&) = default;
};

// A network of processes over shared bounded variables. Processes compose by
// interleaving: each step fires one enabled transition of one process.
struct Model {
    std::string name;
    std::vector<VarDecl> vars;
    std::vector<Process> processes;

    [[nodiscard]] std::optional<std::size_t> find_var(std::string_view var) const;
    [[nodiscard]] std::optional<std::size_t> find_process(std::string_view proc) const;

    friend bool operator==(const Model& a, const Model& b)
    {
        return a.name == b.name && a.vars == b.vars && a.processes == b.processes;
    }
};

// Checks every structural invariant of a Model (bounds, unique names,
// resolved and well-typed expressions, one update per variable per
// transition). Returns the violations found, empty when valid.
[[nodiscard]] std::vector<Diagnostic> validate_model(const Model& model);

struct State {
    std::vector<std::int32_t> locs;
    std::vector<std::int64_t> values; // booleans are 0/1

    friend bool operator==(const State&, const State&) = default;
};

struct TransitionRef {
    std::size_t process = 0;
    std::size_t index = 0;

    friend bool operator==(const TransitionRef&, const TransitionRef&) = default;
};

// Raised when an update would leave a variable's declared range.
class RangeViolation : public std::runtime_error {
public:
    RangeViolation(std::string variable, std::int64_t value);

    [[nodiscard]] const std::string& variable() const { return variable_; }
    [[nodiscard]] std::int64_t value() const { return value_; }

private:
    std::string variable_;
    std::int64_t value_;
};

using Value = std::variant<std::int64_t, bool>;

[[nodiscard]] State initial_state(const Model& model);

[[nodiscard]] Value eval_expr(const Expr& expr, const State& state, const Model& model);

// Raw evaluation: booleans come back as 0/1. Integer arithmetic wraps on
// 64-bit overflow, which keeps evaluation total.
[[nodiscard]] std::int64_t evaluate(const Expr& expr, const State& state);

[[nodiscard]] inline bool holds(const Expr& expr, const State& state) { return evaluate(expr, state) != 0; }

[[nodiscard]] std::vector<TransitionRef> enabled_transitions(const Model& model, const State& state);

// Updates read the pre-state (simultaneous assignment).
[[nodiscard]] State apply_transition(const Model& model, const State& state, TransitionRef t);

[[nodiscard]] const Transition& transition_at(const Model& model, TransitionRef t);

// `Student@Year1, time=0, ...`, mainly for diagnostics and tests.
[[nodiscard]] std::string describe_state(const Model& model, const State& state);

// Fixed-width canonical byte encoding of states of one model. Each slot is
// stored as (value - lower) little-endian in the fewest of 1/2/4/8 bytes that
// cover its declared range, so equal states have equal keys and vice versa.
class StateCodec {
public:
    explicit StateCodec(const Model& model);

    [[nodiscard]] std::size_t key_size() const { return key_size_; }

    void encode(const State& state, char* out) const;
    [[nodiscard]] std::string encode(const State& state) const;
    [[nodiscard]] State decode(std::string_view key) const;

private:
    struct Slot {
        std::int64_t lower;
        std::uint8_t width;
    };

    std::vector<Slot> loc_slots_;
    std::vector<Slot> var_slots_;
    std::size_t key_size_ = 0;
};

[[nodiscard]] std::string canonical_key(const Model& model, const State& state);

} // namespace mcfr
