#pragma once

// Reference implementations used only by the tests. They share the parser
// and AST with the library but nothing else: evaluation, successor
// generation, state storage and the fixpoints are written independently and
// deliberately naively.

#include "mcfr/model.hpp"
#include "mcfr/query.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mcfr::oracle {

struct OState {
    std::vector<std::int64_t> locs;
    std::vector<std::int64_t> vals;
    auto operator<=>(const OState&) const = default;
};

OState from_state(const State& s);

std::int64_t eval(const Expr& e, const OState& s);

struct RangeError {
    std::string var;
};

// Throws RangeError when a successor leaves a declared range.
std::vector<OState> successors(const Model& m, const OState& s);

struct Graph {
    std::vector<OState> states; // states[0] is initial
    std::map<OState, std::size_t> index;
    std::vector<std::vector<std::size_t>> succ;
};

// Depth-first enumeration of every reachable state.
Graph enumerate(const Model& m);

bool exists_eventually(const Graph& g, const Expr& p);
bool forall_always(const Graph& g, const Expr& p);
// Greatest fixpoint: a state stays while p holds and it either has no
// successor or keeps one.
std::vector<bool> globally_set(const Graph& g, const Expr& p);
bool exists_always(const Graph& g, const Expr& p);
bool forall_eventually(const Graph& g, const Expr& p);
bool holds(const Graph& g, const BoundQuery& q);

// Breadth-first distance from the initial state (SIZE_MAX if unreachable).
std::vector<std::size_t> distances(const Graph& g);

// Is `to` a successor of `from` under the oracle semantics?
bool is_step(const Model& m, const OState& from, const OState& to);

// Random models in DSL text, each with at most a few thousand states.
std::string random_model_text(std::mt19937_64& rng, int serial);

// A random boolean predicate over the model's names, as query text.
std::string random_predicate(std::mt19937_64& rng, const Model& m, int depth = 3);

Expr negate(const Expr& e);

} // namespace mcfr::oracle
