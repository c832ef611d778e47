#pragma once

#include "mcfr/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mcfr {

// Dataset-level spellings mapped to model names. Targets are variable names
// or `Process.Location` atoms.
using AliasMap = std::map<std::string, std::string, std::less<>>;

// Resolves every `ident` leaf of `e` in place. Lookup order: alias map (when
// given), `Process.Location` atoms, model variables. Unresolvable names are
// reported as unknown-identifier, one diagnostic per occurrence, quoting the
// identifier verbatim.
void resolve_names(Expr& e, const Model& model, const AliasMap* aliases, std::vector<Diagnostic>& diags);

// Computes and stores the type of every node of a resolved expression.
// Returns nullopt (and appends type diagnostics) when ill-typed.
std::optional<Type> infer_types(Expr& e, const Model& model, std::vector<Diagnostic>& diags);

} // namespace mcfr
