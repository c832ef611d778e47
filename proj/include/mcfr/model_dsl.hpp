#pragma once

#include "mcfr/diagnostic.hpp"
#include "mcfr/model.hpp"

#include <string>
#include <string_view>

namespace mcfr {

// Parses the `.mcm` model format (see docs/dsl.md). On success every
// invariant checked by validate_model() holds. Parsing stops at the first
// syntax error; name and type errors are collected across the whole file.
[[nodiscard]] Result<Model> parse_model(std::string_view text);

// Canonical text for a model. Deterministic, keeps declaration order, and
// re-parses to a structurally equal Model.
[[nodiscard]] std::string render_model(const Model& model);

// Reads and parses a file; I/O failures become an `io` diagnostic.
[[nodiscard]] Result<Model> load_model_file(const std::string& path);

} // namespace mcfr
