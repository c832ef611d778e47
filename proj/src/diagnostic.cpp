#include "mcfr/diagnostic.hpp"

#include <algorithm>

namespace mcfr {

std::string format_diagnostic(const Diagnostic& d, std::string_view file)
{
    std::string out(file);
    out += ':' + std::to_string(d.span.line) + ':' + std::to_string(d.span.column) + ": ";
    out += d.severity == Severity::error ? "error" : "warning";
    out += '[' + d.code + "]: " + d.message;
    return out;
}

bool has_errors(const std::vector<Diagnostic>& diags)
{
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.is_error(); });
}

} // namespace mcfr
