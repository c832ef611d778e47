#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcfr {

// Half-open byte range [begin, end) plus the 1-based line/column of begin.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

enum class Severity { error, warning };

// Stable diagnostic codes. The string form is what appears inside
// `error[<code>]` when printed.
namespace codes {
inline constexpr std::string_view syntax = "syntax";
inline constexpr std::string_view unknown_identifier = "unknown-identifier";
inline constexpr std::string_view type = "type";
inline constexpr std::string_view duplicate_name = "duplicate-name";
inline constexpr std::string_view bound = "bound";
inline constexpr std::string_view nesting = "nesting";
inline constexpr std::string_view missing_field = "missing-field";
inline constexpr std::string_view bad_category = "bad-category";
inline constexpr std::string_view bad_value = "bad-value";
inline constexpr std::string_view spec_parse = "spec-parse";
inline constexpr std::string_view io = "io";
} // namespace codes

struct Diagnostic {
    Severity severity = Severity::error;
    std::string code;
    std::string message;
    SourceSpan span;

    [[nodiscard]] bool is_error() const { return severity == Severity::error; }
};

[[nodiscard]] inline Diagnostic make_error(std::string_view code, std::string message, SourceSpan span = {})
{
    return Diagnostic{ Severity::error, std::string(code), std::move(message), span };
}

// `file:line:col: error[code]: message`
[[nodiscard]] std::string format_diagnostic(const Diagnostic& d, std::string_view file);

[[nodiscard]] bool has_errors(const std::vector<Diagnostic>& diags);

// A value or the diagnostics explaining why there is none. Warnings may
// accompany a value; a Result without a value always holds at least one error.
template < typename T >
class Result {
public:
    Result(T value, std::vector<Diagnostic> warnings = {})
        : value_{ std::move(value) }, diags_{ std::move(warnings) }
    {
    }

    Result(std::vector<Diagnostic> diags) : diags_{ std::move(diags) } {}

    [[nodiscard]] bool ok() const { return value_.has_value(); }
    explicit operator bool() const { return ok(); }

    [[nodiscard]] const T& value() const& { return *value_; }
    [[nodiscard]] T& value() & { return *value_; }
    [[nodiscard]] T&& value() && { return std::move(*value_); }

    const T* operator->() const { return &*value_; }
    const T& operator*() const { return *value_; }

    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::optional<T> value_;
    std::vector<Diagnostic> diags_;
};

} // namespace mcfr
