#pragma once

// Lexer and expression parser shared by the model DSL and the query
// language. Private to the library.

#include "mcfr/diagnostic.hpp"
#include "mcfr/expr.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcfr::syntax {

enum class Tok {
    ident,
    integer,
    string,
    quantifier, // E<> A[] E[] A<>
    lparen,
    rparen,
    lbrace,
    rbrace,
    lbracket,
    rbracket,
    comma,
    semicolon,
    dot,
    assign,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    plus,
    minus,
    star,
    bang,
    and_and,
    or_or,
    arrow,
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text; // identifier spelling, string contents, quantifier symbol
    std::int64_t number = 0;
    SourceSpan span;
};

// Thrown internally to abort parsing at the first syntax error.
struct SyntaxError : std::runtime_error {
    Diagnostic diagnostic;
    explicit SyntaxError(Diagnostic d) : std::runtime_error(d.message), diagnostic(std::move(d)) {}
};

// Tokenizes the whole input. Bracketed atoms such as `completed[prereq]` are
// folded into a single identifier token with inner whitespace removed.
std::vector<Token> tokenize(std::string_view text);

std::string_view describe(Tok kind);

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_{ std::move(tokens) } {}

    [[nodiscard]] const Token& peek(std::size_t ahead = 0) const;
    [[nodiscard]] bool at(Tok kind) const { return peek().kind == kind; }
    [[nodiscard]] bool at_word(std::string_view word) const;
    const Token& advance();
    const Token& expect(Tok kind, std::string_view context);
    const Token& expect_word(std::string_view word);
    bool accept(Tok kind);
    bool accept_word(std::string_view word);

    // Full expression: implication level and below.
    Expr parse_expr();

    [[noreturn]] void fail(const Token& at, std::string message) const;

    // Span covering [from, last consumed token].
    [[nodiscard]] SourceSpan span_from(const SourceSpan& from) const;

private:
    Expr parse_imply();
    Expr parse_or();
    Expr parse_and();
    Expr parse_equality();
    Expr parse_relational();
    Expr parse_additive();
    Expr parse_multiplicative();
    Expr parse_unary();
    Expr parse_primary();

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

[[nodiscard]] bool is_reserved_word(std::string_view word);

// Textual quantifier aliases accepted at the start of a query.
[[nodiscard]] bool is_quantifier_keyword(std::string_view word);

} // namespace mcfr::syntax
