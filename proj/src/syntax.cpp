#include "syntax.hpp"

#include <array>
#include <charconv>

namespace mcfr::syntax {

namespace {

bool ident_start(char c)
{
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool ident_char(char c)
{
    return ident_start(c) || (c >= '0' && c <= '9');
}

bool digit(char c)
{
    return c >= '0' && c <= '9';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_{ text } {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            Token t = next();
            const bool done = t.kind == Tok::end;
            out.push_back(std::move(t));
            if (done)
                return out;
        }
    }

private:
    [[nodiscard]] char cur(std::size_t ahead = 0) const
    {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void bump(std::size_t n = 1)
    {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_space_and_comments()
    {
        for (;;) {
            const char c = cur();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else if (c == '/' && cur(1) == '/') {
                while (pos_ < text_.size() && cur() != '\n')
                    bump();
            } else {
                return;
            }
        }
    }

    [[nodiscard]] SourceSpan here() const { return SourceSpan{ pos_, pos_, line_, col_ }; }

    [[noreturn]] void fail(const SourceSpan& at, std::string msg) const
    {
        SourceSpan s = at;
        s.end = std::max(s.begin + 1, pos_);
        if (s.end > text_.size())
            s.end = text_.size();
        if (s.begin > s.end)
            s.begin = s.end;
        throw SyntaxError(make_error(codes::syntax, std::move(msg), s));
    }

    Token make(Tok kind, const SourceSpan& start, std::string text = {})
    {
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        t.span = start;
        t.span.end = pos_;
        return t;
    }

    Token next()
    {
        const SourceSpan start = here();
        const char c = cur();
        if (c == '\0' && pos_ >= text_.size())
            return make(Tok::end, start);

        if (ident_start(c))
            return identifier(start);

        if (digit(c)) {
            const std::size_t b = pos_;
            while (digit(cur()))
                bump();
            Token t = make(Tok::integer, start, std::string(text_.substr(b, pos_ - b)));
            const auto* first = t.text.data();
            const auto [ptr, ec] = std::from_chars(first, first + t.text.size(), t.number);
            if (ec != std::errc{} || ptr != first + t.text.size())
                fail(start, "integer literal '" + t.text + "' is out of range");
            if (ident_char(cur()))
                fail(start, "malformed number");
            return t;
        }

        if (c == '"')
            return string_literal(start);

        // Two-byte UTF-8 prefix of U+2264 / U+2265.
        if (static_cast<unsigned char>(c) == 0xE2 && static_cast<unsigned char>(cur(1)) == 0x89) {
            const auto third = static_cast<unsigned char>(cur(2));
            if (third == 0xA4 || third == 0xA5) {
                bump(3);
                return make(third == 0xA4 ? Tok::le : Tok::ge, start);
            }
        }

        const auto two = [&](char a, char b) { return c == a && cur(1) == b; };
        if (two('&', '&')) {
            bump(2);
            return make(Tok::and_and, start);
        }
        if (two('|', '|')) {
            bump(2);
            return make(Tok::or_or, start);
        }
        if (two('=', '=')) {
            bump(2);
            return make(Tok::eq, start);
        }
        if (two('!', '=')) {
            bump(2);
            return make(Tok::ne, start);
        }
        if (two('<', '=')) {
            bump(2);
            return make(Tok::le, start);
        }
        if (two('>', '=')) {
            bump(2);
            return make(Tok::ge, start);
        }
        if (two('-', '>')) {
            bump(2);
            return make(Tok::arrow, start);
        }

        Tok kind;
        switch (c) {
        case '(':
            kind = Tok::lparen;
            break;
        case ')':
            kind = Tok::rparen;
            break;
        case '{':
            kind = Tok::lbrace;
            break;
        case '}':
            kind = Tok::rbrace;
            break;
        case '[':
            kind = Tok::lbracket;
            break;
        case ']':
            kind = Tok::rbracket;
            break;
        case ',':
            kind = Tok::comma;
            break;
        case ';':
            kind = Tok::semicolon;
            break;
        case '.':
            kind = Tok::dot;
            break;
        case '=':
            kind = Tok::assign;
            break;
        case '<':
            kind = Tok::lt;
            break;
        case '>':
            kind = Tok::gt;
            break;
        case '+':
            kind = Tok::plus;
            break;
        case '-':
            kind = Tok::minus;
            break;
        case '*':
            kind = Tok::star;
            break;
        case '!':
            kind = Tok::bang;
            break;
        default: {
            std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7F)
                                    ? "byte 0x" + to_hex(static_cast<unsigned char>(c))
                                    : std::string("'") + c + "'";
            bump();
            fail(start, "unexpected character " + shown);
        }
        }
        bump();
        return make(kind, start);
    }

    static std::string to_hex(unsigned char b)
    {
        static constexpr std::array<char, 16> digits{ '0', '1', '2', '3', '4', '5', '6', '7',
                                                      '8', '9', 'A', 'B', 'C', 'D', 'E', 'F' };
        return { digits[b >> 4], digits[b & 0xF] };
    }

    Token identifier(const SourceSpan& start)
    {
        // Quantifier symbols: A[] E[] A<> E<>
        if ((cur() == 'A' || cur() == 'E')
            && ((cur(1) == '[' && cur(2) == ']') || (cur(1) == '<' && cur(2) == '>'))) {
            std::string sym(text_.substr(pos_, 3));
            bump(3);
            return make(Tok::quantifier, start, std::move(sym));
        }

        const std::size_t b = pos_;
        while (ident_char(cur()))
            bump();
        std::string name(text_.substr(b, pos_ - b));

        if (cur() == '[' && name != "int") {
            // Bracketed atom, e.g. completed[prereq] -> one flat identifier.
            bump();
            std::string inner;
            while (cur() != ']') {
                const char c = cur();
                if (ident_char(c) || c == ',' || c == '.')
                    inner += c;
                else if (c != ' ' && c != '\t')
                    fail(start, "malformed bracketed identifier '" + name + "[...]'");
                bump();
            }
            bump();
            if (inner.empty())
                fail(start, "empty brackets after '" + name + "'");
            name += '[' + inner + ']';
        }
        return make(Tok::ident, start, std::move(name));
    }

    Token string_literal(const SourceSpan& start)
    {
        bump();
        std::string value;
        for (;;) {
            const char c = cur();
            if (pos_ >= text_.size() || c == '\n')
                fail(start, "unterminated string literal");
            bump();
            if (c == '"')
                break;
            if (c == '\\') {
                const char e = cur();
                bump();
                switch (e) {
                case '"':
                    value += '"';
                    break;
                case '\\':
                    value += '\\';
                    break;
                case 'n':
                    value += '\n';
                    break;
                case 't':
                    value += '\t';
                    break;
                default:
                    fail(start, std::string("unknown escape '\\") + e + "'");
                }
                continue;
            }
            value += c;
        }
        return make(Tok::string, start, std::move(value));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

} // namespace

std::vector<Token> tokenize(std::string_view text)
{
    return Lexer(text).run();
}

std::string_view describe(Tok kind)
{
    switch (kind) {
    case Tok::ident:
        return "identifier";
    case Tok::integer:
        return "integer";
    case Tok::string:
        return "string";
    case Tok::quantifier:
        return "quantifier";
    case Tok::lparen:
        return "'('";
    case Tok::rparen:
        return "')'";
    case Tok::lbrace:
        return "'{'";
    case Tok::rbrace:
        return "'}'";
    case Tok::lbracket:
        return "'['";
    case Tok::rbracket:
        return "']'";
    case Tok::comma:
        return "','";
    case Tok::semicolon:
        return "';'";
    case Tok::dot:
        return "'.'";
    case Tok::assign:
        return "'='";
    case Tok::eq:
        return "'=='";
    case Tok::ne:
        return "'!='";
    case Tok::lt:
        return "'<'";
    case Tok::le:
        return "'<='";
    case Tok::gt:
        return "'>'";
    case Tok::ge:
        return "'>='";
    case Tok::plus:
        return "'+'";
    case Tok::minus:
        return "'-'";
    case Tok::star:
        return "'*'";
    case Tok::bang:
        return "'!'";
    case Tok::and_and:
        return "'&&'";
    case Tok::or_or:
        return "'||'";
    case Tok::arrow:
        return "'->'";
    case Tok::end:
        return "end of input";
    }
    return "token";
}

bool is_reserved_word(std::string_view word)
{
    return word == "true" || word == "false" || word == "imply" || word == "and" || word == "or"
           || word == "not";
}

bool is_quantifier_keyword(std::string_view word)
{
    return word == "AG" || word == "EF" || word == "EG" || word == "AF";
}

const Token& Parser::peek(std::size_t ahead) const
{
    const auto i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
}

bool Parser::at_word(std::string_view word) const
{
    return peek().kind == Tok::ident && peek().text == word;
}

const Token& Parser::advance()
{
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size())
        ++pos_;
    return t;
}

const Token& Parser::expect(Tok kind, std::string_view context)
{
    if (!at(kind))
        fail(peek(), "expected " + std::string(describe(kind)) + " " + std::string(context) + ", found "
                         + (peek().kind == Tok::end ? std::string("end of input")
                                                    : "'" + (peek().text.empty() ? std::string(describe(peek().kind))
                                                                                 : peek().text)
                                                          + "'"));
    return advance();
}

const Token& Parser::expect_word(std::string_view word)
{
    if (!at_word(word))
        fail(peek(), "expected '" + std::string(word) + "'");
    return advance();
}

bool Parser::accept(Tok kind)
{
    if (!at(kind))
        return false;
    advance();
    return true;
}

bool Parser::accept_word(std::string_view word)
{
    if (!at_word(word))
        return false;
    advance();
    return true;
}

void Parser::fail(const Token& at, std::string message) const
{
    SourceSpan s = at.span;
    if (s.end < s.begin)
        s.end = s.begin;
    throw SyntaxError(make_error(codes::syntax, std::move(message), s));
}

SourceSpan Parser::span_from(const SourceSpan& from) const
{
    SourceSpan s = from;
    const std::size_t last = pos_ == 0 ? 0 : pos_ - 1;
    s.end = std::max(from.begin, tokens_[last].span.end);
    return s;
}

Expr Parser::parse_expr()
{
    return parse_imply();
}

Expr Parser::parse_imply()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_or();
    if (accept_word("imply") || accept(Tok::arrow)) {
        Expr rhs = parse_imply();
        Expr e = Expr::binary(Op::imply, std::move(lhs), std::move(rhs));
        e.span = span_from(start);
        return e;
    }
    return lhs;
}

Expr Parser::parse_or()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_and();
    while (accept(Tok::or_or) || accept_word("or")) {
        Expr rhs = parse_and();
        lhs = Expr::binary(Op::logical_or, std::move(lhs), std::move(rhs));
        lhs.span = span_from(start);
    }
    return lhs;
}

Expr Parser::parse_and()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_equality();
    while (accept(Tok::and_and) || accept_word("and")) {
        Expr rhs = parse_equality();
        lhs = Expr::binary(Op::logical_and, std::move(lhs), std::move(rhs));
        lhs.span = span_from(start);
    }
    return lhs;
}

Expr Parser::parse_equality()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_relational();
    for (;;) {
        Op op;
        if (at(Tok::eq))
            op = Op::eq;
        else if (at(Tok::ne))
            op = Op::ne;
        else
            return lhs;
        advance();
        Expr rhs = parse_relational();
        lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
        lhs.span = span_from(start);
    }
}

Expr Parser::parse_relational()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_additive();
    for (;;) {
        Op op;
        switch (peek().kind) {
        case Tok::lt:
            op = Op::lt;
            break;
        case Tok::le:
            op = Op::le;
            break;
        case Tok::gt:
            op = Op::gt;
            break;
        case Tok::ge:
            op = Op::ge;
            break;
        default:
            return lhs;
        }
        advance();
        Expr rhs = parse_additive();
        lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
        lhs.span = span_from(start);
    }
}

Expr Parser::parse_additive()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_multiplicative();
    for (;;) {
        Op op;
        if (at(Tok::plus))
            op = Op::add;
        else if (at(Tok::minus))
            op = Op::sub;
        else
            return lhs;
        advance();
        Expr rhs = parse_multiplicative();
        lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
        lhs.span = span_from(start);
    }
}

Expr Parser::parse_multiplicative()
{
    const SourceSpan start = peek().span;
    Expr lhs = parse_unary();
    while (accept(Tok::star)) {
        Expr rhs = parse_unary();
        lhs = Expr::binary(Op::mul, std::move(lhs), std::move(rhs));
        lhs.span = span_from(start);
    }
    return lhs;
}

Expr Parser::parse_unary()
{
    const SourceSpan start = peek().span;
    if (accept(Tok::bang) || accept_word("not")) {
        Expr e = Expr::unary(Op::logical_not, parse_unary());
        e.span = span_from(start);
        return e;
    }
    return parse_primary();
}

Expr Parser::parse_primary()
{
    const Token& t = peek();
    switch (t.kind) {
    case Tok::integer: {
        Expr e = Expr::int_literal(t.number);
        e.span = t.span;
        advance();
        return e;
    }
    case Tok::minus:
        // Negative literals only; there is no general unary minus.
        if (peek(1).kind == Tok::integer) {
            const SourceSpan start = t.span;
            advance();
            Expr e = Expr::int_literal(-advance().number);
            e.span = span_from(start);
            return e;
        }
        fail(t, "expected an expression, found '-'");
    case Tok::lparen: {
        advance();
        Expr e = parse_expr();
        expect(Tok::rparen, "to close '('");
        return e;
    }
    case Tok::quantifier:
        throw SyntaxError(make_error(codes::nesting,
                                     "temporal quantifier '" + t.text
                                         + "' is only allowed at the start of a query",
                                     t.span));
    case Tok::ident:
        break;
    default:
        fail(t, "expected an expression, found "
                    + (t.kind == Tok::end ? std::string("end of input") : std::string(describe(t.kind))));
    }

    if (t.text == "true" || t.text == "false") {
        Expr e = Expr::bool_literal(t.text == "true");
        e.span = t.span;
        advance();
        return e;
    }
    if (is_reserved_word(t.text))
        fail(t, "unexpected keyword '" + t.text + "'");
    if (is_quantifier_keyword(t.text)) {
        const Tok k = peek(1).kind;
        if (k == Tok::lparen || k == Tok::ident || k == Tok::bang || k == Tok::integer)
            throw SyntaxError(make_error(codes::nesting,
                                         "temporal quantifier '" + t.text
                                             + "' is only allowed at the start of a query",
                                         t.span));
    }

    const SourceSpan start = t.span;
    std::string name = advance().text;
    if (accept(Tok::dot)) {
        const Token& member = expect(Tok::ident, "after '.'");
        name += '.' + member.text;
    } else if (at(Tok::lparen) && peek(1).kind == Tok::ident
               && (peek(2).kind == Tok::rparen || peek(2).kind == Tok::comma)) {
        // Predicate-style atom, e.g. completed(prereq) -> one flat identifier.
        advance();
        name += '(';
        for (bool first = true; !at(Tok::rparen); first = false) {
            if (!first) {
                expect(Tok::comma, "between atom arguments");
                name += ',';
            }
            name += expect(Tok::ident, "as atom argument").text;
        }
        advance();
        name += ')';
    }
    Expr e = Expr::identifier(std::move(name));
    e.span = span_from(start);
    return e;
}

} // namespace mcfr::syntax
