#include "ministep/parser.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>

namespace ministep {

ParseError::ParseError(const std::string& message, SourceSpan span)
    : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " +
                         message),
      span_(span),
      detail_(message) {}

UnboundVariable::UnboundVariable(const std::string& name, SourceSpan span)
    : ParseError("unbound variable " + name, span), name_(name) {}

namespace {

// ------------------------------
// lexer
// ------------------------------

enum class Tok {
    Int, Str, Ident, UIdent,
    Let, Rec, In, Fun, If, Then, Else, Match, With, Try, Raise, Not, True, False, Begin, End,
    LParen, RParen, LBracket, RBracket, AttrOpen, Comma, Semi, SemiSemi, ColonColon, Arrow,
    Eq, Ne, Lt, Le, Gt, Ge, AndAnd, OrOr, Plus, Minus, Star, Slash, Caret, Bar, Underscore,
    Dot, Eof,
};

struct Token {
    Tok kind;
    std::string text;      // identifier name or decoded string literal
    std::uint64_t magnitude = 0;  // integer literal
    SourceSpan span;
};

const std::unordered_map<std::string_view, Tok>& keywords() {
    static const std::unordered_map<std::string_view, Tok> table = {
        {"let", Tok::Let},     {"rec", Tok::Rec},     {"in", Tok::In},
        {"fun", Tok::Fun},     {"if", Tok::If},       {"then", Tok::Then},
        {"else", Tok::Else},   {"match", Tok::Match}, {"with", Tok::With},
        {"try", Tok::Try},     {"raise", Tok::Raise}, {"not", Tok::Not},
        {"true", Tok::True},   {"false", Tok::False}, {"begin", Tok::Begin},
        {"end", Tok::End},
    };
    return table;
}

bool is_reserved(std::string_view word) {
    static const char* const reserved[] = {"function", "when", "type", "of", "and", "as",
                                           "mutable", "module", "open", "struct", "sig",
                                           "val", "external", "exception", "for", "while",
                                           "do", "done", "to", "downto", "lazy", "assert",
                                           "new", "object", "method", "class"};
    return std::any_of(std::begin(reserved), std::end(reserved),
                       [&](const char* r) { return word == r; });
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_blanks();
            Token t = next();
            bool done = t.kind == Tok::Eof;
            out.push_back(std::move(t));
            if (done) return out;
        }
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;

    bool at_end() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }
    SourceSpan here() const { return {pos_, pos_, line_, column_}; }

    [[noreturn]] void fail(const std::string& msg, SourceSpan at) const {
        at.end_offset = std::max(at.end_offset, std::min(pos_, src_.size()));
        throw SyntaxError(msg, at);
    }

    void skip_blanks() {
        for (;;) {
            while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' ||
                                 peek() == '\r')) {
                advance();
            }
            if (peek() == '(' && peek(1) == '*') {
                skip_comment();
                continue;
            }
            return;
        }
    }

    void skip_comment() {
        SourceSpan start = here();
        int depth = 0;
        do {
            if (at_end()) fail("unterminated comment", start);
            if (peek() == '(' && peek(1) == '*') {
                advance();
                advance();
                ++depth;
            } else if (peek() == '*' && peek(1) == ')') {
                advance();
                advance();
                --depth;
            } else {
                advance();
            }
        } while (depth > 0);
    }

    Token make(Tok kind, SourceSpan start, std::string text = {}) const {
        start.end_offset = pos_;
        return Token{kind, std::move(text), 0, start};
    }

    Token next() {
        SourceSpan start = here();
        if (at_end()) return make(Tok::Eof, start);
        char c = peek();
        if (c >= '0' && c <= '9') return number(start);
        if (c == '"') return string_literal(start);
        if ((c >= 'a' && c <= 'z') || c == '_' || (c >= 'A' && c <= 'Z')) return word(start);

        auto two = [&](char a, char b) { return peek() == a && peek(1) == b; };
        auto take = [&](int n, Tok kind) {
            for (int i = 0; i < n; ++i) advance();
            return make(kind, start);
        };
        if (two(';', ';')) return take(2, Tok::SemiSemi);
        if (two(':', ':')) return take(2, Tok::ColonColon);
        if (two('-', '>')) return take(2, Tok::Arrow);
        if (two('<', '>')) return take(2, Tok::Ne);
        if (two('<', '=')) return take(2, Tok::Le);
        if (two('>', '=')) return take(2, Tok::Ge);
        if (two('&', '&')) return take(2, Tok::AndAnd);
        if (two('|', '|')) return take(2, Tok::OrOr);
        if (two('[', '@')) return take(2, Tok::AttrOpen);
        if (two('=', '=') || two('!', '=')) fail("unsupported operator", start);
        switch (c) {
            case '(': return take(1, Tok::LParen);
            case ')': return take(1, Tok::RParen);
            case '[': return take(1, Tok::LBracket);
            case ']': return take(1, Tok::RBracket);
            case ',': return take(1, Tok::Comma);
            case ';': return take(1, Tok::Semi);
            case '=': return take(1, Tok::Eq);
            case '<': return take(1, Tok::Lt);
            case '>': return take(1, Tok::Gt);
            case '+': return take(1, Tok::Plus);
            case '-': return take(1, Tok::Minus);
            case '*': return take(1, Tok::Star);
            case '/': return take(1, Tok::Slash);
            case '^': return take(1, Tok::Caret);
            case '|': return take(1, Tok::Bar);
            case '.': return take(1, Tok::Dot);
            default: break;
        }
        fail("unexpected character", start);
    }

    Token number(SourceSpan start) {
        std::uint64_t value = 0;
        bool overflow = false;
        while (!at_end() && ((peek() >= '0' && peek() <= '9') || peek() == '_')) {
            if (peek() != '_') {
                auto digit = static_cast<std::uint64_t>(peek() - '0');
                if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
                    overflow = true;
                } else {
                    value = value * 10 + digit;
                }
            }
            advance();
        }
        char c = peek();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '.') {
            fail("malformed integer literal", start);
        }
        if (overflow || value > (std::uint64_t{1} << 63)) {
            fail("integer literal exceeds the representable range", start);
        }
        Token t = make(Tok::Int, start);
        t.magnitude = value;
        return t;
    }

    Token word(SourceSpan start) {
        bool upper = peek() >= 'A' && peek() <= 'Z';
        std::size_t begin = pos_;
        while (!at_end()) {
            char c = peek();
            if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                c == '_' || c == '\'') {
                advance();
            } else {
                break;
            }
        }
        std::string_view text = src_.substr(begin, pos_ - begin);
        if (upper) return make(Tok::UIdent, start, std::string(text));
        if (text == "_") return make(Tok::Underscore, start);
        if (auto it = keywords().find(text); it != keywords().end()) return make(it->second, start);
        if (is_reserved(text)) fail("unsupported keyword '" + std::string(text) + "'", start);
        return make(Tok::Ident, start, std::string(text));
    }

    Token string_literal(SourceSpan start) {
        advance();  // opening quote
        std::string value;
        for (;;) {
            if (at_end()) fail("unterminated string literal", start);
            char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c != '\\') {
                value.push_back(c);
                advance();
                continue;
            }
            SourceSpan esc = here();
            advance();
            if (at_end()) fail("unterminated string literal", start);
            char e = peek();
            switch (e) {
                case '\\': value.push_back('\\'); advance(); break;
                case '"': value.push_back('"'); advance(); break;
                case '\'': value.push_back('\''); advance(); break;
                case 'n': value.push_back('\n'); advance(); break;
                case 't': value.push_back('\t'); advance(); break;
                case 'b': value.push_back('\b'); advance(); break;
                case 'r': value.push_back('\r'); advance(); break;
                case ' ': value.push_back(' '); advance(); break;
                case '\n':
                    advance();
                    while (!at_end() && (peek() == ' ' || peek() == '\t')) advance();
                    break;
                case 'x': {
                    advance();
                    int v = 0;
                    for (int i = 0; i < 2; ++i) {
                        int d = hex_digit(peek());
                        if (d < 0) fail("malformed \\x escape", esc);
                        v = v * 16 + d;
                        advance();
                    }
                    value.push_back(static_cast<char>(v));
                    break;
                }
                case 'o': {
                    advance();
                    int v = 0;
                    for (int i = 0; i < 3; ++i) {
                        char d = peek();
                        if (d < '0' || d > '7') fail("malformed \\o escape", esc);
                        v = v * 8 + (d - '0');
                        advance();
                    }
                    if (v > 255) fail("escape out of range", esc);
                    value.push_back(static_cast<char>(v));
                    break;
                }
                case 'u': {
                    advance();
                    if (peek() != '{') fail("malformed \\u escape", esc);
                    advance();
                    std::uint32_t cp = 0;
                    int digits = 0;
                    while (peek() != '}') {
                        int d = hex_digit(peek());
                        if (d < 0 || ++digits > 6) fail("malformed \\u escape", esc);
                        cp = cp * 16 + static_cast<std::uint32_t>(d);
                        advance();
                    }
                    advance();
                    if (digits == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
                        fail("invalid unicode escape", esc);
                    }
                    append_utf8(value, cp);
                    break;
                }
                default: {
                    if (e >= '0' && e <= '9') {
                        int v = 0;
                        for (int i = 0; i < 3; ++i) {
                            char d = peek();
                            if (d < '0' || d > '9') fail("malformed decimal escape", esc);
                            v = v * 10 + (d - '0');
                            advance();
                        }
                        if (v > 255) fail("escape out of range", esc);
                        value.push_back(static_cast<char>(v));
                        break;
                    }
                    fail("illegal escape sequence", esc);
                }
            }
        }
        return make(Tok::Str, start, std::move(value));
    }

    static int hex_digit(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    }

    static void append_utf8(std::string& out, std::uint32_t cp) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
};

// ------------------------------
// parser
// ------------------------------

constexpr int kMaxNesting = 1500;

class Parser {
public:
    Parser(std::vector<Token> tokens, ParseOptions options)
        : tokens_(std::move(tokens)), options_(std::move(options)) {
        for (const auto& b : builtin_names()) options_.globals.insert(b);
    }

    Program program() {
        Program p;
        while (peek() != Tok::Eof) {
            if (peek() == Tok::SemiSemi) {
                ++pos_;
                continue;
            }
            if (peek() == Tok::Let) {
                if (auto item = toplevel_definition()) {
                    p.items.push_back(std::move(*item));
                } else {
                    p.items.push_back(Eval{seq()});
                }
            } else {
                p.items.push_back(Eval{seq()});
            }
            if (peek() != Tok::SemiSemi && peek() != Tok::Let && peek() != Tok::Eof) {
                fail("expected ';;' between top-level phrases");
            }
        }
        return p;
    }

    ExprPtr single_expression() {
        ExprPtr e = seq();
        if (peek() != Tok::Eof) fail("unexpected token after expression");
        return e;
    }

    std::vector<Attribute> take_attributes() { return std::move(attributes_); }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    ParseOptions options_;
    std::vector<std::string> locals_;
    std::vector<Attribute> attributes_;
    int nesting_ = 0;

    struct Nest {
        Parser& p;
        explicit Nest(Parser& parser) : p(parser) {
            if (++p.nesting_ > kMaxNesting) p.fail("expression nested too deeply");
        }
        ~Nest() { --p.nesting_; }
    };

    struct Scope {
        Parser& p;
        std::size_t mark;
        Scope(Parser& parser, const std::vector<std::string>& names)
            : p(parser), mark(parser.locals_.size()) {
            p.locals_.insert(p.locals_.end(), names.begin(), names.end());
        }
        ~Scope() { p.locals_.resize(mark); }
    };

    Tok peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i].kind;
    }
    const Token& current() const { return tokens_[std::min(pos_, tokens_.size() - 1)]; }
    const Token& take() {
        const Token& t = current();
        if (pos_ < tokens_.size() - 1) ++pos_;
        return t;
    }
    bool accept(Tok kind) {
        if (peek() != kind) return false;
        take();
        return true;
    }
    void expect(Tok kind, const char* what) {
        if (!accept(kind)) fail(std::string("expected ") + what);
    }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = current();
        if (t.kind == Tok::Eof) throw SyntaxError(msg + " (at end of input)", t.span);
        throw SyntaxError(msg, t.span);
    }

    // --- top level ---

    // Returns nullopt (with the cursor rewound) when the `let` turns out to be a
    // `let ... in ...` expression.
    std::optional<Item> toplevel_definition() {
        std::size_t start = pos_;
        expect(Tok::Let, "'let'");
        if (accept(Tok::Rec)) {
            const Token& name_tok = current();
            expect(Tok::Ident, "function name after 'let rec'");
            std::string name = name_tok.text;
            check_redefinition(name, name_tok.span);
            std::vector<PatternPtr> params = atomic_params();
            expect(Tok::Eq, "'='");
            // Recursive occurrences refer to the definition itself.
            bool was_global = options_.globals.count(name) > 0;
            options_.globals.insert(name);
            ExprPtr body = with_params(params, 1, [&] { return seq(); });
            if (peek() == Tok::In) {
                if (!was_global) options_.globals.erase(name);
                pos_ = start;
                return std::nullopt;
            }
            auto [param, fbody] = split_rec_function(params, body, name_tok.span);
            return DefineRec{name, param, fbody};
        }
        if (peek() == Tok::Ident && starts_atomic_pattern(peek(1))) {
            const Token& name_tok = take();
            std::vector<PatternPtr> params = atomic_params();
            expect(Tok::Eq, "'='");
            ExprPtr body = with_params(params, 0, [&] { return seq(); });
            if (peek() == Tok::In) {
                pos_ = start;
                return std::nullopt;
            }
            check_redefinition(name_tok.text, name_tok.span);
            options_.globals.insert(name_tok.text);
            return Define{name_tok.text, body};
        }
        SourceSpan pat_span = current().span;
        PatternPtr binding = pattern();
        expect(Tok::Eq, "'='");
        ExprPtr bound = seq();
        if (peek() == Tok::In) {
            pos_ = start;
            return std::nullopt;
        }
        if (const auto* v = binding->as<PVar>()) {
            check_redefinition(v->name, pat_span);
            options_.globals.insert(v->name);
            return Define{v->name, bound};
        }
        if (binding->is<PWild>() || binding->is<PUnit>()) return Eval{bound};
        throw SyntaxError("unsupported pattern in top-level definition", pat_span);
    }

    void check_redefinition(const std::string& name, SourceSpan span) const {
        if (options_.globals.count(name) > 0) {
            throw SyntaxError("top-level name '" + name + "' is already defined", span);
        }
    }

    std::pair<PatternPtr, ExprPtr> split_rec_function(const std::vector<PatternPtr>& params,
                                                      const ExprPtr& body, SourceSpan span) {
        if (!params.empty()) return {params.front(), body};
        // `let rec f = fun x -> e`
        if (const auto* f = body->as<Fun>()) return {f->param, f->body};
        throw SyntaxError("the right-hand side of 'let rec' must be a function", span);
    }

    // Parses `body` with all variables of params[0..] in scope and wraps params[skip..]
    // as nested Fun nodes around the result.
    template <typename F>
    ExprPtr with_params(const std::vector<PatternPtr>& params, std::size_t skip, F&& body) {
        std::vector<std::string> names;
        for (const auto& p : params) {
            auto vs = pattern_vars(*p);
            names.insert(names.end(), vs.begin(), vs.end());
        }
        Scope scope(*this, names);
        ExprPtr e = body();
        for (std::size_t i = params.size(); i > skip; --i) e = make(Fun{params[i - 1], e});
        return e;
    }

    std::vector<PatternPtr> atomic_params() {
        std::vector<PatternPtr> params;
        while (starts_atomic_pattern(peek())) params.push_back(checked(atomic_pattern()));
        return params;
    }

    // --- expressions ---

    ExprPtr seq() {
        Nest nest(*this);
        ExprPtr first = tuple();
        if (accept(Tok::Semi)) return make(Seq{first, seq()});
        return first;
    }

    ExprPtr tuple() {
        ExprPtr first = disjunction();
        if (peek() != Tok::Comma) return first;
        std::vector<ExprPtr> items{first};
        while (accept(Tok::Comma)) items.push_back(disjunction());
        return make(Tuple{std::move(items)});
    }

    ExprPtr disjunction() {
        ExprPtr e = conjunction();
        while (accept(Tok::OrOr)) e = binop(BinaryOp::Or, e, conjunction());
        return e;
    }

    ExprPtr conjunction() {
        ExprPtr e = comparison();
        while (accept(Tok::AndAnd)) e = binop(BinaryOp::And, e, comparison());
        return e;
    }

    ExprPtr comparison() {
        ExprPtr e = cons_expr();
        for (;;) {
            std::optional<BinaryOp> op;
            switch (peek()) {
                case Tok::Eq: op = BinaryOp::Eq; break;
                case Tok::Ne: op = BinaryOp::Ne; break;
                case Tok::Lt: op = BinaryOp::Lt; break;
                case Tok::Le: op = BinaryOp::Le; break;
                case Tok::Gt: op = BinaryOp::Gt; break;
                case Tok::Ge: op = BinaryOp::Ge; break;
                default: return e;
            }
            take();
            e = binop(*op, e, cons_expr());
        }
    }

    ExprPtr cons_expr() {
        ExprPtr head = additive();
        if (!accept(Tok::ColonColon)) return head;
        Nest nest(*this);
        return cons(head, cons_expr());
    }

    ExprPtr additive() {
        ExprPtr e = multiplicative();
        for (;;) {
            BinaryOp op;
            if (peek() == Tok::Plus) op = BinaryOp::Add;
            else if (peek() == Tok::Minus) op = BinaryOp::Sub;
            else if (peek() == Tok::Caret) op = BinaryOp::Concat;
            else return e;
            take();
            e = binop(op, e, multiplicative());
        }
    }

    ExprPtr multiplicative() {
        ExprPtr e = unary();
        for (;;) {
            BinaryOp op;
            if (peek() == Tok::Star) op = BinaryOp::Mul;
            else if (peek() == Tok::Slash) op = BinaryOp::Div;
            else return e;
            take();
            e = binop(op, e, unary());
        }
    }

    ExprPtr unary() {
        if (peek() == Tok::Minus) {
            Nest nest(*this);
            take();
            if (peek() == Tok::Int) return int_lit(negated_literal(take()));
            return make(UnOp{UnaryOp::Neg, unary()});
        }
        switch (peek()) {
            case Tok::Let:
            case Tok::Fun:
            case Tok::If:
            case Tok::Match:
            case Tok::Try:
                return prefix_form();
            default:
                return application();
        }
    }

    std::int64_t negated_literal(const Token& t) {
        if (t.magnitude == (std::uint64_t{1} << 63)) return std::numeric_limits<std::int64_t>::min();
        return -static_cast<std::int64_t>(t.magnitude);
    }

    ExprPtr application() {
        ExprPtr head;
        if (accept(Tok::Raise)) {
            head = raise_expr(atom());
        } else if (accept(Tok::Not)) {
            head = make(UnOp{UnaryOp::Not, atom()});
        } else if (starts_atom(peek())) {
            head = atom();
        } else {
            fail("expected an expression");
        }
        while (starts_atom(peek())) head = app(head, atom());
        return head;
    }

    static bool starts_atom(Tok t) {
        switch (t) {
            case Tok::Int: case Tok::Str: case Tok::Ident: case Tok::UIdent: case Tok::True:
            case Tok::False: case Tok::LParen: case Tok::LBracket: case Tok::Begin:
                return true;
            default:
                return false;
        }
    }

    ExprPtr atom() {
        ExprPtr e = bare_atom();
        while (peek() == Tok::AttrOpen) {
            take();
            std::string name;
            do {
                const Token& part = current();
                expect(Tok::Ident, "attribute name");
                if (!name.empty()) name += '.';
                name += part.text;
            } while (accept(Tok::Dot));
            expect(Tok::RBracket, "']' closing the attribute");
            attributes_.push_back(Attribute{name, e});
        }
        return e;
    }

    ExprPtr bare_atom() {
        const Token& t = current();
        switch (t.kind) {
            case Tok::Int: {
                take();
                if (t.magnitude > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                    throw SyntaxError("integer literal exceeds the representable range", t.span);
                }
                return int_lit(static_cast<std::int64_t>(t.magnitude));
            }
            case Tok::Str: take(); return str_lit(t.text);
            case Tok::True: take(); return bool_lit(true);
            case Tok::False: take(); return bool_lit(false);
            case Tok::Ident: take(); return resolve(t);
            case Tok::UIdent:
                take();
                if (!is_known_tag(t.text)) {
                    throw SyntaxError("unknown constructor " + t.text, t.span);
                }
                return tag(t.text);
            case Tok::LParen: {
                Nest nest(*this);
                take();
                if (accept(Tok::RParen)) return unit();
                ExprPtr e = seq();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Begin: {
                Nest nest(*this);
                take();
                if (accept(Tok::End)) return unit();
                ExprPtr e = seq();
                expect(Tok::End, "'end'");
                return e;
            }
            case Tok::LBracket: {
                Nest nest(*this);
                take();
                std::vector<ExprPtr> items;
                if (!accept(Tok::RBracket)) {
                    items.push_back(tuple());
                    while (accept(Tok::Semi)) {
                        if (peek() == Tok::RBracket) break;
                        items.push_back(tuple());
                    }
                    expect(Tok::RBracket, "']'");
                }
                ExprPtr list = nil();
                for (auto it = items.rbegin(); it != items.rend(); ++it) list = cons(*it, list);
                return list;
            }
            default:
                fail("expected an expression");
        }
    }

    ExprPtr resolve(const Token& t) {
        if (std::find(locals_.rbegin(), locals_.rend(), t.text) != locals_.rend()) return var(t.text);
        if (options_.globals.count(t.text) > 0) return global(t.text);
        if (options_.allow_free_vars) return var(t.text);
        throw UnboundVariable(t.text, t.span);
    }

    ExprPtr prefix_form() {
        Nest nest(*this);
        switch (peek()) {
            case Tok::Fun: {
                take();
                std::vector<PatternPtr> params = atomic_params();
                if (params.empty()) fail("expected a parameter after 'fun'");
                expect(Tok::Arrow, "'->'");
                return with_params(params, 0, [&] { return seq(); });
            }
            case Tok::Let: return let_expression();
            case Tok::If: {
                take();
                ExprPtr cond = seq();
                expect(Tok::Then, "'then'");
                ExprPtr then_branch = tuple();
                ExprPtr else_branch = accept(Tok::Else) ? tuple() : unit();
                return make(If{cond, then_branch, else_branch});
            }
            case Tok::Match: {
                take();
                ExprPtr scrutinee = seq();
                expect(Tok::With, "'with'");
                return make(Match{scrutinee, clauses()});
            }
            case Tok::Try: {
                take();
                ExprPtr tryee = seq();
                expect(Tok::With, "'with'");
                return make(Try{tryee, clauses()});
            }
            default:
                fail("expected an expression");
        }
    }

    ExprPtr let_expression() {
        expect(Tok::Let, "'let'");
        if (accept(Tok::Rec)) {
            const Token& name_tok = current();
            expect(Tok::Ident, "function name after 'let rec'");
            std::string name = name_tok.text;
            std::vector<PatternPtr> params = atomic_params();
            expect(Tok::Eq, "'='");
            Scope self(*this, {name});
            ExprPtr fn_body = with_params(params, 1, [&] { return seq(); });
            auto [param, fbody] = split_rec_function(params, fn_body, name_tok.span);
            expect(Tok::In, "'in'");
            ExprPtr body = seq();
            // `let rec f x = e in f` is the concrete form of a recursive closure value.
            if (const auto* v = body->as<Var>(); v != nullptr && v->name == name) {
                return make(RecClosure{name, param, fbody});
            }
            return make(LetRec{name, param, fbody, body});
        }
        if (peek() == Tok::Ident && starts_atomic_pattern(peek(1))) {
            const Token& name_tok = take();
            std::vector<PatternPtr> params = atomic_params();
            expect(Tok::Eq, "'='");
            ExprPtr bound = with_params(params, 0, [&] { return seq(); });
            expect(Tok::In, "'in'");
            Scope scope(*this, {name_tok.text});
            return make(Let{make_pattern(PVar{name_tok.text}), bound, seq()});
        }
        PatternPtr binding = checked(pattern());
        expect(Tok::Eq, "'='");
        ExprPtr bound = seq();
        expect(Tok::In, "'in'");
        Scope scope(*this, pattern_vars(*binding));
        return make(Let{binding, bound, seq()});
    }

    Clauses clauses() {
        Clauses out;
        accept(Tok::Bar);
        do {
            PatternPtr p = checked(pattern());
            expect(Tok::Arrow, "'->'");
            Scope scope(*this, pattern_vars(*p));
            out.push_back(Clause{p, seq()});
        } while (accept(Tok::Bar));
        return out;
    }

    // --- patterns ---

    PatternPtr checked(PatternPtr p) {
        auto names = pattern_vars(*p);
        std::sort(names.begin(), names.end());
        auto dup = std::adjacent_find(names.begin(), names.end());
        if (dup != names.end()) fail("variable " + *dup + " is bound several times in this pattern");
        return p;
    }

    static bool starts_atomic_pattern(Tok t) {
        switch (t) {
            case Tok::Ident: case Tok::Underscore: case Tok::Int: case Tok::Str: case Tok::True:
            case Tok::False: case Tok::LParen: case Tok::LBracket: case Tok::UIdent:
                return true;
            default:
                return false;
        }
    }

    PatternPtr pattern() {
        Nest nest(*this);
        PatternPtr first = cons_pattern();
        if (peek() != Tok::Comma) return first;
        std::vector<PatternPtr> items{first};
        while (accept(Tok::Comma)) items.push_back(cons_pattern());
        return make_pattern(PTuple{std::move(items)});
    }

    PatternPtr cons_pattern() {
        PatternPtr head = atomic_pattern_or_negative();
        if (!accept(Tok::ColonColon)) return head;
        Nest nest(*this);
        return make_pattern(PCons{head, cons_pattern()});
    }

    PatternPtr atomic_pattern_or_negative() {
        if (peek() == Tok::Minus && peek(1) == Tok::Int) {
            take();
            return make_pattern(PInt{negated_literal(take())});
        }
        return atomic_pattern();
    }

    PatternPtr atomic_pattern() {
        const Token& t = current();
        switch (t.kind) {
            case Tok::Ident: take(); return make_pattern(PVar{t.text});
            case Tok::Underscore: take(); return make_pattern(PWild{});
            case Tok::Int:
                take();
                if (t.magnitude > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                    throw SyntaxError("integer literal exceeds the representable range", t.span);
                }
                return make_pattern(PInt{static_cast<std::int64_t>(t.magnitude)});
            case Tok::Str: take(); return make_pattern(PStr{t.text});
            case Tok::True: take(); return make_pattern(PBool{true});
            case Tok::False: take(); return make_pattern(PBool{false});
            case Tok::UIdent:
                take();
                if (!is_known_tag(t.text)) {
                    throw SyntaxError("unknown constructor " + t.text, t.span);
                }
                return make_pattern(PTag{t.text});
            case Tok::LParen: {
                Nest nest(*this);
                take();
                if (accept(Tok::RParen)) return make_pattern(PUnit{});
                PatternPtr p = pattern();
                expect(Tok::RParen, "')'");
                return p;
            }
            case Tok::LBracket: {
                Nest nest(*this);
                take();
                std::vector<PatternPtr> items;
                if (!accept(Tok::RBracket)) {
                    items.push_back(pattern());
                    while (accept(Tok::Semi)) {
                        if (peek() == Tok::RBracket) break;
                        items.push_back(pattern());
                    }
                    expect(Tok::RBracket, "']'");
                }
                PatternPtr list = make_pattern(PNil{});
                for (auto it = items.rbegin(); it != items.rend(); ++it) {
                    list = make_pattern(PCons{*it, list});
                }
                return list;
            }
            default:
                fail("expected a pattern");
        }
    }
};

}  // namespace

Program parse_program(std::string_view src) {
    Parser parser(Lexer(src).run(), ParseOptions{});
    return parser.program();
}

ExprPtr parse_expr(std::string_view src, const ParseOptions& options) {
    return parse_annotated_expr(src, options).expr;
}

AnnotatedExpr parse_annotated_expr(std::string_view src, const ParseOptions& options) {
    Parser parser(Lexer(src).run(), options);
    ExprPtr e = parser.single_expression();
    return AnnotatedExpr{e, parser.take_attributes()};
}

std::set<std::string> global_names(const Program& p) {
    std::set<std::string> names;
    for (const auto& item : p.items) {
        if (const auto* d = std::get_if<Define>(&item)) names.insert(d->name);
        if (const auto* d = std::get_if<DefineRec>(&item)) names.insert(d->name);
    }
    return names;
}

}  // namespace ministep
