#pragma once

// Recursive-descent parser for the .wpi concrete syntax.
//
//   process  := par
//   par      := alt ('|' alt)*
//   alt      := atom ('+' input)*        -- '+' joins input-guarded atoms
//   atom     := '0' | output | input | '*' input | restrict | unit | '(' process ')'
//   output   := name '!' '(' names? ')'
//   input    := name '?' '(' names? ')' '.' atom
//   restrict := 'new' name (',' name)* 'in' process      -- extends maximally right
//   unit     := 'unit' name? '{' process ';' process '}'
//
// '#' starts a line comment; names match [A-Za-z_][A-Za-z0-9_']* but a
// leading '_' is reserved for machine-generated names and rejected.

#include <cctype>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "term.hpp"

namespace webpi {

struct SourceSpan {
    int line = 1;   // 1-based
    int column = 1; // 1-based
    int length = 1;
};

struct ParseError {
    std::string message;
    SourceSpan span;
    std::vector<std::string> expected;
};

using ParseResult = std::variant<ProcessPtr, ParseError>;

namespace detail {

struct Token {
    enum Kind {
        Name, Zero, Bang, Query, Star, Plus, Pipe, Dot, LParen, RParen,
        LBrace, RBrace, Semi, Comma, KwNew, KwIn, KwUnit, End, Bad
    } kind;
    std::string text;
    SourceSpan span;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        SourceSpan span{line_, col_, 1};
        if (pos_ >= src_.size()) return {Token::End, "", span};
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < src_.size()) {
                char d = src_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'') {
                    word += d;
                    advance();
                } else {
                    break;
                }
            }
            span.length = static_cast<int>(word.size());
            if (word == "new") return {Token::KwNew, word, span};
            if (word == "in") return {Token::KwIn, word, span};
            if (word == "unit") return {Token::KwUnit, word, span};
            return {Token::Name, word, span};
        }
        advance();
        switch (c) {
            case '0': return {Token::Zero, "0", span};
            case '!': return {Token::Bang, "!", span};
            case '?': return {Token::Query, "?", span};
            case '*': return {Token::Star, "*", span};
            case '+': return {Token::Plus, "+", span};
            case '|': return {Token::Pipe, "|", span};
            case '.': return {Token::Dot, ".", span};
            case '(': return {Token::LParen, "(", span};
            case ')': return {Token::RParen, ")", span};
            case '{': return {Token::LBrace, "{", span};
            case '}': return {Token::RBrace, "}", span};
            case ';': return {Token::Semi, ";", span};
            case ',': return {Token::Comma, ",", span};
            default: return {Token::Bad, std::string(1, c), span};
        }
    }

  private:
    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
};

class Parser {
  public:
    explicit Parser(std::string_view src) : lexer_(src) { cur_ = lexer_.next(); }

    ParseResult parse_all() {
        ProcessPtr p = parse_process();
        if (error_) return *error_;
        if (cur_.kind != Token::End) {
            fail("unexpected trailing input", {"end of input"});
            return *error_;
        }
        return p;
    }

  private:
    Lexer lexer_;
    Token cur_;
    std::optional<ParseError> error_;

    void bump() { cur_ = lexer_.next(); }

    void fail(const std::string& msg, std::vector<std::string> expected) {
        if (!error_) error_ = ParseError{msg, cur_.span, std::move(expected)};
    }

    bool expect(Token::Kind kind, const char* what) {
        if (error_) return false;
        if (cur_.kind != kind) {
            fail(std::string("expected ") + what, {what});
            return false;
        }
        bump();
        return true;
    }

    std::optional<Name> parse_name() {
        if (error_) return std::nullopt;
        if (cur_.kind != Token::Name) {
            fail("expected a name", {"name"});
            return std::nullopt;
        }
        if (is_reserved_name(cur_.text)) {
            fail("names starting with '_' are reserved for machine-generated names", {"name"});
            return std::nullopt;
        }
        Name n{cur_.text, 0};
        bump();
        return n;
    }

    std::vector<Name> parse_name_list_paren() {
        std::vector<Name> out;
        if (!expect(Token::LParen, "'('")) return out;
        if (cur_.kind == Token::RParen) {
            bump();
            return out;
        }
        while (true) {
            auto n = parse_name();
            if (!n) return out;
            out.push_back(*n);
            if (cur_.kind == Token::Comma) {
                bump();
                continue;
            }
            break;
        }
        expect(Token::RParen, "')'");
        return out;
    }

    ProcessPtr parse_process() { return parse_par(); }

    ProcessPtr parse_par() {
        std::vector<ProcessPtr> cs;
        cs.push_back(parse_alt());
        while (!error_ && cur_.kind == Token::Pipe) {
            bump();
            cs.push_back(parse_alt());
        }
        if (error_) return nil();
        if (cs.size() == 1) return cs[0];
        return par(std::move(cs));
    }

    ProcessPtr parse_alt() {
        ProcessPtr first = parse_atom();
        if (error_ || cur_.kind != Token::Plus) return first;
        auto* s = as<Sum>(first);
        if (!s || s->branches.size() != 1) {
            fail("only input-guarded processes can be joined with '+'", {"input"});
            return nil();
        }
        std::vector<InputBranch> branches = s->branches;
        while (!error_ && cur_.kind == Token::Plus) {
            bump();
            ProcessPtr next = parse_atom();
            if (error_) return nil();
            auto* ns = as<Sum>(next);
            if (!ns || ns->branches.size() != 1) {
                fail("only input-guarded processes can be joined with '+'", {"input"});
                return nil();
            }
            branches.push_back(ns->branches[0]);
        }
        if (error_) return nil();
        return sum(std::move(branches));
    }

    ProcessPtr parse_atom() {
        if (error_) return nil();
        switch (cur_.kind) {
            case Token::Zero:
                bump();
                return nil();
            case Token::Star: {
                bump();
                auto subj = parse_name();
                if (!subj) return nil();
                if (!expect(Token::Query, "'?'")) return nil();
                auto params = parse_name_list_paren();
                if (!expect(Token::Dot, "'.'")) return nil();
                ProcessPtr body = parse_atom();
                if (error_) return nil();
                return repl(*subj, std::move(params), std::move(body));
            }
            case Token::KwNew: {
                bump();
                std::vector<Name> binders;
                while (true) {
                    auto n = parse_name();
                    if (!n) return nil();
                    binders.push_back(*n);
                    if (cur_.kind == Token::Comma) {
                        bump();
                        continue;
                    }
                    break;
                }
                if (!expect(Token::KwIn, "'in'")) return nil();
                ProcessPtr body = parse_process(); // maximally right
                if (error_) return nil();
                for (auto it = binders.rbegin(); it != binders.rend(); ++it)
                    body = restrict_(*it, std::move(body));
                return body;
            }
            case Token::KwUnit: {
                bump();
                std::optional<Name> unit_name;
                if (cur_.kind == Token::Name) {
                    unit_name = parse_name();
                    if (!unit_name) return nil();
                }
                if (!expect(Token::LBrace, "'{'")) return nil();
                ProcessPtr body = parse_process();
                if (!expect(Token::Semi, "';'")) return nil();
                ProcessPtr handler = parse_process();
                if (!expect(Token::RBrace, "'}'")) return nil();
                if (unit_name) return workunit(std::move(body), std::move(handler), *unit_name);
                // anonymous unit: fresh restricted unit name
                Name z = fresh_reserved("_a", [&] {
                    auto ns = all_names(body);
                    auto hs = all_names(handler);
                    ns.insert(hs.begin(), hs.end());
                    return ns;
                }());
                return restrict_(z, workunit(std::move(body), std::move(handler), z));
            }
            case Token::LParen: {
                bump();
                ProcessPtr p = parse_process();
                expect(Token::RParen, "')'");
                return p;
            }
            case Token::Name: {
                auto subj = parse_name();
                if (!subj) return nil();
                if (cur_.kind == Token::Bang) {
                    bump();
                    auto args = parse_name_list_paren();
                    if (error_) return nil();
                    return output(*subj, std::move(args));
                }
                if (cur_.kind == Token::Query) {
                    bump();
                    auto params = parse_name_list_paren();
                    if (!expect(Token::Dot, "'.'")) return nil();
                    ProcessPtr cont = parse_atom();
                    if (error_) return nil();
                    return input(*subj, std::move(params), std::move(cont));
                }
                fail("expected '!' or '?' after name", {"'!'", "'?'"});
                return nil();
            }
            default:
                fail("expected a process", {"'0'", "name", "'*'", "'new'", "'unit'", "'('"});
                return nil();
        }
    }
};

} // namespace detail

inline ParseResult parse(std::string_view text) {
    return detail::Parser(text).parse_all();
}

} // namespace webpi
