#include <cctype>

#include "rabbit/syntax.hpp"

namespace rabbit {

namespace {

bool isIdentStart(unsigned char c) { return std::isalpha(c); }
bool isIdentContinue(unsigned char c) { return std::isalnum(c) || c == '_'; }

} // namespace

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
        tokens.push_back(Token{kind, text.substr(begin, end - begin), {begin, end}});
    };

    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        if (isIdentStart(c)) {
            ++i;
            while (i < n && isIdentContinue(static_cast<unsigned char>(text[i]))) ++i;
            push(TokenKind::Identifier, begin, i);
            continue;
        }
        if (std::isdigit(c)) {
            ++i;
            while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
            Token tok{TokenKind::IntLiteral, text.substr(begin, i - begin), {begin, i}};
            try {
                (void)std::stoll(tok.lexeme);
            } catch (const std::out_of_range&) {
                throw QueryError(ErrorKind::Syntax, "integer literal is out of range", tok.span);
            }
            tokens.push_back(std::move(tok));
            continue;
        }
        if (c == '"') {
            std::string value;
            ++i;
            bool closed = false;
            while (i < n) {
                char d = text[i];
                if (d == '"') {
                    ++i;
                    closed = true;
                    break;
                }
                if (d == '\\') {
                    if (i + 1 >= n) break;
                    char e = text[i + 1];
                    if (e != '"' && e != '\\') {
                        throw QueryError(ErrorKind::Syntax,
                                         std::string("unsupported escape '\\") + e + "'",
                                         {i, i + 2});
                    }
                    value.push_back(e);
                    i += 2;
                    continue;
                }
                value.push_back(d);
                ++i;
            }
            if (!closed) {
                throw QueryError(ErrorKind::Syntax, "unterminated string literal", {begin, n});
            }
            tokens.push_back(Token{TokenKind::TextLiteral, std::move(value), {begin, i}});
            continue;
        }
        // ÷ (U+00F7) is a synonym for /.
        if (c == 0xC3 && i + 1 < n && static_cast<unsigned char>(text[i + 1]) == 0xB7) {
            i += 2;
            push(TokenKind::Slash, begin, i);
            continue;
        }
        auto two = [&](char second, TokenKind kind) -> bool {
            if (i + 1 < n && text[i + 1] == second) {
                i += 2;
                push(kind, begin, i);
                return true;
            }
            return false;
        };
        switch (c) {
        case '.': ++i; push(TokenKind::Dot, begin, i); continue;
        case ':': ++i; push(TokenKind::Colon, begin, i); continue;
        case ',': ++i; push(TokenKind::Comma, begin, i); continue;
        case '(': ++i; push(TokenKind::LParen, begin, i); continue;
        case ')': ++i; push(TokenKind::RParen, begin, i); continue;
        case '=':
            if (two('>', TokenKind::Arrow)) continue;
            ++i;
            push(TokenKind::Eq, begin, i);
            continue;
        case '!':
            if (two('=', TokenKind::Ne)) continue;
            throw QueryError(ErrorKind::Syntax, "expected '=' after '!'", {begin, begin + 1});
        case '<':
            if (two('=', TokenKind::Le)) continue;
            ++i;
            push(TokenKind::Lt, begin, i);
            continue;
        case '>':
            if (two('=', TokenKind::Ge)) continue;
            ++i;
            push(TokenKind::Gt, begin, i);
            continue;
        case '&': ++i; push(TokenKind::Amp, begin, i); continue;
        case '|': ++i; push(TokenKind::Pipe, begin, i); continue;
        case '+': ++i; push(TokenKind::Plus, begin, i); continue;
        case '-': ++i; push(TokenKind::Minus, begin, i); continue;
        case '*': ++i; push(TokenKind::Star, begin, i); continue;
        case '/': ++i; push(TokenKind::Slash, begin, i); continue;
        default:
            throw QueryError(ErrorKind::Syntax,
                             "illegal character '" + text.substr(begin, 1) + "'",
                             {begin, begin + 1});
        }
    }
    tokens.push_back(Token{TokenKind::End, "", {n, n}});
    return tokens;
}

} // namespace rabbit
