#ifndef RABBIT_SYNTAX_HPP
#define RABBIT_SYNTAX_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rabbit/diagnostics.hpp"

namespace rabbit {

enum class TokenKind {
    Identifier,
    IntLiteral,
    TextLiteral,
    Dot,        // .
    Colon,      // :
    Comma,      // ,
    LParen,     // (
    RParen,     // )
    Arrow,      // =>
    Eq,         // =
    Ne,         // !=
    Lt,         // <
    Le,         // <=
    Gt,         // >
    Ge,         // >=
    Amp,        // &
    Pipe,       // |
    Plus,       // +
    Minus,      // -
    Star,       // *
    Slash,      // / and ÷
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string lexeme;
    SourceSpan span;
};

/// Longest-match lexer. Identifiers are a letter followed by letters, digits,
/// or underscores; text literals are double-quoted with \" and \\ escapes;
/// ÷ (U+00F7) lexes as division. Throws QueryError (Syntax) on unterminated
/// strings and illegal characters.
std::vector<Token> tokenize(const std::string& text);

struct QueryExpr;
using ExprPtr = std::shared_ptr<const QueryExpr>;

enum class BinaryOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Add,
    Sub,
    Mul,
    Div,
};

const char* binaryOpToken(BinaryOp op);

/// Surface AST. Pipelines desugar during parsing, so `p:F(q)` and `F(p, q)`
/// produce identical trees; the formatter picks the pipeline spelling back.
struct QueryExpr {
    enum class Kind {
        Name,
        IntLit,
        TextLit,
        Compose, // lhs . rhs
        Apply,   // head(args...)
        Tagged,  // tag => expr, only as a direct Apply argument
        BinOp,
    };

    Kind kind;
    SourceSpan span;

    std::string name;       // Name, Apply head, Tagged tag
    std::int64_t intValue = 0;
    std::string textValue;
    BinaryOp op = BinaryOp::Eq;
    std::vector<ExprPtr> children; // Compose: [lhs, rhs]; Apply: args; Tagged: [expr]; BinOp: [lhs, rhs]

    static ExprPtr makeName(std::string name, SourceSpan span = {});
    static ExprPtr makeInt(std::int64_t value, SourceSpan span = {});
    static ExprPtr makeText(std::string value, SourceSpan span = {});
    static ExprPtr makeCompose(ExprPtr lhs, ExprPtr rhs);
    static ExprPtr makeApply(std::string head, std::vector<ExprPtr> args, SourceSpan span = {});
    static ExprPtr makeTagged(std::string tag, ExprPtr expr, SourceSpan span = {});
    static ExprPtr makeBinOp(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
};

/// Structural equality (spans ignored).
bool exprEqual(const QueryExpr& a, const QueryExpr& b);

/// Parses query text to a desugared AST. Throws QueryError (Syntax).
ExprPtr parse(const std::string& text);

/// Canonical pretty-printer; parse(format(e)) is structurally equal to e.
std::string format(const QueryExpr& expr);

} // namespace rabbit

#endif
