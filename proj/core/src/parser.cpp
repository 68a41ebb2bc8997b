#include "rabbit/syntax.hpp"

namespace rabbit {

ExprPtr QueryExpr::makeName(std::string name, SourceSpan span) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::Name;
    e->name = std::move(name);
    e->span = span;
    return e;
}

ExprPtr QueryExpr::makeInt(std::int64_t value, SourceSpan span) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::IntLit;
    e->intValue = value;
    e->span = span;
    return e;
}

ExprPtr QueryExpr::makeText(std::string value, SourceSpan span) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::TextLit;
    e->textValue = std::move(value);
    e->span = span;
    return e;
}

ExprPtr QueryExpr::makeCompose(ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::Compose;
    e->span = {lhs->span.begin, rhs->span.end};
    e->children = {std::move(lhs), std::move(rhs)};
    return e;
}

ExprPtr QueryExpr::makeApply(std::string head, std::vector<ExprPtr> args, SourceSpan span) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::Apply;
    e->name = std::move(head);
    e->span = span;
    if (span.begin == 0 && span.end == 0 && !args.empty()) {
        e->span = {args.front()->span.begin, args.back()->span.end};
    }
    e->children = std::move(args);
    return e;
}

ExprPtr QueryExpr::makeTagged(std::string tag, ExprPtr expr, SourceSpan span) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::Tagged;
    e->name = std::move(tag);
    e->span = span.end > 0 ? span : expr->span;
    e->children = {std::move(expr)};
    return e;
}

ExprPtr QueryExpr::makeBinOp(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<QueryExpr>();
    e->kind = Kind::BinOp;
    e->op = op;
    e->span = {lhs->span.begin, rhs->span.end};
    e->children = {std::move(lhs), std::move(rhs)};
    return e;
}

bool exprEqual(const QueryExpr& a, const QueryExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case QueryExpr::Kind::Name:
        return a.name == b.name;
    case QueryExpr::Kind::IntLit:
        return a.intValue == b.intValue;
    case QueryExpr::Kind::TextLit:
        return a.textValue == b.textValue;
    case QueryExpr::Kind::Apply:
    case QueryExpr::Kind::Tagged:
        if (a.name != b.name) return false;
        break;
    case QueryExpr::Kind::BinOp:
        if (a.op != b.op) return false;
        break;
    case QueryExpr::Kind::Compose:
        break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!exprEqual(*a.children[i], *b.children[i])) return false;
    }
    return true;
}

const char* binaryOpToken(BinaryOp op) {
    switch (op) {
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&";
    case BinaryOp::Or: return "|";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    }
    return "?";
}

namespace {

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ExprPtr parseTop() {
        ExprPtr e = parsePipeline();
        if (!at(TokenKind::End)) {
            if (at(TokenKind::Arrow)) {
                fail("'=>' is only allowed inside argument lists");
            }
            fail("unexpected '" + peek().lexeme + "' after the end of the query");
        }
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    bool at(TokenKind kind) const { return peek().kind == kind; }
    const Token& advance() { return tokens_[pos_++]; }
    [[noreturn]] void fail(const std::string& message) const {
        throw QueryError(ErrorKind::Syntax, message, peek().span);
    }
    const Token& expect(TokenKind kind, const char* what) {
        if (!at(kind)) fail(std::string("expected ") + what);
        return advance();
    }

    // Loosest level. `p:F(args)` desugars to F(p, args...) immediately; a
    // composition may continue on the pipeline result, as in
    // `employee:group(department).department`.
    ExprPtr parsePipeline() {
        ExprPtr e = parseOr();
        for (;;) {
            if (at(TokenKind::Colon)) {
                advance();
                const Token& head = expect(TokenKind::Identifier, "a combinator name after ':'");
                const std::size_t begin = e->span.begin;
                std::size_t end = head.span.end;
                std::vector<ExprPtr> args;
                args.push_back(std::move(e));
                if (at(TokenKind::LParen)) {
                    parseArgList(&args);
                    end = tokens_[pos_ - 1].span.end;
                }
                e = QueryExpr::makeApply(head.lexeme, std::move(args), {begin, end});
                continue;
            }
            if (at(TokenKind::Dot)) {
                advance();
                ExprPtr rhs = parseUnit();
                e = QueryExpr::makeCompose(std::move(e), std::move(rhs));
                continue;
            }
            break;
        }
        return e;
    }

    ExprPtr parseOr() {
        ExprPtr e = parseAnd();
        while (at(TokenKind::Pipe)) {
            advance();
            e = QueryExpr::makeBinOp(BinaryOp::Or, std::move(e), parseAnd());
        }
        return e;
    }

    ExprPtr parseAnd() {
        ExprPtr e = parseComparison();
        while (at(TokenKind::Amp)) {
            advance();
            e = QueryExpr::makeBinOp(BinaryOp::And, std::move(e), parseComparison());
        }
        return e;
    }

    static bool comparisonOp(TokenKind kind, BinaryOp* op) {
        switch (kind) {
        case TokenKind::Eq: *op = BinaryOp::Eq; return true;
        case TokenKind::Ne: *op = BinaryOp::Ne; return true;
        case TokenKind::Lt: *op = BinaryOp::Lt; return true;
        case TokenKind::Le: *op = BinaryOp::Le; return true;
        case TokenKind::Gt: *op = BinaryOp::Gt; return true;
        case TokenKind::Ge: *op = BinaryOp::Ge; return true;
        default: return false;
        }
    }

    ExprPtr parseComparison() {
        ExprPtr e = parseAdditive();
        BinaryOp op;
        if (comparisonOp(peek().kind, &op)) {
            advance();
            ExprPtr rhs = parseAdditive();
            BinaryOp next;
            if (comparisonOp(peek().kind, &next)) {
                fail("comparison operators do not chain; parenthesize one side");
            }
            e = QueryExpr::makeBinOp(op, std::move(e), std::move(rhs));
        }
        return e;
    }

    ExprPtr parseAdditive() {
        ExprPtr e = parseMultiplicative();
        for (;;) {
            if (at(TokenKind::Plus)) {
                advance();
                e = QueryExpr::makeBinOp(BinaryOp::Add, std::move(e), parseMultiplicative());
            } else if (at(TokenKind::Minus)) {
                advance();
                e = QueryExpr::makeBinOp(BinaryOp::Sub, std::move(e), parseMultiplicative());
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr parseMultiplicative() {
        ExprPtr e = parseCompose();
        for (;;) {
            if (at(TokenKind::Star)) {
                advance();
                e = QueryExpr::makeBinOp(BinaryOp::Mul, std::move(e), parseCompose());
            } else if (at(TokenKind::Slash)) {
                advance();
                e = QueryExpr::makeBinOp(BinaryOp::Div, std::move(e), parseCompose());
            } else {
                break;
            }
        }
        return e;
    }

    ExprPtr parseCompose() {
        ExprPtr e = parseUnit();
        while (at(TokenKind::Dot)) {
            advance();
            e = QueryExpr::makeCompose(std::move(e), parseUnit());
        }
        return e;
    }

    ExprPtr parseUnit() {
        const Token& tok = peek();
        switch (tok.kind) {
        case TokenKind::IntLiteral: {
            advance();
            return QueryExpr::makeInt(std::stoll(tok.lexeme), tok.span);
        }
        case TokenKind::TextLiteral: {
            advance();
            return QueryExpr::makeText(tok.lexeme, tok.span);
        }
        case TokenKind::Identifier: {
            advance();
            if (at(TokenKind::LParen)) {
                std::vector<ExprPtr> args;
                parseArgList(&args);
                return QueryExpr::makeApply(tok.lexeme, std::move(args),
                                            {tok.span.begin, tokens_[pos_ - 1].span.end});
            }
            return QueryExpr::makeName(tok.lexeme, tok.span);
        }
        case TokenKind::LParen: {
            advance();
            ExprPtr e = parsePipeline();
            expect(TokenKind::RParen, "')'");
            return e;
        }
        case TokenKind::Arrow:
            fail("'=>' is only allowed inside argument lists");
        default:
            fail("expected a name, literal, or '('");
        }
    }

    void parseArgList(std::vector<ExprPtr>* args) {
        expect(TokenKind::LParen, "'('");
        if (at(TokenKind::RParen)) {
            advance();
            return;
        }
        for (;;) {
            args->push_back(parseArg());
            if (at(TokenKind::Comma)) {
                advance();
                continue;
            }
            expect(TokenKind::RParen, "')' or ','");
            return;
        }
    }

    ExprPtr parseArg() {
        if (at(TokenKind::Identifier) && peek(1).kind == TokenKind::Arrow) {
            const Token& tag = advance();
            advance(); // =>
            ExprPtr body = parsePipeline();
            if (at(TokenKind::Arrow)) {
                fail("'=>' does not chain; a tag binds one expression");
            }
            const SourceSpan span{tag.span.begin, body->span.end};
            return QueryExpr::makeTagged(tag.lexeme, std::move(body), span);
        }
        return parsePipeline();
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace

ExprPtr parse(const std::string& text) {
    Parser parser(tokenize(text));
    return parser.parseTop();
}

} // namespace rabbit
