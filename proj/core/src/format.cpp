#include <sstream>

#include "rabbit/syntax.hpp"

namespace rabbit {

namespace {

// Printer precedence, loosest to tightest. Matches the grammar levels so the
// round-trip parse(format(e)) == e holds.
enum Level : int {
    LevelTagged = 0,
    LevelPipeline = 1,
    LevelOr = 2,
    LevelAnd = 3,
    LevelCmp = 4,
    LevelAdd = 5,
    LevelMul = 6,
    LevelCompose = 7,
    LevelAtom = 8,
};

int opLevel(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return LevelOr;
    case BinaryOp::And: return LevelAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return LevelAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div: return LevelMul;
    default: return LevelCmp;
    }
}

int nodeLevel(const QueryExpr& e) {
    switch (e.kind) {
    case QueryExpr::Kind::Name:
    case QueryExpr::Kind::IntLit:
    case QueryExpr::Kind::TextLit:
        return LevelAtom;
    case QueryExpr::Kind::Apply:
        return e.children.empty() ? LevelAtom : LevelPipeline;
    case QueryExpr::Kind::Compose:
        return nodeLevel(*e.children[0]) == LevelPipeline ? LevelPipeline : LevelCompose;
    case QueryExpr::Kind::BinOp:
        return opLevel(e.op);
    case QueryExpr::Kind::Tagged:
        return LevelTagged;
    }
    return LevelAtom;
}

std::string quoteText(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void emit(const QueryExpr& e, int minLevel, std::ostringstream& out);

void emitApply(const QueryExpr& e, int minLevel, std::ostringstream& out) {
    if (e.children.empty()) {
        out << e.name << "()";
        return;
    }
    // At a tight position the function spelling avoids parentheses and parses
    // to the same tree; otherwise the pipeline spelling is canonical. A tagged
    // first argument cannot front a pipeline, so it also forces the function
    // spelling.
    if (minLevel > LevelPipeline || e.children[0]->kind == QueryExpr::Kind::Tagged) {
        out << e.name << '(';
        for (std::size_t i = 0; i < e.children.size(); ++i) {
            if (i) out << ", ";
            emit(*e.children[i], LevelTagged, out);
        }
        out << ')';
        return;
    }
    emit(*e.children[0], LevelPipeline, out);
    out << ':' << e.name;
    if (e.children.size() > 1) {
        out << '(';
        for (std::size_t i = 1; i < e.children.size(); ++i) {
            if (i > 1) out << ", ";
            emit(*e.children[i], LevelTagged, out);
        }
        out << ')';
    }
}

void emit(const QueryExpr& e, int minLevel, std::ostringstream& out) {
    const int level = nodeLevel(e);
    const bool parens = level < minLevel && e.kind != QueryExpr::Kind::Apply;
    if (parens) out << '(';
    const int inner = parens ? LevelPipeline : minLevel;
    switch (e.kind) {
    case QueryExpr::Kind::Name:
        out << e.name;
        break;
    case QueryExpr::Kind::IntLit:
        out << e.intValue;
        break;
    case QueryExpr::Kind::TextLit:
        out << quoteText(e.textValue);
        break;
    case QueryExpr::Kind::Apply:
        emitApply(e, inner, out);
        break;
    case QueryExpr::Kind::Compose: {
        const int lhs_level = nodeLevel(*e.children[0]) == LevelPipeline && inner <= LevelPipeline
                                  ? LevelPipeline
                                  : LevelCompose;
        emit(*e.children[0], lhs_level, out);
        out << '.';
        emit(*e.children[1], LevelAtom, out);
        break;
    }
    case QueryExpr::Kind::BinOp: {
        const int lv = opLevel(e.op);
        const bool left_assoc = lv != LevelCmp;
        emit(*e.children[0], left_assoc ? lv : lv + 1, out);
        out << ' ' << binaryOpToken(e.op) << ' ';
        emit(*e.children[1], lv + 1, out);
        break;
    }
    case QueryExpr::Kind::Tagged:
        out << e.name << " => ";
        emit(*e.children[0], LevelPipeline, out);
        break;
    }
    if (parens) out << ')';
}

} // namespace

std::string format(const QueryExpr& expr) {
    std::ostringstream out;
    emit(expr, LevelTagged, out);
    return out.str();
}

} // namespace rabbit
