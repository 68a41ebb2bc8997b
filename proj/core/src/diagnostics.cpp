#include "rabbit/diagnostics.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rabbit {

const char* errorKindName(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnknownName: return "unknown-name";
    case ErrorKind::Type: return "type";
    case ErrorKind::Cardinality: return "cardinality";
    case ErrorKind::Arity: return "arity";
    case ErrorKind::Tag: return "tag";
    case ErrorKind::Runtime: return "runtime";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Data: return "data";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

LineCol locate(const std::string& source, std::size_t offset) {
    LineCol lc;
    offset = std::min(offset, source.size());
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < offset; ++i) {
        if (source[i] == '\n') {
            ++lc.line;
            line_start = i + 1;
        }
    }
    lc.col = offset - line_start + 1;
    return lc;
}

namespace {

std::string excerptLine(const std::string& source, std::size_t offset, std::size_t* col_out) {
    offset = std::min(offset, source.size());
    std::size_t begin = source.rfind('\n', offset == 0 ? 0 : offset - 1);
    begin = (begin == std::string::npos) ? 0 : begin + 1;
    if (offset > 0 && offset <= source.size() && begin > offset) begin = offset;
    std::size_t end = source.find('\n', offset);
    if (end == std::string::npos) end = source.size();
    *col_out = offset - begin;
    return source.substr(begin, end - begin);
}

} // namespace

std::string Diagnostic::render(const std::string& source) const {
    LineCol lc = locate(source, span.begin);
    std::ostringstream out;
    out << "error[" << errorKindName(kind) << "] at " << lc.line << ":" << lc.col
        << " — " << message;
    if (!source.empty()) {
        std::size_t col = 0;
        std::string line = excerptLine(source, span.begin, &col);
        out << "\n  " << line << "\n  ";
        for (std::size_t i = 0; i < col; ++i) out << ' ';
        std::size_t width = span.end > span.begin ? span.end - span.begin : 1;
        width = std::min(width, line.size() - std::min(col, line.size()) + 1);
        for (std::size_t i = 0; i < std::max<std::size_t>(width, 1); ++i) out << '^';
    }
    return out.str();
}

std::string Diagnostic::renderJson(const std::string& source) const {
    LineCol lc = locate(source, span.begin);
    nlohmann::ordered_json j{
        {"kind", errorKindName(kind)},
        {"line", lc.line},
        {"col", lc.col},
        {"message", message},
        {"span", {{"begin", span.begin}, {"end", span.end}}},
    };
    return j.dump();
}

} // namespace rabbit
