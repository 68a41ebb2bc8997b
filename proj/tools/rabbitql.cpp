// rabbitql: command-line front end for the query engine. Loads a schema and
// data file, then runs queries from the command line, a corpus file, or an
// interactive REPL.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rabbit/engine.hpp"
#include "rabbit/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitQueryError = 1;
constexpr int kExitConfigError = 2;

struct Session {
    rabbit::Database db;
    std::string outputMode;      // "json" | "table"
    std::string diagnosticsMode; // "human" | "json"
};

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw rabbit::QueryError(rabbit::ErrorKind::Io, "cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void printDiagnostic(const Session& session, const rabbit::Diagnostic& diag,
                     const std::string& source) {
    if (session.diagnosticsMode == "json") {
        std::cerr << diag.renderJson(source) << "\n";
    } else {
        std::cerr << diag.render(source) << "\n";
    }
}

std::string cellText(const rabbit::Database& db, const rabbit::Value& v) {
    using rabbit::Value;
    switch (v.kind()) {
    case Value::Kind::Bool:
        return v.asBool() ? "true" : "false";
    case Value::Kind::Int:
        return std::to_string(v.asInt());
    case Value::Kind::Num: {
        return nlohmann::ordered_json(v.asNum()).dump();
    }
    case Value::Kind::Text:
        return v.asText();
    case Value::Kind::Missing:
        return "";
    case Value::Kind::Some:
        return cellText(db, v.someInner());
    default:
        return rabbit::valueToJsonText(db, v); // nested containers inline
    }
}

void printTable(std::ostream& out, const std::vector<std::string>& headers,
                const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    auto emitRow = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << "  ";
            out << cells[c];
            if (c + 1 < cells.size()) {
                out << std::string(widths[c] - cells[c].size(), ' ');
            }
        }
        out << "\n";
    };
    emitRow(headers);
    std::vector<std::string> rule;
    for (std::size_t w : widths) rule.push_back(std::string(w, '-'));
    emitRow(rule);
    for (const auto& row : rows) emitRow(row);
}

/// Sequences of records render as aligned columns with a header row taken
/// from the record tags; anything else falls back to JSON.
void renderTable(const Session& session, const rabbit::Signature& sig, const rabbit::Value& value,
                 std::ostream& out) {
    using rabbit::Cardinality;
    using rabbit::DataType;
    using rabbit::Value;
    if (sig.card == Cardinality::Seq && sig.output.isRecord()) {
        std::vector<std::string> headers;
        for (const auto& field : sig.output.record().fields) headers.push_back(field.tag);
        std::vector<std::vector<std::string>> rows;
        for (const Value& rec : value.items()) {
            std::vector<std::string> cells;
            for (const auto& [tag, field] : rec.fields()) {
                cells.push_back(cellText(session.db, field));
            }
            rows.push_back(std::move(cells));
        }
        printTable(out, headers, rows);
        return;
    }
    if (sig.card == Cardinality::Seq && sig.output.isScalar()) {
        std::vector<std::vector<std::string>> rows;
        for (const Value& item : value.items()) {
            rows.push_back({cellText(session.db, item)});
        }
        printTable(out, {"value"}, rows);
        return;
    }
    if (sig.output.isScalar() && sig.card != Cardinality::Seq) {
        out << cellText(session.db, value) << "\n";
        return;
    }
    out << rabbit::valueToJsonText(session.db, value) << "\n";
}

int runOne(Session& session, const std::string& text, std::ostream& out) {
    try {
        rabbit::CompiledQuery query = rabbit::compileQuery(session.db, text);
        rabbit::Value result = rabbit::run(session.db, query);
        if (session.outputMode == "table") {
            renderTable(session, query.signature(), result, out);
        } else {
            out << rabbit::valueToJsonText(session.db, result) << "\n";
        }
        return kExitOk;
    } catch (const rabbit::QueryError& e) {
        printDiagnostic(session, e.diagnostic(), text);
        return kExitQueryError;
    }
}

int runCorpusFile(Session& session, const std::string& path) {
    std::string content;
    try {
        content = readFile(path);
    } catch (const rabbit::QueryError& e) {
        printDiagnostic(session, e.diagnostic(), "");
        return kExitConfigError;
    }
    std::istringstream lines(content);
    std::string line;
    int status = kExitOk;
    while (std::getline(lines, line)) {
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        if (runOne(session, trimmed, std::cout) != kExitOk) status = kExitQueryError;
    }
    return status;
}

void repl(Session& session) {
    rabbit::DataType scope = rabbit::DataType::voidType();
    std::string line;
    std::cerr << "rabbitql: type a query, :sig <query>, :at <Class|Void>, or :quit\n";
    for (;;) {
        std::cerr << "rabbit[" << scope.display() << "]> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\r')) {
            trimmed.pop_back();
        }
        if (trimmed.empty()) continue;
        if (trimmed == ":quit" || trimmed == ":q") break;
        if (trimmed.rfind(":at", 0) == 0) {
            std::string name = trimmed.size() > 3 ? trimmed.substr(4) : "";
            if (name.empty() || name == "Void") {
                scope = rabbit::DataType::voidType();
            } else if (session.db.schema().findClass(name)) {
                scope = rabbit::DataType::entity(name);
            } else {
                std::cout << "no such class: " << name << "\n";
            }
            continue;
        }
        if (trimmed.rfind(":sig", 0) == 0) {
            std::string text = trimmed.size() > 4 ? trimmed.substr(5) : "";
            try {
                rabbit::CompiledQuery q = rabbit::compileQuery(session.db, text, scope);
                std::cout << q.signature().display() << "\n";
            } catch (const rabbit::QueryError& e) {
                printDiagnostic(session, e.diagnostic(), text);
            }
            continue;
        }
        if (trimmed[0] == ':') {
            std::cout << "unknown command: " << trimmed << "\n";
            continue;
        }
        if (!scope.isVoid()) {
            // Only Void queries can evaluate; show the signature instead.
            try {
                rabbit::CompiledQuery q = rabbit::compileQuery(session.db, trimmed, scope);
                std::cout << q.signature().display() << "\n";
            } catch (const rabbit::QueryError& e) {
                printDiagnostic(session, e.diagnostic(), trimmed);
            }
            continue;
        }
        runOne(session, trimmed, std::cout);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rabbitql: combinator query language over an in-memory functional database"};

    std::string schema_path;
    std::string data_path;
    std::string query_text;
    std::string file_path;
    std::string output_mode;
    std::string diagnostics_mode = "human";

    app.add_option("-s,--schema", schema_path, "schema JSON file")->required();
    app.add_option("-d,--data", data_path, "data JSON file")->required();
    app.add_option("-q,--query", query_text, "query text to run");
    app.add_option("-f,--file", file_path, "corpus file: one query per line, # comments");
    app.add_option("--output", output_mode, "output mode: json or table")
        ->check(CLI::IsMember({"json", "table"}));
    app.add_option("--diagnostics", diagnostics_mode, "diagnostics mode: human or json")
        ->check(CLI::IsMember({"human", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (output_mode.empty()) {
        const char* env = std::getenv("RABBITQL_OUTPUT");
        output_mode = env && std::string(env) == "table" ? "table" : "json";
    }

    Session session;
    session.outputMode = output_mode;
    session.diagnosticsMode = diagnostics_mode;
    try {
        rabbit::Schema schema = rabbit::loadSchema(readFile(schema_path));
        session.db = rabbit::loadData(schema, readFile(data_path));
    } catch (const rabbit::QueryError& e) {
        printDiagnostic(session, e.diagnostic(), "");
        return kExitConfigError;
    }

    if (!query_text.empty()) return runOne(session, query_text, std::cout);
    if (!file_path.empty()) return runCorpusFile(session, file_path);
    repl(session);
    return kExitOk;
}
