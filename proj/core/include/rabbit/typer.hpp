#ifndef RABBIT_TYPER_HPP
#define RABBIT_TYPER_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rabbit/datatype.hpp"
#include "rabbit/diagnostics.hpp"
#include "rabbit/schema.hpp"
#include "rabbit/syntax.hpp"

namespace rabbit {

/// A free environment parameter: name plus the type and cardinality of the
/// query bound to it by an enclosing `given`.
struct ParamInfo {
    std::string name;
    DataType type;
    Cardinality card = Cardinality::One;
};

/// Everything the engine and callers need to know about a typed query: input
/// and output types, output cardinality, the free parameters it reads, and
/// whether it observes the input flow (around/before outside any frame).
/// A context-free query has empty params and usesFlow false.
struct Signature {
    DataType input;
    DataType output;
    Cardinality card = Cardinality::One;
    std::vector<ParamInfo> params; // sorted by name, unique
    bool usesFlow = false;

    /// `Emp -> Opt{Int}`; flow shows as `Rel{Emp}`, parameters as
    /// `Env{MS:Opt{Num}}{Emp}`.
    std::string display() const;
};

enum class TypedKind {
    Here,
    Home,
    Null,
    IntConst,
    TextConst,
    BoolConst,
    ClassExtent,  // class primitive at Void
    Attribute,
    Relationship,
    FieldAccess,  // record/quotient field
    ParamRef,
    DefineUse,    // alias expansion; re-evaluated at each use site
    Compose,
    ScalarOp,
    TextLength,
    Aggregate,
    Filter,
    Sort,
    Take,
    Unique,
    Select,
    Define,
    Connect,
    Group,
    Rollup,
    Given,
    Around,
    AroundBy,
    Before,
    Frame,
};

enum class AggregateKind { Count, Exists, Any, All, Sum, Max, Min, Mean };

struct TypedQuery;
using TypedPtr = std::shared_ptr<const TypedQuery>;

struct DefineBinding {
    std::string tag;
    TypedPtr query;
};

/// Type-annotated executable tree. One node struct covers all kinds; only the
/// fields relevant to a kind are populated.
struct TypedQuery {
    TypedKind kind;
    Signature sig;
    SourceSpan span;

    std::int64_t intValue = 0;   // IntConst
    bool boolValue = false;      // BoolConst
    std::string text;            // TextConst, member names, param names, group member tag
    std::string className;       // Attribute/Relationship/ClassExtent
    int memberIndex = -1;        // Attribute/Relationship/FieldAccess
    BinaryOp op = BinaryOp::Eq;  // ScalarOp
    AggregateKind agg = AggregateKind::Count;

    std::vector<TypedPtr> children;
    std::vector<std::string> tags;      // Select fields / Group keys / Given bindings
    std::vector<SortDirection> dirs;    // Sort/Group/Rollup keys

    /// Aliases this query's output scope exposes to downstream pipeline
    /// stages (typing-time only; the engine never reads this).
    std::vector<DefineBinding> exportedDefines;
};

/// Name resolution and signature inference. Rejects ill-formed queries with
/// QueryError; collects non-fatal warnings (e.g. a given binding that is
/// never used).
class Typer {
public:
    explicit Typer(const Schema& schema) : schema_(schema) {}

    /// `expected`, when present, is unified with the root output type; this is
    /// how an otherwise unconstrained `null` gets its type.
    TypedPtr infer(const QueryExpr& expr, const DataType& input,
                   const std::optional<DataType>& expected = std::nullopt);

    const std::vector<Diagnostic>& warnings() const { return warnings_; }
    void clearWarnings() { warnings_.clear(); }

private:
    struct Ctx {
        DataType input;
        std::vector<DefineBinding> defines; // later entries shadow earlier ones
        std::map<std::string, ParamInfo> params;
    };

    TypedPtr inferExpr(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferName(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferApply(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferBinOp(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferCompose(const QueryExpr& expr, const Ctx& ctx);

    TypedPtr inferAggregate(const QueryExpr& expr, AggregateKind kind, const Ctx& ctx);
    TypedPtr inferFilter(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferSort(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferTake(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferUnique(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferSelect(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferDefine(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferConnect(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferGroupLike(const QueryExpr& expr, bool rollup, const Ctx& ctx);
    TypedPtr inferGiven(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferFrame(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferAroundBy(const QueryExpr& expr, const Ctx& ctx);
    TypedPtr inferLength(const QueryExpr& expr, const Ctx& ctx);

    Ctx elemCtx(const TypedPtr& base, const Ctx& ctx) const;
    void requirePlural(const TypedPtr& q, const char* what) const;
    void checkArity(const QueryExpr& expr, std::size_t min, std::size_t max) const;
    [[noreturn]] void unknownName(const QueryExpr& expr, const Ctx& ctx) const;
    std::vector<std::string> namesInScope(const Ctx& ctx) const;

    const Schema& schema_;
    std::vector<Diagnostic> warnings_;
};

/// Union of parameter sets, deduplicated by name.
std::vector<ParamInfo> mergeParams(const std::vector<ParamInfo>& a,
                                   const std::vector<ParamInfo>& b);

/// Default field tag for select fields and group member names: the trailing
/// name of a composition, the tag of a tagged expression, the base of a
/// sequence transformer, or the combinator name for aggregates. Empty when no
/// name can be derived.
std::string defaultFieldName(const QueryExpr& expr);

/// Restricted variant used for group/rollup keys: only a trailing name or an
/// explicit tag counts; computed keys must be tagged.
std::string trailingName(const QueryExpr& expr);

} // namespace rabbit

#endif
