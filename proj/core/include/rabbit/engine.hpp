#ifndef RABBIT_ENGINE_HPP
#define RABBIT_ENGINE_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rabbit/schema.hpp"
#include "rabbit/typer.hpp"

namespace rabbit {

using EnvMap = std::map<std::string, Value>;
using EnvPtr = std::shared_ptr<const EnvMap>;

/// The materialized input flow of a query: every input value it will see, in
/// flow order, each with the environment bindings visible at that position.
/// Composition with a plural query concatenates per-input outputs into the
/// downstream block, which is exactly how the input-flow context propagates.
struct Block {
    std::vector<Value> inputs;
    std::vector<EnvPtr> envs; // aligned with inputs; null means empty
    const Database* db = nullptr;

    static Block singleton(const Database& db, Value input, EnvPtr env = nullptr);
    std::size_t size() const { return inputs.size(); }
};

/// Evaluation result aligned with a block: items[i] is the output container
/// for inputs[i] (a bare value at ONE, Missing/Some at OPT, Seq at SEQ).
struct Column {
    Cardinality card = Cardinality::One;
    std::vector<Value> items;

    /// The elements contributed by position i (0 or 1 value below SEQ).
    std::vector<Value> elementsAt(std::size_t i) const;
};

Column promoteColumn(const Column& col, Cardinality to);

/// Evaluates a typed query over a block. Pure with respect to the database;
/// runtime failures (division by zero, connect cycles) throw QueryError.
Column evaluate(const TypedQuery& q, const Block& block);

/// A type-checked executable query.
class CompiledQuery {
public:
    CompiledQuery() = default;
    explicit CompiledQuery(TypedPtr root) : root_(std::move(root)) {}

    const Signature& signature() const { return root_->sig; }
    const TypedPtr& root() const { return root_; }
    Column evaluate(const Block& block) const { return rabbit::evaluate(*root_, block); }

private:
    TypedPtr root_;
};

/// Parse + infer against a database schema. `input` defaults to Void;
/// `expected` resolves an otherwise unconstrained null output.
CompiledQuery compileQuery(const Database& db, const std::string& text,
                           const DataType& input = DataType::voidType(),
                           const std::optional<DataType>& expected = std::nullopt);

/// Evaluates a Void-input, parameter-free query on the singleton block [⊤]
/// and returns its single output container.
Value run(const Database& db, const CompiledQuery& query);

/// Convenience: parse, infer, and run in one step.
Value runQuery(const Database& db, const std::string& text);

} // namespace rabbit

#endif
