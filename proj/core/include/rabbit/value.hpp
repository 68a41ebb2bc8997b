#ifndef RABBIT_VALUE_HPP
#define RABBIT_VALUE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rabbit/cardinality.hpp"

namespace rabbit {

/// Immutable runtime value. Scalars are stored inline; records, sequences and
/// optional payloads are shared so copies stay cheap. Missing/Some/Seq are the
/// container constructors for the OPT and SEQ cardinalities; a ONE value is
/// never wrapped. The unique Void inhabitant is the empty record.
class Value {
public:
    enum class Kind {
        Bool,
        Int,
        Num,
        Text,
        Ref,
        Record,
        Missing,
        Some,
        Seq,
    };

    struct Ref {
        std::string className;
        std::int64_t ordinal = 0;
    };

    using FieldList = std::vector<std::pair<std::string, Value>>;

    Value() : repr_(MissingTag{}) {}

    static Value boolean(bool b) { return Value(Repr(b)); }
    static Value integer(std::int64_t i) { return Value(Repr(i)); }
    static Value number(double x) { return Value(Repr(x)); }
    static Value text(std::string s) { return Value(Repr(std::move(s))); }
    static Value ref(std::string className, std::int64_t ordinal) {
        return Value(Repr(Ref{std::move(className), ordinal}));
    }
    static Value record(FieldList fields) {
        return Value(Repr(std::make_shared<const FieldList>(std::move(fields))));
    }
    /// ⊤, the unique value of Void.
    static Value unit() { return record({}); }
    static Value missing() { return Value(Repr(MissingTag{})); }
    static Value some(Value inner) {
        return Value(Repr(SomeBox{std::make_shared<const Value>(std::move(inner))}));
    }
    static Value seq(std::vector<Value> items) {
        return Value(Repr(SeqBox{std::make_shared<const std::vector<Value>>(std::move(items))}));
    }

    Kind kind() const { return static_cast<Kind>(repr_.index()); }
    bool isMissing() const { return kind() == Kind::Missing; }

    bool asBool() const { return std::get<bool>(repr_); }
    std::int64_t asInt() const { return std::get<std::int64_t>(repr_); }
    double asNum() const { return std::get<double>(repr_); }
    /// Numeric view: Int widens to double.
    double numeric() const {
        return kind() == Kind::Int ? static_cast<double>(asInt()) : asNum();
    }
    const std::string& asText() const { return std::get<std::string>(repr_); }
    const Ref& asRef() const { return std::get<Ref>(repr_); }
    const FieldList& fields() const { return *std::get<std::shared_ptr<const FieldList>>(repr_); }
    const Value& someInner() const { return *std::get<SomeBox>(repr_).inner; }
    const std::vector<Value>& items() const { return *std::get<SeqBox>(repr_).items; }

    /// Field lookup on records; nullptr when absent.
    const Value* field(const std::string& tag) const;

    std::string debugString() const;

private:
    struct MissingTag {};
    struct SomeBox {
        std::shared_ptr<const Value> inner;
    };
    struct SeqBox {
        std::shared_ptr<const std::vector<Value>> items;
    };

    using Repr = std::variant<bool, std::int64_t, double, std::string, Ref,
                              std::shared_ptr<const FieldList>, MissingTag, SomeBox, SeqBox>;

    explicit Value(Repr repr) : repr_(std::move(repr)) {}

    Repr repr_;
};

/// Lift a container value from one cardinality to a greater one:
/// a -> ⟨a⟩ -> [a] and ⊥ -> []. Identity when from == to; throws QueryError
/// (Runtime) when from > to, which indicates an inference bug.
Value promote(const Value& v, Cardinality from, Cardinality to);

/// Collapse one level of container nesting at the given cardinality:
/// Some(Some(c)) -> Some(c), Some(Missing) -> Missing, and concatenation of
/// nested sequences. Throws on malformed nesting.
Value flatten(Cardinality outer, const Value& v);

/// Structural equality. Int and Num compare numerically across kinds.
bool valuesEqual(const Value& a, const Value& b);

/// Kernel total order over comparable kinds: false < true, numeric order with
/// NaN above every number, text by code point (byte order of UTF-8), entity
/// refs by class extent position. Records and containers are compared
/// lexicographically field-/element-wise. Missing sorts below any present
/// value (callers that need DESC-specific Missing placement handle it before
/// calling). Throws QueryError on incomparable kinds.
int compareValues(const Value& a, const Value& b);

/// Equality with relative tolerance for Num payloads; used by tests and the
/// oracle comparisons.
bool valuesClose(const Value& a, const Value& b, double relTol);

} // namespace rabbit

#endif
