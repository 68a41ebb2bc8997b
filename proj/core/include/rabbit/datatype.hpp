#ifndef RABBIT_DATATYPE_HPP
#define RABBIT_DATATYPE_HPP

#include <memory>
#include <string>
#include <vector>

#include "rabbit/cardinality.hpp"

namespace rabbit {

struct RecordType;

/// The closed type language: Void, the four scalars, entity references, and
/// records (including quotient records produced by group/rollup). Unknown is
/// an inference-internal placeholder for the free output type of `null`; it
/// never describes a runtime value.
class DataType {
public:
    enum class Kind {
        Void,
        Bool,
        Int,
        Num,
        Text,
        Entity,
        Record,
        Unknown,
    };

    DataType() : kind_(Kind::Unknown) {}

    static DataType voidType() { return DataType(Kind::Void); }
    static DataType boolean() { return DataType(Kind::Bool); }
    static DataType integer() { return DataType(Kind::Int); }
    static DataType number() { return DataType(Kind::Num); }
    static DataType text() { return DataType(Kind::Text); }
    static DataType unknown() { return DataType(Kind::Unknown); }
    static DataType entity(std::string className);
    static DataType record(std::shared_ptr<const RecordType> rec);

    Kind kind() const { return kind_; }
    bool is(Kind k) const { return kind_ == k; }
    bool isVoid() const { return kind_ == Kind::Void; }
    bool isEntity() const { return kind_ == Kind::Entity; }
    bool isRecord() const { return kind_ == Kind::Record; }
    bool isUnknown() const { return kind_ == Kind::Unknown; }
    bool isNumeric() const { return kind_ == Kind::Int || kind_ == Kind::Num; }
    /// Types with a total order usable by sort/unique/group keys.
    bool isOrdered() const;
    bool isScalar() const;

    const std::string& className() const { return class_name_; }
    const RecordType& record() const { return *record_; }
    std::shared_ptr<const RecordType> recordPtr() const { return record_; }

    std::string display() const;

    bool operator==(const DataType& other) const;
    bool operator!=(const DataType& other) const { return !(*this == other); }

private:
    explicit DataType(Kind kind) : kind_(kind) {}

    Kind kind_;
    std::string class_name_;                   // Entity
    std::shared_ptr<const RecordType> record_; // Record
};

struct RecordFieldDef {
    std::string tag;
    DataType type;
    Cardinality card = Cardinality::One;
};

/// Record types carry their fields in declared order. Quotient records (the
/// output of group/rollup) additionally remember the base display name, the
/// key tags, and which field holds the member sequence so that signatures can
/// print as `Emp/position` and scopes can expose the member field.
struct RecordType {
    std::vector<RecordFieldDef> fields;

    std::string quotient_base;             // empty for plain records
    std::vector<std::string> quotient_keys;
    bool subtotal_keys = false;            // rollup: keys are Opt-wrapped
    int member_index = -1;

    bool isQuotient() const { return !quotient_base.empty(); }
    int indexOf(const std::string& tag) const;
    std::string display() const;
};

/// `M{T}` rendering: One -> T, Opt -> Opt{T}, Seq -> Seq{T}.
std::string displayWrapped(const DataType& type, Cardinality card);

/// Least upper bound of two types under Int -> Num widening, with Unknown
/// unifying against anything. Returns Unknown kind only when both sides are
/// Unknown; unification failure is signalled by returning std::nullopt via
/// the bool result.
bool unifyTypes(const DataType& a, const DataType& b, DataType* out);

} // namespace rabbit

#endif
