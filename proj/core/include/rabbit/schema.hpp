#ifndef RABBIT_SCHEMA_HPP
#define RABBIT_SCHEMA_HPP

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rabbit/datatype.hpp"
#include "rabbit/value.hpp"

namespace rabbit {

struct AttributeDef {
    std::string name;
    DataType type; // scalar only: Bool, Int, Num, Text
};

struct RelationshipDef {
    std::string name;
    std::string target;
    Cardinality card = Cardinality::One;
    /// When set, this relationship is materialized at load time from the named
    /// forward relationship on the target class; data files omit it.
    std::optional<std::string> inverseOf;
};

struct ClassDef {
    std::string name;
    /// Name of the class primitive at Void ("employee" for class Emp);
    /// defaults to the class name.
    std::string extent;
    std::vector<AttributeDef> attributes;
    std::vector<RelationshipDef> relationships;

    const AttributeDef* findAttribute(const std::string& name) const;
    const RelationshipDef* findRelationship(const std::string& name) const;
    int attributeIndex(const std::string& name) const;
    int relationshipIndex(const std::string& name) const;
};

/// Declared structure of the functional database: entity classes joined by
/// attribute and relationship arrows with fixed cardinalities. Class order and
/// member order follow the source document.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<ClassDef> classes);

    const std::vector<ClassDef>& classes() const { return classes_; }
    const ClassDef* findClass(const std::string& name) const;
    int classIndex(const std::string& name) const;
    /// Lookup by the Void-scope primitive name.
    const ClassDef* findClassByExtent(const std::string& extent) const;

private:
    std::vector<ClassDef> classes_;
    std::unordered_map<std::string, int> index_;
    std::unordered_map<std::string, int> extent_index_;
};

/// Parses and validates a schema document. Throws QueryError with kind Schema
/// (or Io for JSON parse failures).
Schema loadSchema(const std::string& documentText);

/// Immutable entity store conforming to a Schema. Entity identity is
/// (class, ordinal); ordinals index the class extent in load order, which is
/// the intrinsic order every query result respects.
class Database {
public:
    struct Row {
        std::string id;                // for link resolution and round-tripping
        std::vector<Value> attributes; // aligned with ClassDef::attributes
        std::vector<Value> relations;  // aligned with ClassDef::relationships
    };

    const Schema& schema() const { return schema_; }
    const std::vector<Row>& extent(const std::string& className) const;
    std::size_t extentSize(const std::string& className) const;
    const Row& row(const Value::Ref& ref) const;

    /// Full class extent as a Seq of refs, in intrinsic order.
    Value classExtent(const std::string& className) const;
    Value attribute(const Value::Ref& ref, int attrIndex) const;
    Value relationship(const Value::Ref& ref, int relIndex) const;

    /// Re-emits the data document (inverse-declared links omitted). Loading
    /// the result against the same schema reproduces this database.
    std::string serialize() const;

    friend Database loadData(const Schema& schema, const std::string& documentText);

private:
    Schema schema_;
    std::vector<std::vector<Row>> extents_; // aligned with schema classes
};

/// Parses and validates a data document against a schema; all referential,
/// type, and cardinality invariants are checked eagerly. Throws QueryError
/// with kind Data (or Io for JSON parse failures).
Database loadData(const Schema& schema, const std::string& documentText);

} // namespace rabbit

#endif
