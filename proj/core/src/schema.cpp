#include "rabbit/schema.hpp"

#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rabbit/diagnostics.hpp"

namespace rabbit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string>& builtinNames() {
    static const std::set<std::string> names = {
        "here", "home", "null", "around", "before", "true", "false",
    };
    return names;
}

[[noreturn]] void schemaError(const std::string& message) {
    throw QueryError(ErrorKind::Schema, message);
}

[[noreturn]] void dataError(const std::string& message) {
    throw QueryError(ErrorKind::Data, message);
}

DataType scalarTypeFromName(const std::string& name) {
    if (name == "Bool") return DataType::boolean();
    if (name == "Int") return DataType::integer();
    if (name == "Num") return DataType::number();
    if (name == "Text") return DataType::text();
    schemaError("unknown attribute type '" + name + "' (expected Bool, Int, Num, or Text)");
}

Cardinality cardinalityFromName(const std::string& name) {
    if (name == "one") return Cardinality::One;
    if (name == "opt") return Cardinality::Opt;
    if (name == "seq") return Cardinality::Seq;
    schemaError("unknown cardinality '" + name + "' (expected one, opt, or seq)");
}

json parseDocument(const std::string& text, ErrorKind kind) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw QueryError(kind, std::string("JSON parse error: ") + e.what(),
                         SourceSpan{e.byte > 0 ? e.byte - 1 : 0, e.byte});
    }
}

} // namespace

const AttributeDef* ClassDef::findAttribute(const std::string& name) const {
    int i = attributeIndex(name);
    return i < 0 ? nullptr : &attributes[i];
}

const RelationshipDef* ClassDef::findRelationship(const std::string& name) const {
    int i = relationshipIndex(name);
    return i < 0 ? nullptr : &relationships[i];
}

int ClassDef::attributeIndex(const std::string& name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

int ClassDef::relationshipIndex(const std::string& name) const {
    for (std::size_t i = 0; i < relationships.size(); ++i) {
        if (relationships[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

Schema::Schema(std::vector<ClassDef> classes) : classes_(std::move(classes)) {
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        index_[classes_[i].name] = static_cast<int>(i);
        extent_index_[classes_[i].extent] = static_cast<int>(i);
    }
}

const ClassDef* Schema::findClass(const std::string& name) const {
    int i = classIndex(name);
    return i < 0 ? nullptr : &classes_[i];
}

const ClassDef* Schema::findClassByExtent(const std::string& extent) const {
    auto it = extent_index_.find(extent);
    return it == extent_index_.end() ? nullptr : &classes_[it->second];
}

int Schema::classIndex(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

Schema loadSchema(const std::string& documentText) {
    json doc = parseDocument(documentText, ErrorKind::Schema);
    if (!doc.is_object() || !doc.contains("classes") || !doc["classes"].is_array()) {
        schemaError("schema document must be an object with a \"classes\" array");
    }

    std::vector<ClassDef> classes;
    std::unordered_set<std::string> class_names;
    for (const json& jc : doc["classes"]) {
        if (!jc.is_object() || !jc.contains("name") || !jc["name"].is_string()) {
            schemaError("each class needs a string \"name\"");
        }
        ClassDef cls;
        cls.name = jc["name"].get<std::string>();
        cls.extent = jc.contains("extent") ? jc["extent"].get<std::string>() : cls.name;
        for (const std::string& n : {cls.name, cls.extent}) {
            if (builtinNames().count(n)) {
                schemaError("name '" + n + "' collides with a built-in name");
            }
        }
        if (!class_names.insert(cls.name).second) {
            schemaError("duplicate class name '" + cls.name + "'");
        }
        if (cls.extent != cls.name && !class_names.insert(cls.extent).second) {
            schemaError("extent name '" + cls.extent + "' collides with another class");
        }

        std::unordered_set<std::string> member_names;
        if (jc.contains("attributes")) {
            for (const json& ja : jc["attributes"]) {
                if (!ja.is_object() || !ja.contains("name") || !ja.contains("type")) {
                    schemaError("attributes need \"name\" and \"type\"");
                }
                AttributeDef attr;
                attr.name = ja["name"].get<std::string>();
                attr.type = scalarTypeFromName(ja["type"].get<std::string>());
                if (!member_names.insert(attr.name).second) {
                    schemaError("duplicate member name '" + attr.name + "' in class " + cls.name);
                }
                cls.attributes.push_back(std::move(attr));
            }
        }
        if (jc.contains("relationships")) {
            for (const json& jr : jc["relationships"]) {
                if (!jr.is_object() || !jr.contains("name") || !jr.contains("target") ||
                    !jr.contains("cardinality")) {
                    schemaError("relationships need \"name\", \"target\", and \"cardinality\"");
                }
                RelationshipDef rel;
                rel.name = jr["name"].get<std::string>();
                rel.target = jr["target"].get<std::string>();
                rel.card = cardinalityFromName(jr["cardinality"].get<std::string>());
                if (jr.contains("inverse_of")) {
                    rel.inverseOf = jr["inverse_of"].get<std::string>();
                }
                if (!member_names.insert(rel.name).second) {
                    schemaError("duplicate member name '" + rel.name + "' in class " + cls.name);
                }
                cls.relationships.push_back(std::move(rel));
            }
        }
        classes.push_back(std::move(cls));
    }

    Schema schema(std::move(classes));

    // Cross-class checks once every class is known.
    for (const ClassDef& cls : schema.classes()) {
        for (const RelationshipDef& rel : cls.relationships) {
            const ClassDef* target = schema.findClass(rel.target);
            if (!target) {
                schemaError("relationship " + cls.name + "." + rel.name +
                            " targets unknown class '" + rel.target + "'");
            }
            if (rel.inverseOf) {
                const RelationshipDef* fwd = target->findRelationship(*rel.inverseOf);
                if (!fwd) {
                    schemaError("inverse relationship " + cls.name + "." + rel.name +
                                " names unknown forward link '" + *rel.inverseOf + "' on " +
                                rel.target);
                }
                if (fwd->target != cls.name) {
                    schemaError("inverse relationship " + cls.name + "." + rel.name +
                                " expects " + rel.target + "." + *rel.inverseOf +
                                " to point back at " + cls.name);
                }
            }
        }
    }
    return schema;
}

const std::vector<Database::Row>& Database::extent(const std::string& className) const {
    int i = schema_.classIndex(className);
    if (i < 0) {
        throw QueryError(ErrorKind::Runtime, "internal: unknown class '" + className + "'");
    }
    return extents_[i];
}

std::size_t Database::extentSize(const std::string& className) const {
    return extent(className).size();
}

const Database::Row& Database::row(const Value::Ref& ref) const {
    const auto& rows = extent(ref.className);
    if (ref.ordinal < 0 || static_cast<std::size_t>(ref.ordinal) >= rows.size()) {
        throw QueryError(ErrorKind::Runtime, "internal: ref ordinal out of range");
    }
    return rows[ref.ordinal];
}

Value Database::classExtent(const std::string& className) const {
    const auto& rows = extent(className);
    std::vector<Value> refs;
    refs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        refs.push_back(Value::ref(className, static_cast<std::int64_t>(i)));
    }
    return Value::seq(std::move(refs));
}

Value Database::attribute(const Value::Ref& ref, int attrIndex) const {
    return row(ref).attributes[attrIndex];
}

Value Database::relationship(const Value::Ref& ref, int relIndex) const {
    return row(ref).relations[relIndex];
}

namespace {

Value attributeValueFromJson(const json& j, const AttributeDef& attr, const std::string& where) {
    switch (attr.type.kind()) {
    case DataType::Kind::Bool:
        if (!j.is_boolean()) dataError(where + ": expected Bool for '" + attr.name + "'");
        return Value::boolean(j.get<bool>());
    case DataType::Kind::Int:
        if (!j.is_number_integer()) dataError(where + ": expected Int for '" + attr.name + "'");
        return Value::integer(j.get<std::int64_t>());
    case DataType::Kind::Num:
        if (!j.is_number()) dataError(where + ": expected Num for '" + attr.name + "'");
        return Value::number(j.get<double>());
    case DataType::Kind::Text:
        if (!j.is_string()) dataError(where + ": expected Text for '" + attr.name + "'");
        return Value::text(j.get<std::string>());
    default:
        dataError(where + ": unsupported attribute type");
    }
}

json attributeValueToJson(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Bool: return v.asBool();
    case Value::Kind::Int: return v.asInt();
    case Value::Kind::Num: return v.asNum();
    case Value::Kind::Text: return v.asText();
    default:
        throw QueryError(ErrorKind::Runtime, "internal: non-scalar attribute value");
    }
}

} // namespace

Database loadData(const Schema& schema, const std::string& documentText) {
    json doc = parseDocument(documentText, ErrorKind::Data);
    if (!doc.is_object()) dataError("data document must be an object keyed by class name");

    Database db;
    db.schema_ = schema;
    db.extents_.resize(schema.classes().size());

    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (schema.classIndex(it.key()) < 0) {
            dataError("data document mentions unknown class '" + it.key() + "'");
        }
        if (!it.value().is_array()) {
            dataError("extent of class '" + it.key() + "' must be an array");
        }
    }

    // Pass 1: ids and attributes; remember raw link json per row.
    std::vector<std::unordered_map<std::string, std::int64_t>> ids_by_class(
        schema.classes().size());
    std::vector<std::vector<const json*>> raw_rows(schema.classes().size());

    for (std::size_t ci = 0; ci < schema.classes().size(); ++ci) {
        const ClassDef& cls = schema.classes()[ci];
        if (!doc.contains(cls.name)) continue; // empty extent
        for (const json& jrow : doc[cls.name]) {
            if (!jrow.is_object()) dataError("rows of '" + cls.name + "' must be objects");
            Database::Row row;
            if (!jrow.contains("id") || !jrow["id"].is_string()) {
                dataError(cls.name + " row is missing required field 'id'");
            }
            row.id = jrow["id"].get<std::string>();
            const std::string where = cls.name + " " + row.id;
            if (!ids_by_class[ci].emplace(row.id, static_cast<std::int64_t>(raw_rows[ci].size()))
                     .second) {
                dataError("duplicate id '" + row.id + "' in class " + cls.name);
            }
            for (const AttributeDef& attr : cls.attributes) {
                if (!jrow.contains(attr.name)) {
                    dataError(where + " is missing required field '" + attr.name + "'");
                }
                if (jrow[attr.name].is_null()) {
                    dataError(where + ": attribute '" + attr.name + "' must not be null");
                }
                row.attributes.push_back(attributeValueFromJson(jrow[attr.name], attr, where));
            }
            // Unknown keys are rejected so typos never pass silently.
            for (auto field = jrow.begin(); field != jrow.end(); ++field) {
                const std::string& key = field.key();
                if (key == "id" || cls.findAttribute(key)) continue;
                const RelationshipDef* rel = cls.findRelationship(key);
                if (!rel) dataError(where + " has unknown field '" + key + "'");
            }
            row.relations.resize(cls.relationships.size());
            raw_rows[ci].push_back(&jrow);
            db.extents_[ci].push_back(std::move(row));
        }
    }

    auto resolve = [&](const std::string& target, const json& jid,
                       const std::string& where) -> Value {
        if (!jid.is_string()) dataError(where + ": links must be id strings");
        int ti = schema.classIndex(target);
        auto found = ids_by_class[ti].find(jid.get<std::string>());
        if (found == ids_by_class[ti].end()) {
            dataError(where + ": dangling reference to " + target + " '" +
                      jid.get<std::string>() + "'");
        }
        return Value::ref(target, found->second);
    };

    // Pass 2: forward links.
    for (std::size_t ci = 0; ci < schema.classes().size(); ++ci) {
        const ClassDef& cls = schema.classes()[ci];
        for (std::size_t ri = 0; ri < raw_rows[ci].size(); ++ri) {
            const json& jrow = *raw_rows[ci][ri];
            Database::Row& row = db.extents_[ci][ri];
            const std::string where = cls.name + " " + row.id;
            for (std::size_t k = 0; k < cls.relationships.size(); ++k) {
                const RelationshipDef& rel = cls.relationships[k];
                if (rel.inverseOf) {
                    if (jrow.contains(rel.name)) {
                        dataError(where + ": inverse-declared link '" + rel.name +
                                  "' must be omitted from data files");
                    }
                    continue; // materialized in pass 3
                }
                if (!jrow.contains(rel.name)) {
                    dataError(where + " is missing required field '" + rel.name + "'");
                }
                const json& jlink = jrow[rel.name];
                switch (rel.card) {
                case Cardinality::One:
                    if (jlink.is_null()) {
                        dataError(where + ": relationship '" + rel.name +
                                  "' has cardinality one and must not be null");
                    }
                    row.relations[k] = resolve(rel.target, jlink, where);
                    break;
                case Cardinality::Opt:
                    if (jlink.is_null()) {
                        row.relations[k] = Value::missing();
                    } else {
                        row.relations[k] = Value::some(resolve(rel.target, jlink, where));
                    }
                    break;
                case Cardinality::Seq: {
                    if (!jlink.is_array()) {
                        dataError(where + ": relationship '" + rel.name +
                                  "' has cardinality seq and must be an id array");
                    }
                    std::vector<Value> targets;
                    for (const json& jid : jlink) {
                        targets.push_back(resolve(rel.target, jid, where));
                    }
                    row.relations[k] = Value::seq(std::move(targets));
                    break;
                }
                }
            }
        }
    }

    // Pass 3: materialize inverse links from forward links, in extent order.
    for (std::size_t ci = 0; ci < schema.classes().size(); ++ci) {
        const ClassDef& cls = schema.classes()[ci];
        for (std::size_t k = 0; k < cls.relationships.size(); ++k) {
            const RelationshipDef& rel = cls.relationships[k];
            if (!rel.inverseOf) continue;
            int ti = schema.classIndex(rel.target);
            const ClassDef& target_cls = schema.classes()[ti];
            int fwd = target_cls.relationshipIndex(*rel.inverseOf);
            const Cardinality fwd_card = target_cls.relationships[fwd].card;

            std::vector<std::vector<Value>> incoming(db.extents_[ci].size());
            for (std::size_t ti_row = 0; ti_row < db.extents_[ti].size(); ++ti_row) {
                const Value& link = db.extents_[ti][ti_row].relations[fwd];
                auto note = [&](const Value& ref) {
                    incoming[ref.asRef().ordinal].push_back(
                        Value::ref(rel.target, static_cast<std::int64_t>(ti_row)));
                };
                switch (fwd_card) {
                case Cardinality::One:
                    note(link);
                    break;
                case Cardinality::Opt:
                    if (!link.isMissing()) note(link.someInner());
                    break;
                case Cardinality::Seq:
                    for (const Value& ref : link.items()) note(ref);
                    break;
                }
            }
            for (std::size_t ri = 0; ri < db.extents_[ci].size(); ++ri) {
                std::vector<Value>& in = incoming[ri];
                switch (rel.card) {
                case Cardinality::Seq:
                    db.extents_[ci][ri].relations[k] = Value::seq(std::move(in));
                    break;
                case Cardinality::Opt:
                    if (in.size() > 1) {
                        dataError(cls.name + " " + db.extents_[ci][ri].id +
                                  ": inverse link '" + rel.name +
                                  "' has cardinality opt but several rows point here");
                    }
                    db.extents_[ci][ri].relations[k] =
                        in.empty() ? Value::missing() : Value::some(in[0]);
                    break;
                case Cardinality::One:
                    if (in.size() != 1) {
                        dataError(cls.name + " " + db.extents_[ci][ri].id +
                                  ": inverse link '" + rel.name +
                                  "' has cardinality one but " + std::to_string(in.size()) +
                                  " rows point here");
                    }
                    db.extents_[ci][ri].relations[k] = in[0];
                    break;
                }
            }
        }
    }

    return db;
}

std::string Database::serialize() const {
    ordered_json doc = ordered_json::object();
    for (std::size_t ci = 0; ci < schema_.classes().size(); ++ci) {
        const ClassDef& cls = schema_.classes()[ci];
        ordered_json rows = ordered_json::array();
        for (const Row& row : extents_[ci]) {
            ordered_json jrow = ordered_json::object();
            jrow["id"] = row.id;
            for (std::size_t a = 0; a < cls.attributes.size(); ++a) {
                jrow[cls.attributes[a].name] = attributeValueToJson(row.attributes[a]);
            }
            for (std::size_t k = 0; k < cls.relationships.size(); ++k) {
                const RelationshipDef& rel = cls.relationships[k];
                if (rel.inverseOf) continue;
                const Value& link = row.relations[k];
                auto idOf = [&](const Value& ref) { return this->row(ref.asRef()).id; };
                switch (rel.card) {
                case Cardinality::One:
                    jrow[rel.name] = idOf(link);
                    break;
                case Cardinality::Opt:
                    if (link.isMissing()) {
                        jrow[rel.name] = nullptr;
                    } else {
                        jrow[rel.name] = idOf(link.someInner());
                    }
                    break;
                case Cardinality::Seq: {
                    ordered_json ids = ordered_json::array();
                    for (const Value& ref : link.items()) ids.push_back(idOf(ref));
                    jrow[rel.name] = std::move(ids);
                    break;
                }
                }
            }
            rows.push_back(std::move(jrow));
        }
        doc[cls.name] = std::move(rows);
    }
    return doc.dump(2);
}

} // namespace rabbit
