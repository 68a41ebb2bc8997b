#include "rabbit/serialize.hpp"

#include "rabbit/diagnostics.hpp"

namespace rabbit {

using nlohmann::ordered_json;

ordered_json valueToJson(const Database& db, const Value& value) {
    switch (value.kind()) {
    case Value::Kind::Bool:
        return value.asBool();
    case Value::Kind::Int:
        return value.asInt();
    case Value::Kind::Num:
        return value.asNum();
    case Value::Kind::Text:
        return value.asText();
    case Value::Kind::Ref: {
        const Value::Ref& ref = value.asRef();
        const ClassDef* cls = db.schema().findClass(ref.className);
        const Database::Row& row = db.row(ref);
        ordered_json obj = ordered_json::object();
        obj["_id"] = row.id;
        for (std::size_t i = 0; i < cls->attributes.size(); ++i) {
            obj[cls->attributes[i].name] = valueToJson(db, row.attributes[i]);
        }
        return obj;
    }
    case Value::Kind::Record: {
        ordered_json obj = ordered_json::object();
        for (const auto& [tag, field] : value.fields()) {
            obj[tag] = valueToJson(db, field);
        }
        return obj;
    }
    case Value::Kind::Missing:
        return nullptr;
    case Value::Kind::Some:
        return valueToJson(db, value.someInner());
    case Value::Kind::Seq: {
        ordered_json arr = ordered_json::array();
        for (const Value& item : value.items()) {
            arr.push_back(valueToJson(db, item));
        }
        return arr;
    }
    }
    throw QueryError(ErrorKind::Runtime, "internal: unserializable value");
}

std::string valueToJsonText(const Database& db, const Value& value) {
    return valueToJson(db, value).dump();
}

} // namespace rabbit
