#include "rabbit/datatype.hpp"

#include <sstream>

namespace rabbit {

const char* cardinalityName(Cardinality card) {
    switch (card) {
    case Cardinality::One: return "One";
    case Cardinality::Opt: return "Opt";
    case Cardinality::Seq: return "Seq";
    }
    return "?";
}

DataType DataType::entity(std::string className) {
    DataType t(Kind::Entity);
    t.class_name_ = std::move(className);
    return t;
}

DataType DataType::record(std::shared_ptr<const RecordType> rec) {
    DataType t(Kind::Record);
    t.record_ = std::move(rec);
    return t;
}

bool DataType::isOrdered() const {
    switch (kind_) {
    case Kind::Bool:
    case Kind::Int:
    case Kind::Num:
    case Kind::Text:
    case Kind::Entity:
        return true;
    default:
        return false;
    }
}

bool DataType::isScalar() const {
    switch (kind_) {
    case Kind::Bool:
    case Kind::Int:
    case Kind::Num:
    case Kind::Text:
        return true;
    default:
        return false;
    }
}

std::string DataType::display() const {
    switch (kind_) {
    case Kind::Void: return "Void";
    case Kind::Bool: return "Bool";
    case Kind::Int: return "Int";
    case Kind::Num: return "Num";
    case Kind::Text: return "Text";
    case Kind::Entity: return class_name_;
    case Kind::Record: return record_->display();
    case Kind::Unknown: return "?";
    }
    return "?";
}

bool DataType::operator==(const DataType& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
    case Kind::Entity:
        return class_name_ == other.class_name_;
    case Kind::Record: {
        const RecordType& a = *record_;
        const RecordType& b = *other.record_;
        if (a.fields.size() != b.fields.size()) return false;
        for (std::size_t i = 0; i < a.fields.size(); ++i) {
            if (a.fields[i].tag != b.fields[i].tag) return false;
            if (a.fields[i].card != b.fields[i].card) return false;
            if (!(a.fields[i].type == b.fields[i].type)) return false;
        }
        return true;
    }
    default:
        return true;
    }
}

int RecordType::indexOf(const std::string& tag) const {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].tag == tag) return static_cast<int>(i);
    }
    return -1;
}

std::string RecordType::display() const {
    if (isQuotient()) {
        std::ostringstream out;
        out << quotient_base << '/';
        for (std::size_t i = 0; i < quotient_keys.size(); ++i) {
            if (i) out << ',';
            out << quotient_keys[i];
            if (subtotal_keys) out << '?';
        }
        return out.str();
    }
    std::ostringstream out;
    out << "Tuple{";
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ", ";
        out << fields[i].tag << ':' << displayWrapped(fields[i].type, fields[i].card);
    }
    out << '}';
    return out.str();
}

std::string displayWrapped(const DataType& type, Cardinality card) {
    switch (card) {
    case Cardinality::One: return type.display();
    case Cardinality::Opt: return "Opt{" + type.display() + "}";
    case Cardinality::Seq: return "Seq{" + type.display() + "}";
    }
    return type.display();
}

bool unifyTypes(const DataType& a, const DataType& b, DataType* out) {
    if (a.isUnknown()) {
        *out = b;
        return true;
    }
    if (b.isUnknown()) {
        *out = a;
        return true;
    }
    if (a == b) {
        *out = a;
        return true;
    }
    // Int widens to Num in mixed arithmetic and comparison.
    if (a.isNumeric() && b.isNumeric()) {
        *out = DataType::number();
        return true;
    }
    return false;
}

} // namespace rabbit
