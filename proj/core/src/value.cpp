#include "rabbit/value.hpp"

#include <cmath>
#include <sstream>

#include "rabbit/diagnostics.hpp"

namespace rabbit {

const Value* Value::field(const std::string& tag) const {
    for (const auto& [name, value] : fields()) {
        if (name == tag) return &value;
    }
    return nullptr;
}

std::string Value::debugString() const {
    std::ostringstream out;
    switch (kind()) {
    case Kind::Bool: out << (asBool() ? "true" : "false"); break;
    case Kind::Int: out << asInt(); break;
    case Kind::Num: out << asNum(); break;
    case Kind::Text: out << '"' << asText() << '"'; break;
    case Kind::Ref: out << asRef().className << '#' << asRef().ordinal; break;
    case Kind::Record: {
        out << '{';
        bool first = true;
        for (const auto& [tag, v] : fields()) {
            if (!first) out << ", ";
            first = false;
            out << tag << ": " << v.debugString();
        }
        out << '}';
        break;
    }
    case Kind::Missing: out << "⊥"; break;
    case Kind::Some: out << '<' << someInner().debugString() << '>'; break;
    case Kind::Seq: {
        out << '[';
        bool first = true;
        for (const auto& v : items()) {
            if (!first) out << ", ";
            first = false;
            out << v.debugString();
        }
        out << ']';
        break;
    }
    }
    return out.str();
}

Value promote(const Value& v, Cardinality from, Cardinality to) {
    if (from == to) return v;
    if (!leq(from, to)) {
        throw QueryError(ErrorKind::Runtime, "internal: promotion from a greater cardinality");
    }
    if (from == Cardinality::One) {
        if (to == Cardinality::Opt) return Value::some(v);
        return Value::seq({v});
    }
    // Opt -> Seq
    if (v.isMissing()) return Value::seq({});
    if (v.kind() != Value::Kind::Some) {
        throw QueryError(ErrorKind::Runtime, "internal: Opt value is neither Missing nor Some");
    }
    return Value::seq({v.someInner()});
}

Value flatten(Cardinality outer, const Value& v) {
    if (outer == Cardinality::Opt) {
        if (v.isMissing()) return v;
        if (v.kind() != Value::Kind::Some) {
            throw QueryError(ErrorKind::Runtime, "internal: flatten expected an Opt container");
        }
        const Value& inner = v.someInner();
        if (inner.isMissing() || inner.kind() == Value::Kind::Some) return inner;
        throw QueryError(ErrorKind::Runtime, "internal: flatten expected Opt of Opt");
    }
    if (outer == Cardinality::Seq) {
        if (v.kind() != Value::Kind::Seq) {
            throw QueryError(ErrorKind::Runtime, "internal: flatten expected a Seq container");
        }
        std::vector<Value> merged;
        for (const Value& inner : v.items()) {
            if (inner.kind() != Value::Kind::Seq) {
                throw QueryError(ErrorKind::Runtime, "internal: flatten expected Seq of Seq");
            }
            merged.insert(merged.end(), inner.items().begin(), inner.items().end());
        }
        return Value::seq(std::move(merged));
    }
    throw QueryError(ErrorKind::Runtime, "internal: flatten at ONE cardinality");
}

bool valuesEqual(const Value& a, const Value& b) {
    const bool a_num = a.kind() == Value::Kind::Int || a.kind() == Value::Kind::Num;
    const bool b_num = b.kind() == Value::Kind::Int || b.kind() == Value::Kind::Num;
    if (a_num && b_num) {
        if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) {
            return a.asInt() == b.asInt();
        }
        return a.numeric() == b.numeric();
    }
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case Value::Kind::Bool: return a.asBool() == b.asBool();
    case Value::Kind::Text: return a.asText() == b.asText();
    case Value::Kind::Ref:
        return a.asRef().className == b.asRef().className && a.asRef().ordinal == b.asRef().ordinal;
    case Value::Kind::Record: {
        const auto& fa = a.fields();
        const auto& fb = b.fields();
        if (fa.size() != fb.size()) return false;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            if (fa[i].first != fb[i].first) return false;
            if (!valuesEqual(fa[i].second, fb[i].second)) return false;
        }
        return true;
    }
    case Value::Kind::Missing: return true;
    case Value::Kind::Some: return valuesEqual(a.someInner(), b.someInner());
    case Value::Kind::Seq: {
        const auto& ia = a.items();
        const auto& ib = b.items();
        if (ia.size() != ib.size()) return false;
        for (std::size_t i = 0; i < ia.size(); ++i) {
            if (!valuesEqual(ia[i], ib[i])) return false;
        }
        return true;
    }
    default: return false; // Int/Num handled above
    }
}

namespace {

int compareDoubles(double x, double y) {
    // NaN compares greater than all numbers.
    const bool nx = std::isnan(x);
    const bool ny = std::isnan(y);
    if (nx || ny) {
        if (nx && ny) return 0;
        return nx ? 1 : -1;
    }
    if (x < y) return -1;
    if (x > y) return 1;
    return 0;
}

} // namespace

int compareValues(const Value& a, const Value& b) {
    const bool a_num = a.kind() == Value::Kind::Int || a.kind() == Value::Kind::Num;
    const bool b_num = b.kind() == Value::Kind::Int || b.kind() == Value::Kind::Num;
    if (a_num && b_num) {
        if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) {
            if (a.asInt() < b.asInt()) return -1;
            if (a.asInt() > b.asInt()) return 1;
            return 0;
        }
        return compareDoubles(a.numeric(), b.numeric());
    }
    // Missing sorts below any present value.
    if (a.isMissing() || b.isMissing()) {
        if (a.isMissing() && b.isMissing()) return 0;
        return a.isMissing() ? -1 : 1;
    }
    if (a.kind() != b.kind()) {
        throw QueryError(ErrorKind::Runtime, "internal: comparing values of different kinds");
    }
    switch (a.kind()) {
    case Value::Kind::Bool:
        return static_cast<int>(a.asBool()) - static_cast<int>(b.asBool());
    case Value::Kind::Text:
        return a.asText().compare(b.asText()) < 0 ? -1 : (a.asText() == b.asText() ? 0 : 1);
    case Value::Kind::Ref: {
        if (a.asRef().className != b.asRef().className) {
            throw QueryError(ErrorKind::Runtime, "internal: comparing refs of different classes");
        }
        if (a.asRef().ordinal < b.asRef().ordinal) return -1;
        if (a.asRef().ordinal > b.asRef().ordinal) return 1;
        return 0;
    }
    case Value::Kind::Record: {
        const auto& fa = a.fields();
        const auto& fb = b.fields();
        const std::size_t n = std::min(fa.size(), fb.size());
        for (std::size_t i = 0; i < n; ++i) {
            int c = compareValues(fa[i].second, fb[i].second);
            if (c != 0) return c;
        }
        return fa.size() == fb.size() ? 0 : (fa.size() < fb.size() ? -1 : 1);
    }
    case Value::Kind::Some:
        return compareValues(a.someInner(), b.someInner());
    case Value::Kind::Seq: {
        const auto& ia = a.items();
        const auto& ib = b.items();
        const std::size_t n = std::min(ia.size(), ib.size());
        for (std::size_t i = 0; i < n; ++i) {
            int c = compareValues(ia[i], ib[i]);
            if (c != 0) return c;
        }
        return ia.size() == ib.size() ? 0 : (ia.size() < ib.size() ? -1 : 1);
    }
    default:
        throw QueryError(ErrorKind::Runtime, "internal: values are not comparable");
    }
}

bool valuesClose(const Value& a, const Value& b, double relTol) {
    const bool a_num = a.kind() == Value::Kind::Int || a.kind() == Value::Kind::Num;
    const bool b_num = b.kind() == Value::Kind::Int || b.kind() == Value::Kind::Num;
    if (a_num && b_num) {
        if (a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int) {
            return a.asInt() == b.asInt();
        }
        const double x = a.numeric();
        const double y = b.numeric();
        if (x == y) return true;
        const double scale = std::max(std::abs(x), std::abs(y));
        return std::abs(x - y) <= relTol * scale;
    }
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case Value::Kind::Record: {
        const auto& fa = a.fields();
        const auto& fb = b.fields();
        if (fa.size() != fb.size()) return false;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            if (fa[i].first != fb[i].first) return false;
            if (!valuesClose(fa[i].second, fb[i].second, relTol)) return false;
        }
        return true;
    }
    case Value::Kind::Some:
        return valuesClose(a.someInner(), b.someInner(), relTol);
    case Value::Kind::Seq: {
        const auto& ia = a.items();
        const auto& ib = b.items();
        if (ia.size() != ib.size()) return false;
        for (std::size_t i = 0; i < ia.size(); ++i) {
            if (!valuesClose(ia[i], ib[i], relTol)) return false;
        }
        return true;
    }
    default:
        return valuesEqual(a, b);
    }
}

} // namespace rabbit
