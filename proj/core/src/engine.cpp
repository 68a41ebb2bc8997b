#include "rabbit/engine.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "rabbit/syntax.hpp"

namespace rabbit {

Block Block::singleton(const Database& db, Value input, EnvPtr env) {
    Block b;
    b.inputs.push_back(std::move(input));
    b.envs.push_back(std::move(env));
    b.db = &db;
    return b;
}

std::vector<Value> Column::elementsAt(std::size_t i) const {
    switch (card) {
    case Cardinality::One:
        return {items[i]};
    case Cardinality::Opt:
        if (items[i].isMissing()) return {};
        return {items[i].someInner()};
    case Cardinality::Seq:
        return items[i].items();
    }
    return {};
}

Column promoteColumn(const Column& col, Cardinality to) {
    if (col.card == to) return col;
    Column out;
    out.card = to;
    out.items.reserve(col.items.size());
    for (const Value& v : col.items) out.items.push_back(promote(v, col.card, to));
    return out;
}

namespace {

class Evaluator {
public:
    Column eval(const TypedQuery& q, const Block& block) {
        switch (q.kind) {
        case TypedKind::Here: {
            return Column{Cardinality::One, block.inputs};
        }
        case TypedKind::Home:
            return constColumn(block, Value::unit());
        case TypedKind::Null:
            return Column{Cardinality::Opt,
                          std::vector<Value>(block.size(), Value::missing())};
        case TypedKind::IntConst:
            return constColumn(block, Value::integer(q.intValue));
        case TypedKind::TextConst:
            return constColumn(block, Value::text(q.text));
        case TypedKind::BoolConst:
            return constColumn(block, Value::boolean(q.boolValue));
        case TypedKind::ClassExtent: {
            Column col{Cardinality::Seq, {}};
            const Value extent = block.db->classExtent(q.className);
            col.items.assign(block.size(), extent);
            return col;
        }
        case TypedKind::Attribute: {
            Column col{Cardinality::One, {}};
            col.items.reserve(block.size());
            for (const Value& v : block.inputs) {
                col.items.push_back(block.db->attribute(v.asRef(), q.memberIndex));
            }
            return col;
        }
        case TypedKind::Relationship: {
            Column col{q.sig.card, {}};
            col.items.reserve(block.size());
            for (const Value& v : block.inputs) {
                col.items.push_back(block.db->relationship(v.asRef(), q.memberIndex));
            }
            return col;
        }
        case TypedKind::FieldAccess: {
            Column col{q.sig.card, {}};
            col.items.reserve(block.size());
            for (const Value& v : block.inputs) {
                col.items.push_back(v.fields()[q.memberIndex].second);
            }
            return col;
        }
        case TypedKind::ParamRef: {
            Column col{q.sig.card, {}};
            col.items.reserve(block.size());
            for (std::size_t i = 0; i < block.size(); ++i) {
                const EnvPtr& env = block.envs[i];
                auto it = env ? env->find(q.text) : EnvMap::const_iterator{};
                if (!env || it == env->end()) {
                    throw QueryError(ErrorKind::Runtime,
                                     "internal: unbound parameter '" + q.text + "'", q.span);
                }
                col.items.push_back(it->second);
            }
            return col;
        }
        case TypedKind::DefineUse:
            return eval(*q.children[0], block);
        case TypedKind::Compose:
            return evalCompose(q, block);
        case TypedKind::ScalarOp:
            return evalScalarOp(q, block);
        case TypedKind::TextLength:
            return evalLength(q, block);
        case TypedKind::Aggregate:
            return evalAggregate(q, block);
        case TypedKind::Filter:
            return evalFilter(q, block);
        case TypedKind::Sort:
            return evalSort(q, block);
        case TypedKind::Take:
            return evalTake(q, block);
        case TypedKind::Unique:
            return evalUnique(q, block);
        case TypedKind::Select:
            return evalSelect(q, block);
        case TypedKind::Define:
            return eval(*q.children[0], block);
        case TypedKind::Connect:
            return evalConnect(q, block);
        case TypedKind::Group:
            return evalGroup(q, block, false);
        case TypedKind::Rollup:
            return evalGroup(q, block, true);
        case TypedKind::Given:
            return evalGiven(q, block);
        case TypedKind::Around: {
            Column col{Cardinality::Seq, {}};
            const Value whole = Value::seq(block.inputs);
            col.items.assign(block.size(), whole);
            return col;
        }
        case TypedKind::AroundBy:
            return evalAroundBy(q, block);
        case TypedKind::Before: {
            Column col{Cardinality::Seq, {}};
            col.items.reserve(block.size());
            for (std::size_t j = 0; j < block.size(); ++j) {
                std::vector<Value> prefix(block.inputs.begin(),
                                          block.inputs.begin() + j + 1);
                col.items.push_back(Value::seq(std::move(prefix)));
            }
            return col;
        }
        case TypedKind::Frame:
            return evalFrame(q, block);
        }
        throw QueryError(ErrorKind::Runtime, "internal: unhandled node kind", q.span);
    }

private:
    static Column constColumn(const Block& block, Value v) {
        Column col{Cardinality::One, {}};
        col.items.assign(block.size(), std::move(v));
        return col;
    }

    /// Builds the downstream block of a composition: the order-preserving
    /// concatenation of p's outputs, with the environment replicated alongside
    /// each propagated value. Missing OPT outputs contribute no flow entry.
    struct FlowExpansion {
        Block block;                          // q's block
        std::vector<std::size_t> offsets;     // per original position: first index
        std::vector<std::size_t> counts;      // per original position: element count
    };

    static FlowExpansion expand(const Column& col, const Block& block) {
        FlowExpansion fx;
        fx.block.db = block.db;
        fx.offsets.reserve(block.size());
        fx.counts.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            std::vector<Value> elems = col.elementsAt(i);
            fx.offsets.push_back(fx.block.inputs.size());
            fx.counts.push_back(elems.size());
            for (Value& e : elems) {
                fx.block.inputs.push_back(std::move(e));
                fx.block.envs.push_back(block.envs[i]);
            }
        }
        return fx;
    }

    Column evalCompose(const TypedQuery& q, const Block& block) {
        const TypedQuery& p = *q.children[0];
        const TypedQuery& r = *q.children[1];
        Column colP = eval(p, block);

        if (colP.card == Cardinality::One) {
            Block inner{colP.items, block.envs, block.db};
            return eval(r, inner);
        }

        FlowExpansion fx = expand(colP, block);
        Column colR = eval(r, fx.block);
        Column out{q.sig.card, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (q.sig.card == Cardinality::Opt) {
                // p optional, r at most optional.
                if (fx.counts[i] == 0) {
                    out.items.push_back(Value::missing());
                } else {
                    const Value& v = colR.items[fx.offsets[i]];
                    out.items.push_back(colR.card == Cardinality::One ? Value::some(v) : v);
                }
            } else {
                std::vector<Value> merged;
                for (std::size_t k = 0; k < fx.counts[i]; ++k) {
                    const Value& v = colR.items[fx.offsets[i] + k];
                    Value seq = promote(v, colR.card, Cardinality::Seq);
                    merged.insert(merged.end(), seq.items().begin(), seq.items().end());
                }
                out.items.push_back(Value::seq(std::move(merged)));
            }
        }
        return out;
    }

    Column evalScalarOp(const TypedQuery& q, const Block& block) {
        Column lhs = eval(*q.children[0], block);
        Column rhs = eval(*q.children[1], block);
        Column out{q.sig.card, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            const Value* a = presentAt(lhs, i);
            const Value* b = presentAt(rhs, i);
            if (!a || !b) {
                out.items.push_back(Value::missing()); // card is Opt here
                continue;
            }
            Value v = applyOp(q, *a, *b);
            out.items.push_back(out.card == Cardinality::Opt ? Value::some(std::move(v))
                                                             : std::move(v));
        }
        return out;
    }

    /// Pointer to the scalar at position i, or nullptr when Missing.
    static const Value* presentAt(const Column& col, std::size_t i) {
        if (col.card == Cardinality::One) return &col.items[i];
        if (col.items[i].isMissing()) return nullptr;
        return &col.items[i].someInner();
    }

    Value applyOp(const TypedQuery& q, const Value& a, const Value& b) {
        switch (q.op) {
        case BinaryOp::Eq: return Value::boolean(valuesEqual(a, b));
        case BinaryOp::Ne: return Value::boolean(!valuesEqual(a, b));
        case BinaryOp::Lt: return Value::boolean(compareValues(a, b) < 0);
        case BinaryOp::Le: return Value::boolean(compareValues(a, b) <= 0);
        case BinaryOp::Gt: return Value::boolean(compareValues(a, b) > 0);
        case BinaryOp::Ge: return Value::boolean(compareValues(a, b) >= 0);
        case BinaryOp::And: return Value::boolean(a.asBool() && b.asBool());
        case BinaryOp::Or: return Value::boolean(a.asBool() || b.asBool());
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div:
            break;
        }
        const bool both_int = a.kind() == Value::Kind::Int && b.kind() == Value::Kind::Int;
        if (q.op == BinaryOp::Div) {
            if (both_int) {
                if (b.asInt() == 0) {
                    throw QueryError(ErrorKind::Runtime, "division by zero", q.span);
                }
                if (a.asInt() == INT64_MIN && b.asInt() == -1) {
                    throw QueryError(ErrorKind::Runtime, "integer overflow in division", q.span);
                }
                return Value::integer(a.asInt() / b.asInt()); // truncates toward zero
            }
            if (b.numeric() == 0.0) {
                throw QueryError(ErrorKind::Runtime, "division by zero", q.span);
            }
            return Value::number(a.numeric() / b.numeric());
        }
        if (both_int) {
            const auto ua = static_cast<std::uint64_t>(a.asInt());
            const auto ub = static_cast<std::uint64_t>(b.asInt());
            std::uint64_t r = 0;
            switch (q.op) {
            case BinaryOp::Add: r = ua + ub; break;
            case BinaryOp::Sub: r = ua - ub; break;
            default: r = ua * ub; break;
            }
            return Value::integer(static_cast<std::int64_t>(r));
        }
        const double x = a.numeric();
        const double y = b.numeric();
        switch (q.op) {
        case BinaryOp::Add: return Value::number(x + y);
        case BinaryOp::Sub: return Value::number(x - y);
        default: return Value::number(x * y);
        }
    }

    Column evalLength(const TypedQuery& q, const Block& block) {
        Column arg = eval(*q.children[0], block);
        Column out{q.sig.card, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            const Value* v = presentAt(arg, i);
            if (!v) {
                out.items.push_back(Value::missing());
                continue;
            }
            std::int64_t count = 0;
            for (unsigned char c : v->asText()) {
                if ((c & 0xC0) != 0x80) ++count; // count code points, not bytes
            }
            Value n = Value::integer(count);
            out.items.push_back(out.card == Cardinality::Opt ? Value::some(std::move(n))
                                                             : std::move(n));
        }
        return out;
    }

    Column evalAggregate(const TypedQuery& q, const Block& block) {
        Column arg = eval(*q.children[0], block);
        const DataType& elem_type = q.children[0]->sig.output;
        Column out{q.sig.card, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            const std::vector<Value>& elems = arg.items[i].items();
            out.items.push_back(reduce(q.agg, elems, elem_type));
        }
        return out;
    }

    static Value reduce(AggregateKind kind, const std::vector<Value>& elems,
                        const DataType& elemType) {
        switch (kind) {
        case AggregateKind::Count:
            return Value::integer(static_cast<std::int64_t>(elems.size()));
        case AggregateKind::Exists:
            return Value::boolean(!elems.empty());
        case AggregateKind::Any: {
            bool r = false;
            for (const Value& v : elems) {
                if (!v.isMissing() && v.asBool()) r = true;
            }
            return Value::boolean(r);
        }
        case AggregateKind::All: {
            bool r = true;
            for (const Value& v : elems) {
                if (!v.isMissing() && !v.asBool()) r = false;
            }
            return Value::boolean(r);
        }
        case AggregateKind::Sum: {
            if (elemType.is(DataType::Kind::Num)) {
                double total = 0;
                for (const Value& v : elems) total += v.numeric();
                return Value::number(total);
            }
            std::int64_t total = 0;
            for (const Value& v : elems) total += v.asInt();
            return Value::integer(total);
        }
        case AggregateKind::Max:
        case AggregateKind::Min: {
            const Value* best = nullptr;
            for (const Value& v : elems) {
                if (!best) {
                    best = &v;
                    continue;
                }
                const int c = compareValues(v, *best);
                if (kind == AggregateKind::Max ? c > 0 : c < 0) best = &v;
            }
            return best ? Value::some(*best) : Value::missing();
        }
        case AggregateKind::Mean: {
            if (elems.empty()) return Value::missing();
            double total = 0;
            for (const Value& v : elems) total += v.numeric();
            return Value::some(Value::number(total / static_cast<double>(elems.size())));
        }
        }
        return Value::missing();
    }

    Column evalFilter(const TypedQuery& q, const Block& block) {
        Column base = eval(*q.children[0], block);
        FlowExpansion fx = expand(base, block);
        Column pred = eval(*q.children[1], fx.block);
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            std::vector<Value> kept;
            for (std::size_t k = 0; k < fx.counts[i]; ++k) {
                const std::size_t at = fx.offsets[i] + k;
                const Value* verdict = presentAt(pred, at);
                if (verdict && verdict->asBool()) { // ⊥ counts as false
                    kept.push_back(fx.block.inputs[at]);
                }
            }
            out.items.push_back(Value::seq(std::move(kept)));
        }
        return out;
    }

    /// Missing keys order first under ASC and last under DESC.
    static int compareKey(const Value& a, const Value& b, SortDirection dir) {
        const bool am = a.isMissing();
        const bool bm = b.isMissing();
        if (am || bm) {
            if (am && bm) return 0;
            const int miss_first = am ? -1 : 1;
            return dir == SortDirection::Asc ? miss_first : -miss_first;
        }
        const Value& va = a.kind() == Value::Kind::Some ? a.someInner() : a;
        const Value& vb = b.kind() == Value::Kind::Some ? b.someInner() : b;
        const int c = compareValues(va, vb);
        return dir == SortDirection::Asc ? c : -c;
    }

    Column evalSort(const TypedQuery& q, const Block& block) {
        Column base = eval(*q.children[0], block);
        FlowExpansion fx = expand(base, block);
        const std::size_t nkeys = q.children.size() - 1;
        std::vector<Column> keys;
        keys.reserve(nkeys);
        for (std::size_t k = 0; k < nkeys; ++k) {
            keys.push_back(eval(*q.children[k + 1], fx.block));
        }
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            std::vector<std::size_t> order(fx.counts[i]);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                const std::size_t ax = fx.offsets[i] + x;
                const std::size_t ay = fx.offsets[i] + y;
                if (nkeys == 0) {
                    return compareValues(fx.block.inputs[ax], fx.block.inputs[ay]) < 0;
                }
                for (std::size_t k = 0; k < nkeys; ++k) {
                    const int c = compareKey(keys[k].items[ax], keys[k].items[ay], q.dirs[k]);
                    if (c != 0) return c < 0;
                }
                return false;
            });
            std::vector<Value> sorted;
            sorted.reserve(order.size());
            for (std::size_t x : order) sorted.push_back(fx.block.inputs[fx.offsets[i] + x]);
            out.items.push_back(Value::seq(std::move(sorted)));
        }
        return out;
    }

    Column evalTake(const TypedQuery& q, const Block& block) {
        Column base = eval(*q.children[0], block);
        Column count = eval(*q.children[1], block);
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            const std::vector<Value>& elems = base.items[i].items();
            std::int64_t n = count.items[i].asInt();
            n = std::clamp<std::int64_t>(n, 0, static_cast<std::int64_t>(elems.size()));
            out.items.push_back(
                Value::seq(std::vector<Value>(elems.begin(), elems.begin() + n)));
        }
        return out;
    }

    Column evalUnique(const TypedQuery& q, const Block& block) {
        Column base = eval(*q.children[0], block);
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            std::vector<Value> elems = base.items[i].items();
            std::sort(elems.begin(), elems.end(),
                      [](const Value& a, const Value& b) { return compareValues(a, b) < 0; });
            elems.erase(std::unique(elems.begin(), elems.end(),
                                    [](const Value& a, const Value& b) {
                                        return valuesEqual(a, b);
                                    }),
                        elems.end());
            out.items.push_back(Value::seq(std::move(elems)));
        }
        return out;
    }

    Column evalSelect(const TypedQuery& q, const Block& block) {
        Column base = eval(*q.children[0], block);
        FlowExpansion fx = expand(base, block);
        const std::size_t nfields = q.children.size() - 1;
        std::vector<Column> fields;
        fields.reserve(nfields);
        for (std::size_t f = 0; f < nfields; ++f) {
            fields.push_back(eval(*q.children[f + 1], fx.block));
        }
        // One record per produced element; each field keeps its own container.
        std::vector<Value> records(fx.block.size());
        for (std::size_t e = 0; e < fx.block.size(); ++e) {
            Value::FieldList rec;
            rec.reserve(nfields);
            for (std::size_t f = 0; f < nfields; ++f) {
                rec.emplace_back(q.tags[f], fields[f].items[e]);
            }
            records[e] = Value::record(std::move(rec));
        }
        Column out{base.card, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            switch (base.card) {
            case Cardinality::One:
                out.items.push_back(records[fx.offsets[i]]);
                break;
            case Cardinality::Opt:
                out.items.push_back(fx.counts[i] == 0
                                        ? Value::missing()
                                        : Value::some(records[fx.offsets[i]]));
                break;
            case Cardinality::Seq: {
                std::vector<Value> group(records.begin() + fx.offsets[i],
                                         records.begin() + fx.offsets[i] + fx.counts[i]);
                out.items.push_back(Value::seq(std::move(group)));
                break;
            }
            }
        }
        return out;
    }

    Column evalConnect(const TypedQuery& q, const Block& block) {
        const TypedQuery& step = *q.children[0];
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            std::vector<Value> chain;
            std::set<std::pair<std::string, std::int64_t>> seen;
            Value cur = block.inputs[i];
            if (cur.kind() == Value::Kind::Ref) {
                seen.insert({cur.asRef().className, cur.asRef().ordinal});
            }
            constexpr std::size_t kStepCap = 1u << 20;
            for (;;) {
                Block one = Block::singleton(*block.db, cur, block.envs[i]);
                Column next = eval(step, one);
                if (next.items[0].isMissing()) break;
                cur = next.items[0].someInner();
                if (cur.kind() == Value::Kind::Ref) {
                    if (!seen.insert({cur.asRef().className, cur.asRef().ordinal}).second) {
                        throw QueryError(ErrorKind::Runtime,
                                         "connect found a cycle; the chain revisits an entity",
                                         q.span);
                    }
                }
                chain.push_back(cur);
                if (chain.size() > kStepCap) {
                    throw QueryError(ErrorKind::Runtime, "connect did not terminate", q.span);
                }
            }
            out.items.push_back(Value::seq(std::move(chain)));
        }
        return out;
    }

    Column evalGroup(const TypedQuery& q, const Block& block, bool rollup) {
        Column base = eval(*q.children[0], block);
        FlowExpansion fx = expand(base, block);
        const std::size_t nkeys = q.children.size() - 1;
        std::vector<Column> keys;
        keys.reserve(nkeys);
        for (std::size_t k = 0; k < nkeys; ++k) {
            keys.push_back(eval(*q.children[k + 1], fx.block));
        }
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            std::vector<std::size_t> elems(fx.counts[i]);
            std::iota(elems.begin(), elems.end(), fx.offsets[i]);
            std::vector<Value> records;
            if (rollup) {
                if (!elems.empty()) {
                    emitRollup(q, fx, keys, elems, 0, {}, &records);
                }
            } else {
                emitGroups(q, fx, keys, elems, &records);
            }
            out.items.push_back(Value::seq(std::move(records)));
        }
        return out;
    }

    /// Partitions element indices by the value of one key, ordered by the
    /// key's direction; members keep their original order.
    static std::vector<std::pair<Value, std::vector<std::size_t>>> partitionBy(
        const Column& key, const std::vector<std::size_t>& elems, SortDirection dir) {
        std::vector<std::pair<Value, std::vector<std::size_t>>> parts;
        for (std::size_t e : elems) {
            const Value& kv = key.items[e];
            bool found = false;
            for (auto& [v, members] : parts) {
                if (valuesEqual(v, kv)) {
                    members.push_back(e);
                    found = true;
                    break;
                }
            }
            if (!found) parts.push_back({kv, {e}});
        }
        std::stable_sort(parts.begin(), parts.end(), [&](const auto& a, const auto& b) {
            return compareKey(a.first, b.first, dir) < 0;
        });
        return parts;
    }

    void emitGroups(const TypedQuery& q, const FlowExpansion& fx,
                    const std::vector<Column>& keys, const std::vector<std::size_t>& elems,
                    std::vector<Value>* records) {
        const std::size_t nkeys = keys.size();
        // Partition recursively key by key; a single flat pass with tuple sort
        // would do, but the recursion matches rollup and keeps dirs local.
        struct Rec {
            std::vector<Value> keyValues;
            std::vector<std::size_t> members;
        };
        std::vector<Rec> groups{{{}, elems}};
        for (std::size_t k = 0; k < nkeys; ++k) {
            std::vector<Rec> next;
            for (Rec& g : groups) {
                for (auto& [v, members] : partitionBy(keys[k], g.members, q.dirs[k])) {
                    Rec r;
                    r.keyValues = g.keyValues;
                    r.keyValues.push_back(v);
                    r.members = std::move(members);
                    next.push_back(std::move(r));
                }
            }
            groups = std::move(next);
        }
        for (const Rec& g : groups) {
            records->push_back(makeQuotient(q, fx, g.keyValues, g.members, false));
        }
    }

    /// Children of a node first, then its subtotal; the root call therefore
    /// emits the grand total last.
    void emitRollup(const TypedQuery& q, const FlowExpansion& fx,
                    const std::vector<Column>& keys, const std::vector<std::size_t>& elems,
                    std::size_t depth, std::vector<Value> path, std::vector<Value>* records) {
        if (depth < keys.size()) {
            for (auto& [v, members] : partitionBy(keys[depth], elems, q.dirs[depth])) {
                std::vector<Value> next = path;
                next.push_back(v);
                emitRollup(q, fx, keys, members, depth + 1, std::move(next), records);
            }
        }
        records->push_back(makeQuotient(q, fx, path, elems, true));
    }

    Value makeQuotient(const TypedQuery& q, const FlowExpansion& fx,
                       const std::vector<Value>& keyValues,
                       const std::vector<std::size_t>& members, bool optKeys) {
        Value::FieldList rec;
        rec.reserve(q.tags.size() + 1);
        for (std::size_t k = 0; k < q.tags.size(); ++k) {
            Value kv = k < keyValues.size() ? keyValues[k] : Value::missing();
            if (optKeys && k < keyValues.size()) kv = Value::some(std::move(kv));
            rec.emplace_back(q.tags[k], std::move(kv));
        }
        std::vector<Value> memberValues;
        memberValues.reserve(members.size());
        for (std::size_t e : members) memberValues.push_back(fx.block.inputs[e]);
        rec.emplace_back(q.text, Value::seq(std::move(memberValues)));
        return Value::record(std::move(rec));
    }

    Column evalGiven(const TypedQuery& q, const Block& block) {
        const std::size_t nbind = q.children.size() - 1;
        std::vector<Column> bound;
        bound.reserve(nbind);
        for (std::size_t b = 0; b < nbind; ++b) {
            bound.push_back(eval(*q.children[b + 1], block));
        }
        Block inner{block.inputs, {}, block.db};
        inner.envs.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            EnvMap env = block.envs[i] ? *block.envs[i] : EnvMap{};
            for (std::size_t b = 0; b < nbind; ++b) {
                env[q.tags[b]] = bound[b].items[i];
            }
            inner.envs.push_back(std::make_shared<const EnvMap>(std::move(env)));
        }
        return eval(*q.children[0], inner);
    }

    Column evalAroundBy(const TypedQuery& q, const Block& block) {
        Column key = eval(*q.children[0], block);
        Column out{Cardinality::Seq, {}};
        out.items.reserve(block.size());
        for (std::size_t j = 0; j < block.size(); ++j) {
            std::vector<Value> matched;
            for (std::size_t i = 0; i < block.size(); ++i) {
                // Missing keys match Missing.
                if (valuesEqual(key.items[i], key.items[j])) {
                    matched.push_back(block.inputs[i]);
                }
            }
            out.items.push_back(Value::seq(std::move(matched)));
        }
        return out;
    }

    Column evalFrame(const TypedQuery& q, const Block& block) {
        Column out;
        out.card = q.sig.card;
        out.items.reserve(block.size());
        for (std::size_t i = 0; i < block.size(); ++i) {
            Block one = Block::singleton(*block.db, block.inputs[i], block.envs[i]);
            Column piece = eval(*q.children[0], one);
            out.items.push_back(piece.items[0]);
        }
        return out;
    }
};

} // namespace

Column evaluate(const TypedQuery& q, const Block& block) {
    Evaluator ev;
    return ev.eval(q, block);
}

CompiledQuery compileQuery(const Database& db, const std::string& text, const DataType& input,
                           const std::optional<DataType>& expected) {
    ExprPtr expr = parse(text);
    Typer typer(db.schema());
    return CompiledQuery(typer.infer(*expr, input, expected));
}

Value run(const Database& db, const CompiledQuery& query) {
    const Signature& sig = query.signature();
    if (!sig.input.isVoid()) {
        throw QueryError(ErrorKind::Type,
                         "top-level queries take Void input; this one needs " +
                             sig.input.display());
    }
    if (!sig.params.empty()) {
        std::string names;
        for (const ParamInfo& p : sig.params) {
            if (!names.empty()) names += ", ";
            names += p.name;
        }
        throw QueryError(ErrorKind::Type,
                         "query still depends on parameters: " + names +
                             "; bind them with given(...)");
    }
    Block top = Block::singleton(db, Value::unit());
    Column col = query.evaluate(top);
    return col.items[0];
}

Value runQuery(const Database& db, const std::string& text) {
    return run(db, compileQuery(db, text));
}

} // namespace rabbit
