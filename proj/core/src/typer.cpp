#include "rabbit/typer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rabbit {

std::string Signature::display() const {
    std::string in = input.display();
    if (usesFlow) in = "Rel{" + in + "}";
    if (!params.empty()) {
        std::ostringstream env;
        env << "Env{";
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (i) env << ", ";
            env << params[i].name << ':' << displayWrapped(params[i].type, params[i].card);
        }
        env << "}{" << in << '}';
        in = env.str();
    }
    return in + " -> " + displayWrapped(output, card);
}

std::vector<ParamInfo> mergeParams(const std::vector<ParamInfo>& a,
                                   const std::vector<ParamInfo>& b) {
    std::vector<ParamInfo> merged = a;
    for (const ParamInfo& p : b) {
        bool present = false;
        for (const ParamInfo& q : merged) {
            if (q.name == p.name) {
                present = true;
                break;
            }
        }
        if (!present) merged.push_back(p);
    }
    std::sort(merged.begin(), merged.end(),
              [](const ParamInfo& x, const ParamInfo& y) { return x.name < y.name; });
    return merged;
}

namespace {

bool isTransformerHead(const std::string& head) {
    static const std::set<std::string> heads = {
        "filter", "sort", "take", "unique", "select", "define", "frame",
        "given",  "group", "rollup", "connect", "desc", "asc",
    };
    return heads.count(head) > 0;
}

std::vector<ParamInfo> paramsOf(const std::vector<TypedPtr>& nodes) {
    std::vector<ParamInfo> out;
    for (const TypedPtr& n : nodes) out = mergeParams(out, n->sig.params);
    return out;
}

bool anyFlow(const std::vector<TypedPtr>& nodes) {
    for (const TypedPtr& n : nodes) {
        if (n->sig.usesFlow) return true;
    }
    return false;
}

std::shared_ptr<TypedQuery> makeNode(TypedKind kind, Signature sig, SourceSpan span) {
    auto node = std::make_shared<TypedQuery>();
    node->kind = kind;
    node->sig = std::move(sig);
    node->span = span;
    return node;
}

/// Peels a desc/asc annotation off a sort/group key expression.
const QueryExpr* peelDirection(const QueryExpr& expr, SortDirection* dir) {
    *dir = SortDirection::Asc;
    if (expr.kind == QueryExpr::Kind::Apply && expr.children.size() == 1) {
        if (expr.name == "desc") {
            *dir = SortDirection::Desc;
            return expr.children[0].get();
        }
        if (expr.name == "asc") return expr.children[0].get();
    }
    return &expr;
}

} // namespace

std::string trailingName(const QueryExpr& expr) {
    switch (expr.kind) {
    case QueryExpr::Kind::Name:
        return expr.name;
    case QueryExpr::Kind::Compose:
        return trailingName(*expr.children[1]);
    case QueryExpr::Kind::Tagged:
        return expr.name;
    default:
        return "";
    }
}

std::string defaultFieldName(const QueryExpr& expr) {
    std::string name = trailingName(expr);
    if (!name.empty()) return name;
    if (expr.kind == QueryExpr::Kind::Apply) {
        if (isTransformerHead(expr.name) && !expr.children.empty()) {
            return defaultFieldName(*expr.children[0]);
        }
        return expr.name; // aggregates, length, around(...)
    }
    if (expr.kind == QueryExpr::Kind::Compose) {
        return defaultFieldName(*expr.children[1]);
    }
    return "";
}

TypedPtr Typer::infer(const QueryExpr& expr, const DataType& input,
                      const std::optional<DataType>& expected) {
    Ctx ctx{input, {}, {}};
    TypedPtr node = inferExpr(expr, ctx);
    if (node->sig.output.isUnknown()) {
        if (expected) {
            auto annotated = std::make_shared<TypedQuery>(*node);
            annotated->sig.output = *expected;
            return annotated;
        }
        throw QueryError(ErrorKind::Type,
                         "the output type of null is unconstrained here; compare or combine it "
                         "with a typed query",
                         expr.span);
    }
    return node;
}

TypedPtr Typer::inferExpr(const QueryExpr& expr, const Ctx& ctx) {
    switch (expr.kind) {
    case QueryExpr::Kind::Name:
        return inferName(expr, ctx);
    case QueryExpr::Kind::IntLit: {
        auto node = makeNode(TypedKind::IntConst,
                             {ctx.input, DataType::integer(), Cardinality::One}, expr.span);
        node->intValue = expr.intValue;
        return node;
    }
    case QueryExpr::Kind::TextLit: {
        auto node = makeNode(TypedKind::TextConst,
                             {ctx.input, DataType::text(), Cardinality::One}, expr.span);
        node->text = expr.textValue;
        return node;
    }
    case QueryExpr::Kind::Compose:
        return inferCompose(expr, ctx);
    case QueryExpr::Kind::Apply:
        return inferApply(expr, ctx);
    case QueryExpr::Kind::BinOp:
        return inferBinOp(expr, ctx);
    case QueryExpr::Kind::Tagged:
        throw QueryError(ErrorKind::Tag,
                         "a tag is only allowed on direct combinator arguments", expr.span);
    }
    throw QueryError(ErrorKind::Type, "internal: unhandled expression kind", expr.span);
}

std::vector<std::string> Typer::namesInScope(const Ctx& ctx) const {
    std::vector<std::string> names;
    for (const DefineBinding& d : ctx.defines) names.push_back(d.tag);
    if (ctx.input.isRecord()) {
        for (const RecordFieldDef& f : ctx.input.record().fields) names.push_back(f.tag);
    }
    if (ctx.input.isEntity()) {
        if (const ClassDef* cls = schema_.findClass(ctx.input.className())) {
            for (const auto& a : cls->attributes) names.push_back(a.name);
            for (const auto& r : cls->relationships) names.push_back(r.name);
        }
    }
    for (const auto& [name, info] : ctx.params) names.push_back(name);
    if (ctx.input.isVoid()) {
        for (const ClassDef& cls : schema_.classes()) names.push_back(cls.extent);
    }
    for (const char* b : {"here", "home", "null", "true", "false", "around", "before"}) {
        names.emplace_back(b);
    }
    return names;
}

void Typer::unknownName(const QueryExpr& expr, const Ctx& ctx) const {
    std::vector<std::string> names = namesInScope(ctx);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::ostringstream msg;
    msg << "unknown name '" << expr.name << "' at " << ctx.input.display() << "; available:";
    std::size_t shown = 0;
    for (const std::string& n : names) {
        if (shown++ == 12) {
            msg << " ...";
            break;
        }
        msg << ' ' << n;
    }
    throw QueryError(ErrorKind::UnknownName, msg.str(), expr.span);
}

TypedPtr Typer::inferName(const QueryExpr& expr, const Ctx& ctx) {
    const std::string& name = expr.name;

    // Aliases, innermost first.
    for (auto it = ctx.defines.rbegin(); it != ctx.defines.rend(); ++it) {
        if (it->tag == name) {
            auto node = makeNode(TypedKind::DefineUse, it->query->sig, expr.span);
            node->text = name;
            node->children = {it->query};
            node->exportedDefines = it->query->exportedDefines;
            return node;
        }
    }
    // Record / quotient fields.
    if (ctx.input.isRecord()) {
        int i = ctx.input.record().indexOf(name);
        if (i >= 0) {
            const RecordFieldDef& f = ctx.input.record().fields[i];
            auto node = makeNode(TypedKind::FieldAccess, {ctx.input, f.type, f.card}, expr.span);
            node->text = name;
            node->memberIndex = i;
            return node;
        }
    }
    // Entity attributes and relationships.
    if (ctx.input.isEntity()) {
        const ClassDef* cls = schema_.findClass(ctx.input.className());
        if (cls) {
            int ai = cls->attributeIndex(name);
            if (ai >= 0) {
                auto node = makeNode(
                    TypedKind::Attribute,
                    {ctx.input, cls->attributes[ai].type, Cardinality::One}, expr.span);
                node->text = name;
                node->className = cls->name;
                node->memberIndex = ai;
                return node;
            }
            int ri = cls->relationshipIndex(name);
            if (ri >= 0) {
                const RelationshipDef& rel = cls->relationships[ri];
                auto node = makeNode(
                    TypedKind::Relationship,
                    {ctx.input, DataType::entity(rel.target), rel.card}, expr.span);
                node->text = name;
                node->className = cls->name;
                node->memberIndex = ri;
                return node;
            }
        }
    }
    // Environment parameters.
    auto param = ctx.params.find(name);
    if (param != ctx.params.end()) {
        Signature sig{ctx.input, param->second.type, param->second.card};
        sig.params = {param->second};
        auto node = makeNode(TypedKind::ParamRef, std::move(sig), expr.span);
        node->text = name;
        return node;
    }
    // Class primitives live at Void under their extent names.
    if (ctx.input.isVoid()) {
        if (const ClassDef* cls = schema_.findClassByExtent(name)) {
            auto node = makeNode(
                TypedKind::ClassExtent,
                {ctx.input, DataType::entity(cls->name), Cardinality::Seq}, expr.span);
            node->className = cls->name;
            return node;
        }
    }
    // Built-ins.
    if (name == "here") {
        return makeNode(TypedKind::Here, {ctx.input, ctx.input, Cardinality::One}, expr.span);
    }
    if (name == "home") {
        return makeNode(TypedKind::Home, {ctx.input, DataType::voidType(), Cardinality::One},
                        expr.span);
    }
    if (name == "null") {
        return makeNode(TypedKind::Null, {ctx.input, DataType::unknown(), Cardinality::Opt},
                        expr.span);
    }
    if (name == "true" || name == "false") {
        auto node = makeNode(TypedKind::BoolConst,
                             {ctx.input, DataType::boolean(), Cardinality::One}, expr.span);
        node->boolValue = (name == "true");
        return node;
    }
    if (name == "around" || name == "before") {
        Signature sig{ctx.input, ctx.input, Cardinality::Seq};
        sig.usesFlow = true;
        return makeNode(name == "around" ? TypedKind::Around : TypedKind::Before, std::move(sig),
                        expr.span);
    }
    unknownName(expr, ctx);
}

Typer::Ctx Typer::elemCtx(const TypedPtr& base, const Ctx& ctx) const {
    return Ctx{base->sig.output, base->exportedDefines, ctx.params};
}

void Typer::requirePlural(const TypedPtr& q, const char* what) const {
    if (q->sig.card != Cardinality::Seq) {
        std::ostringstream msg;
        msg << what << " needs a plural argument; this query has cardinality "
            << cardinalityName(q->sig.card);
        throw QueryError(ErrorKind::Cardinality, msg.str(), q->span);
    }
}

void Typer::checkArity(const QueryExpr& expr, std::size_t min, std::size_t max) const {
    const std::size_t n = expr.children.size();
    if (n < min || n > max) {
        std::ostringstream msg;
        msg << "'" << expr.name << "' expects ";
        if (min == max) {
            msg << min << (min == 1 ? " argument" : " arguments");
        } else if (max == SIZE_MAX) {
            msg << "at least " << min << " arguments";
        } else {
            msg << min << " to " << max << " arguments";
        }
        msg << "; got " << n;
        throw QueryError(ErrorKind::Arity, msg.str(), expr.span);
    }
}

TypedPtr Typer::inferCompose(const QueryExpr& expr, const Ctx& ctx) {
    TypedPtr lhs = inferExpr(*expr.children[0], ctx);
    if (lhs->sig.output.isUnknown()) {
        throw QueryError(ErrorKind::Type, "cannot navigate from null: its type is unknown",
                         expr.children[0]->span);
    }
    TypedPtr rhs = inferExpr(*expr.children[1], elemCtx(lhs, ctx));
    Signature sig{ctx.input, rhs->sig.output, join(lhs->sig.card, rhs->sig.card)};
    sig.params = mergeParams(lhs->sig.params, rhs->sig.params);
    sig.usesFlow = lhs->sig.usesFlow || rhs->sig.usesFlow;
    auto node = makeNode(TypedKind::Compose, std::move(sig), expr.span);
    node->exportedDefines = rhs->exportedDefines;
    node->children = {std::move(lhs), std::move(rhs)};
    return node;
}

TypedPtr Typer::inferBinOp(const QueryExpr& expr, const Ctx& ctx) {
    TypedPtr lhs = inferExpr(*expr.children[0], ctx);
    TypedPtr rhs = inferExpr(*expr.children[1], ctx);
    for (const TypedPtr& side : {lhs, rhs}) {
        if (side->sig.card == Cardinality::Seq) {
            throw QueryError(ErrorKind::Cardinality,
                             "operand of a scalar operator must be singular or optional, not "
                             "plural; aggregate it first",
                             side->span);
        }
    }
    DataType unified;
    if (!unifyTypes(lhs->sig.output, rhs->sig.output, &unified)) {
        throw QueryError(ErrorKind::Type,
                         "operands of '" + std::string(binaryOpToken(expr.op)) +
                             "' have incompatible types " + lhs->sig.output.display() + " and " +
                             rhs->sig.output.display(),
                         expr.span);
    }
    DataType out;
    switch (expr.op) {
    case BinaryOp::Eq:
    case BinaryOp::Ne:
        out = DataType::boolean();
        break;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
        if (!unified.isOrdered()) {
            throw QueryError(ErrorKind::Type,
                             "'" + std::string(binaryOpToken(expr.op)) +
                                 "' needs an ordered type; got " + unified.display(),
                             expr.span);
        }
        out = DataType::boolean();
        break;
    case BinaryOp::And:
    case BinaryOp::Or: {
        DataType b;
        if (!unifyTypes(unified, DataType::boolean(), &b) || !b.is(DataType::Kind::Bool)) {
            throw QueryError(ErrorKind::Type,
                             "'" + std::string(binaryOpToken(expr.op)) +
                                 "' needs Bool operands; got " + unified.display(),
                             expr.span);
        }
        out = DataType::boolean();
        break;
    }
    case BinaryOp::Add:
    case BinaryOp::Sub:
    case BinaryOp::Mul:
    case BinaryOp::Div:
        if (!unified.isNumeric()) {
            throw QueryError(ErrorKind::Type,
                             "'" + std::string(binaryOpToken(expr.op)) +
                                 "' needs Int or Num operands; got " + unified.display(),
                             expr.span);
        }
        out = unified;
        break;
    }
    Signature sig{ctx.input, out, join(lhs->sig.card, rhs->sig.card)};
    sig.params = mergeParams(lhs->sig.params, rhs->sig.params);
    sig.usesFlow = lhs->sig.usesFlow || rhs->sig.usesFlow;
    auto node = makeNode(TypedKind::ScalarOp, std::move(sig), expr.span);
    node->op = expr.op;
    node->children = {std::move(lhs), std::move(rhs)};
    return node;
}

TypedPtr Typer::inferApply(const QueryExpr& expr, const Ctx& ctx) {
    const std::string& head = expr.name;
    if (head == "count") return inferAggregate(expr, AggregateKind::Count, ctx);
    if (head == "exists") return inferAggregate(expr, AggregateKind::Exists, ctx);
    if (head == "any") return inferAggregate(expr, AggregateKind::Any, ctx);
    if (head == "all") return inferAggregate(expr, AggregateKind::All, ctx);
    if (head == "sum") return inferAggregate(expr, AggregateKind::Sum, ctx);
    if (head == "max") return inferAggregate(expr, AggregateKind::Max, ctx);
    if (head == "min") return inferAggregate(expr, AggregateKind::Min, ctx);
    if (head == "mean") return inferAggregate(expr, AggregateKind::Mean, ctx);
    if (head == "filter") return inferFilter(expr, ctx);
    if (head == "sort") return inferSort(expr, ctx);
    if (head == "take") return inferTake(expr, ctx);
    if (head == "unique") return inferUnique(expr, ctx);
    if (head == "select") return inferSelect(expr, ctx);
    if (head == "define") return inferDefine(expr, ctx);
    if (head == "connect") return inferConnect(expr, ctx);
    if (head == "group") return inferGroupLike(expr, false, ctx);
    if (head == "rollup") return inferGroupLike(expr, true, ctx);
    if (head == "given") return inferGiven(expr, ctx);
    if (head == "frame") return inferFrame(expr, ctx);
    if (head == "around") return inferAroundBy(expr, ctx);
    if (head == "length") return inferLength(expr, ctx);
    if (head == "desc" || head == "asc") {
        throw QueryError(ErrorKind::Type,
                         "'" + head + "' is only valid as a sort, group, or rollup key annotation",
                         expr.span);
    }
    if (head == "here" || head == "home" || head == "null" || head == "true" ||
        head == "false" || head == "before") {
        throw QueryError(ErrorKind::Arity, "'" + head + "' takes no arguments", expr.span);
    }
    // Not a combinator; say whether the name exists in scope at all.
    std::vector<std::string> scope = namesInScope(ctx);
    if (std::find(scope.begin(), scope.end(), head) != scope.end()) {
        throw QueryError(ErrorKind::Type,
                         "'" + head + "' resolves to a schema member, not a combinator; it "
                             "cannot be applied to arguments",
                         expr.span);
    }
    std::ostringstream msg;
    msg << "unknown combinator '" << head << "'";
    throw QueryError(ErrorKind::UnknownName, msg.str(), expr.span);
}

TypedPtr Typer::inferAggregate(const QueryExpr& expr, AggregateKind kind, const Ctx& ctx) {
    checkArity(expr, 1, 1);
    TypedPtr arg = inferExpr(*expr.children[0], ctx);
    requirePlural(arg, expr.name.c_str());
    const DataType& elem = arg->sig.output;

    DataType out;
    Cardinality card = Cardinality::One;
    switch (kind) {
    case AggregateKind::Count:
        out = DataType::integer();
        break;
    case AggregateKind::Exists:
        out = DataType::boolean();
        break;
    case AggregateKind::Any:
    case AggregateKind::All: {
        DataType b;
        if (!unifyTypes(elem, DataType::boolean(), &b) || !b.is(DataType::Kind::Bool)) {
            throw QueryError(ErrorKind::Type,
                             "'" + expr.name + "' needs Seq{Bool}; got elements of type " +
                                 elem.display(),
                             expr.span);
        }
        out = DataType::boolean();
        break;
    }
    case AggregateKind::Sum:
        if (!elem.isNumeric()) {
            throw QueryError(ErrorKind::Type,
                             "'sum' needs Int or Num elements; got " + elem.display(), expr.span);
        }
        out = elem;
        break;
    case AggregateKind::Max:
    case AggregateKind::Min:
        if (!elem.isOrdered()) {
            throw QueryError(ErrorKind::Type,
                             "'" + expr.name + "' needs an ordered element type; got " +
                                 elem.display(),
                             expr.span);
        }
        out = elem;
        card = Cardinality::Opt;
        break;
    case AggregateKind::Mean:
        if (!elem.isNumeric()) {
            throw QueryError(ErrorKind::Type,
                             "'mean' needs Int or Num elements; got " + elem.display(),
                             expr.span);
        }
        out = DataType::number();
        card = Cardinality::Opt;
        break;
    }
    Signature sig{ctx.input, out, card};
    sig.params = arg->sig.params;
    sig.usesFlow = arg->sig.usesFlow;
    auto node = makeNode(TypedKind::Aggregate, std::move(sig), expr.span);
    node->agg = kind;
    node->children = {std::move(arg)};
    return node;
}

TypedPtr Typer::inferFilter(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 2, 2);
    TypedPtr base = inferExpr(*expr.children[0], ctx);
    requirePlural(base, "filter");
    TypedPtr pred = inferExpr(*expr.children[1], elemCtx(base, ctx));
    if (pred->sig.card == Cardinality::Seq) {
        throw QueryError(ErrorKind::Cardinality,
                         "filter predicate must be singular or optional Bool", pred->span);
    }
    DataType b;
    if (!unifyTypes(pred->sig.output, DataType::boolean(), &b) || !b.is(DataType::Kind::Bool)) {
        throw QueryError(ErrorKind::Type,
                         "filter predicate must be Bool or Opt{Bool}; got " +
                             displayWrapped(pred->sig.output, pred->sig.card),
                         pred->span);
    }
    Signature sig = base->sig;
    sig.input = ctx.input;
    sig.params = mergeParams(base->sig.params, pred->sig.params);
    sig.usesFlow = base->sig.usesFlow || pred->sig.usesFlow;
    auto node = makeNode(TypedKind::Filter, std::move(sig), expr.span);
    node->exportedDefines = base->exportedDefines;
    node->children = {std::move(base), std::move(pred)};
    return node;
}

TypedPtr Typer::inferSort(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 1, SIZE_MAX);
    TypedPtr base = inferExpr(*expr.children[0], ctx);
    requirePlural(base, "sort");
    std::vector<TypedPtr> children{base};
    std::vector<SortDirection> dirs;
    Ctx keyCtx = elemCtx(base, ctx);
    for (std::size_t i = 1; i < expr.children.size(); ++i) {
        SortDirection dir;
        const QueryExpr* keyExpr = peelDirection(*expr.children[i], &dir);
        TypedPtr key = inferExpr(*keyExpr, keyCtx);
        if (key->sig.card == Cardinality::Seq) {
            throw QueryError(ErrorKind::Cardinality,
                             "sort key must be singular or optional", key->span);
        }
        if (!key->sig.output.isOrdered()) {
            throw QueryError(ErrorKind::Type,
                             "sort key must have an ordered type; got " +
                                 key->sig.output.display(),
                             key->span);
        }
        dirs.push_back(dir);
        children.push_back(std::move(key));
    }
    if (children.size() == 1 && !base->sig.output.isOrdered()) {
        throw QueryError(ErrorKind::Type,
                         "keyless sort needs an ordered element type; " +
                             base->sig.output.display() + " needs explicit keys",
                         expr.span);
    }
    Signature sig = base->sig;
    sig.input = ctx.input;
    sig.params = paramsOf(children);
    sig.usesFlow = anyFlow(children);
    auto node = makeNode(TypedKind::Sort, std::move(sig), expr.span);
    node->dirs = std::move(dirs);
    node->exportedDefines = base->exportedDefines;
    node->children = std::move(children);
    return node;
}

TypedPtr Typer::inferTake(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 2, 2);
    TypedPtr base = inferExpr(*expr.children[0], ctx);
    requirePlural(base, "take");
    TypedPtr count = inferExpr(*expr.children[1], ctx); // same input as the base
    if (count->sig.card != Cardinality::One) {
        throw QueryError(ErrorKind::Cardinality,
                         "take count must have cardinality One; got " +
                             std::string(cardinalityName(count->sig.card)),
                         count->span);
    }
    DataType t;
    if (!unifyTypes(count->sig.output, DataType::integer(), &t) || !t.is(DataType::Kind::Int)) {
        throw QueryError(ErrorKind::Type,
                         "take count must be Int; got " + count->sig.output.display(),
                         count->span);
    }
    Signature sig = base->sig;
    sig.input = ctx.input;
    sig.params = mergeParams(base->sig.params, count->sig.params);
    sig.usesFlow = base->sig.usesFlow || count->sig.usesFlow;
    auto node = makeNode(TypedKind::Take, std::move(sig), expr.span);
    node->exportedDefines = base->exportedDefines;
    node->children = {std::move(base), std::move(count)};
    return node;
}

TypedPtr Typer::inferUnique(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 1, 1);
    TypedPtr base = inferExpr(*expr.children[0], ctx);
    requirePlural(base, "unique");
    if (!base->sig.output.isOrdered()) {
        throw QueryError(ErrorKind::Type,
                         "unique needs an orderable element type; got " +
                             base->sig.output.display(),
                         expr.span);
    }
    Signature sig = base->sig;
    sig.input = ctx.input;
    auto node = makeNode(TypedKind::Unique, std::move(sig), expr.span);
    node->exportedDefines = base->exportedDefines;
    node->children = {std::move(base)};
    return node;
}

TypedPtr Typer::inferSelect(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 2, SIZE_MAX);
    TypedPtr base = inferExpr(*expr.children[0], ctx);
    Ctx fieldCtx = elemCtx(base, ctx);
    std::vector<TypedPtr> children{base};
    std::vector<std::string> tags;
    auto record = std::make_shared<RecordType>();
    for (std::size_t i = 1; i < expr.children.size(); ++i) {
        const QueryExpr& fieldExpr = *expr.children[i];
        std::string tag;
        const QueryExpr* body = &fieldExpr;
        if (fieldExpr.kind == QueryExpr::Kind::Tagged) {
            tag = fieldExpr.name;
            body = fieldExpr.children[0].get();
        } else {
            tag = defaultFieldName(fieldExpr);
            if (tag.empty()) {
                throw QueryError(ErrorKind::Tag,
                                 "select field needs a tag: write tag => expression",
                                 fieldExpr.span);
            }
        }
        if (std::find(tags.begin(), tags.end(), tag) != tags.end()) {
            throw QueryError(ErrorKind::Tag, "duplicate field tag '" + tag + "'", fieldExpr.span);
        }
        TypedPtr field = inferExpr(*body, fieldCtx);
        if (field->sig.output.isUnknown()) {
            throw QueryError(ErrorKind::Type,
                             "field '" + tag + "' has an unconstrained null type", body->span);
        }
        record->fields.push_back({tag, field->sig.output, field->sig.card});
        tags.push_back(tag);
        children.push_back(std::move(field));
    }
    Signature sig{ctx.input, DataType::record(record), base->sig.card};
    sig.params = paramsOf(children);
    sig.usesFlow = anyFlow(children);
    auto node = makeNode(TypedKind::Select, std::move(sig), expr.span);
    node->tags = std::move(tags);
    node->children = std::move(children);
    return node;
}

TypedPtr Typer::inferDefine(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 2, SIZE_MAX);
    TypedPtr base = inferExpr(*expr.children[0], ctx);
    Ctx bindCtx = elemCtx(base, ctx);
    std::vector<TypedPtr> children{base};
    std::vector<std::string> tags;
    std::vector<DefineBinding> exported = base->exportedDefines;
    for (std::size_t i = 1; i < expr.children.size(); ++i) {
        const QueryExpr& bindingExpr = *expr.children[i];
        if (bindingExpr.kind != QueryExpr::Kind::Tagged) {
            throw QueryError(ErrorKind::Tag, "define needs tagged bindings: tag => expression",
                             bindingExpr.span);
        }
        TypedPtr bound = inferExpr(*bindingExpr.children[0], bindCtx);
        if (bound->sig.output.isUnknown()) {
            throw QueryError(ErrorKind::Type,
                             "alias '" + bindingExpr.name + "' has an unconstrained null type",
                             bindingExpr.span);
        }
        exported.push_back({bindingExpr.name, bound});
        bindCtx.defines.push_back({bindingExpr.name, bound});
        tags.push_back(bindingExpr.name);
        children.push_back(std::move(bound));
    }
    // Runtime no-op: the node evaluates to its base. Bindings run at their
    // use sites, so their params/flow surface there, not here.
    Signature sig = base->sig;
    sig.input = ctx.input;
    auto node = makeNode(TypedKind::Define, std::move(sig), expr.span);
    node->tags = std::move(tags);
    node->exportedDefines = std::move(exported);
    node->children = std::move(children);
    return node;
}

TypedPtr Typer::inferConnect(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 1, 1);
    TypedPtr arg = inferExpr(*expr.children[0], ctx);
    if (arg->sig.card != Cardinality::Opt) {
        throw QueryError(ErrorKind::Cardinality,
                         "connect needs an optional query; got cardinality " +
                             std::string(cardinalityName(arg->sig.card)),
                         arg->span);
    }
    if (!(arg->sig.output == ctx.input)) {
        throw QueryError(ErrorKind::Type,
                         "connect needs a self-referential query: input " + ctx.input.display() +
                             " does not match output " + arg->sig.output.display(),
                         arg->span);
    }
    Signature sig{ctx.input, ctx.input, Cardinality::Seq};
    sig.params = arg->sig.params;
    sig.usesFlow = arg->sig.usesFlow;
    auto node = makeNode(TypedKind::Connect, std::move(sig), expr.span);
    node->children = {std::move(arg)};
    return node;
}

TypedPtr Typer::inferGroupLike(const QueryExpr& expr, bool rollup, const Ctx& ctx) {
    const char* what = rollup ? "rollup" : "group";
    checkArity(expr, 2, SIZE_MAX);
    // A tagged base names the member field explicitly; otherwise the name is
    // derived from the trailing name of the base query.
    const QueryExpr* baseExpr = expr.children[0].get();
    std::string memberTag = defaultFieldName(*baseExpr);
    if (baseExpr->kind == QueryExpr::Kind::Tagged) baseExpr = baseExpr->children[0].get();
    if (memberTag.empty()) {
        throw QueryError(ErrorKind::Tag,
                         std::string(what) + " cannot derive a member field name; tag the base "
                                             "query (tag => expression)",
                         expr.children[0]->span);
    }
    TypedPtr base = inferExpr(*baseExpr, ctx);
    requirePlural(base, what);
    const DataType elem = base->sig.output;

    Ctx keyCtx = elemCtx(base, ctx);
    std::vector<TypedPtr> children{base};
    std::vector<std::string> tags;
    std::vector<SortDirection> dirs;
    auto record = std::make_shared<RecordType>();
    for (std::size_t i = 1; i < expr.children.size(); ++i) {
        SortDirection dir;
        const QueryExpr* keyExpr = peelDirection(*expr.children[i], &dir);
        std::string tag;
        const QueryExpr* body = keyExpr;
        if (keyExpr->kind == QueryExpr::Kind::Tagged) {
            tag = keyExpr->name;
            body = keyExpr->children[0].get();
        } else {
            tag = trailingName(*keyExpr);
            if (tag.empty()) {
                throw QueryError(ErrorKind::Tag,
                                 std::string(what) +
                                     " key is computed; bind an explicit tag (tag => expression)",
                                 keyExpr->span);
            }
        }
        if (std::find(tags.begin(), tags.end(), tag) != tags.end() || tag == memberTag) {
            throw QueryError(ErrorKind::Tag, "duplicate key tag '" + tag + "'", keyExpr->span);
        }
        TypedPtr key = inferExpr(*body, keyCtx);
        if (key->sig.card != Cardinality::One) {
            throw QueryError(ErrorKind::Cardinality,
                             std::string(what) + " key must be singular; got cardinality " +
                                 cardinalityName(key->sig.card),
                             key->span);
        }
        if (!key->sig.output.isOrdered()) {
            throw QueryError(ErrorKind::Type,
                             std::string(what) + " key must have an orderable type; got " +
                                 key->sig.output.display(),
                             key->span);
        }
        record->fields.push_back(
            {tag, key->sig.output, rollup ? Cardinality::Opt : Cardinality::One});
        tags.push_back(tag);
        dirs.push_back(dir);
        children.push_back(std::move(key));
    }
    record->quotient_base = elem.display();
    record->quotient_keys = tags;
    record->subtotal_keys = rollup;
    record->member_index = static_cast<int>(record->fields.size());
    record->fields.push_back({memberTag, elem, Cardinality::Seq});

    Signature sig{ctx.input, DataType::record(record), Cardinality::Seq};
    sig.params = paramsOf(children);
    sig.usesFlow = anyFlow(children);
    auto node = makeNode(rollup ? TypedKind::Rollup : TypedKind::Group, std::move(sig), expr.span);
    node->tags = std::move(tags);
    node->dirs = std::move(dirs);
    node->text = memberTag;
    node->children = std::move(children);
    return node;
}

TypedPtr Typer::inferGiven(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 2, SIZE_MAX);
    std::vector<TypedPtr> bindings;
    std::vector<std::string> tags;
    for (std::size_t i = 1; i < expr.children.size(); ++i) {
        const QueryExpr& bindingExpr = *expr.children[i];
        if (bindingExpr.kind != QueryExpr::Kind::Tagged) {
            throw QueryError(ErrorKind::Tag, "given needs tagged bindings: tag => expression",
                             bindingExpr.span);
        }
        TypedPtr bound = inferExpr(*bindingExpr.children[0], ctx);
        if (bound->sig.output.isUnknown()) {
            throw QueryError(ErrorKind::Type,
                             "parameter '" + bindingExpr.name +
                                 "' has an unconstrained null type",
                             bindingExpr.span);
        }
        tags.push_back(bindingExpr.name);
        bindings.push_back(std::move(bound));
    }

    Ctx bodyCtx = ctx;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        bodyCtx.params[tags[i]] =
            ParamInfo{tags[i], bindings[i]->sig.output, bindings[i]->sig.card};
    }
    TypedPtr body = inferExpr(*expr.children[0], bodyCtx);

    // Discharge the bound parameters; anything the bindings themselves need
    // stays free.
    std::vector<ParamInfo> params;
    for (const ParamInfo& p : body->sig.params) {
        if (std::find(tags.begin(), tags.end(), p.name) == tags.end()) params.push_back(p);
    }
    for (std::size_t i = 0; i < tags.size(); ++i) {
        bool used = false;
        for (const ParamInfo& p : body->sig.params) {
            if (p.name == tags[i]) {
                used = true;
                break;
            }
        }
        if (!used) {
            warnings_.push_back({ErrorKind::Tag,
                                 "given binds '" + tags[i] + "' but the query never uses it",
                                 expr.children[i + 1]->span});
        }
        params = mergeParams(params, bindings[i]->sig.params);
    }

    Signature sig{ctx.input, body->sig.output, body->sig.card};
    sig.params = std::move(params);
    sig.usesFlow = body->sig.usesFlow || anyFlow(bindings);
    auto node = makeNode(TypedKind::Given, std::move(sig), expr.span);
    node->tags = std::move(tags);
    node->exportedDefines = body->exportedDefines;
    node->children.push_back(std::move(body));
    for (TypedPtr& b : bindings) node->children.push_back(std::move(b));
    return node;
}

TypedPtr Typer::inferFrame(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 1, 1);
    TypedPtr body = inferExpr(*expr.children[0], ctx);
    Signature sig = body->sig;
    sig.input = ctx.input;
    sig.usesFlow = false; // frame discharges the flow dependence
    auto node = makeNode(TypedKind::Frame, std::move(sig), expr.span);
    node->exportedDefines = body->exportedDefines;
    node->children = {std::move(body)};
    return node;
}

TypedPtr Typer::inferAroundBy(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 1, 1);
    TypedPtr key = inferExpr(*expr.children[0], ctx);
    if (key->sig.card == Cardinality::Seq) {
        throw QueryError(ErrorKind::Cardinality, "around key must be singular or optional",
                         key->span);
    }
    if (!key->sig.output.isScalar() && !key->sig.output.isEntity()) {
        throw QueryError(ErrorKind::Type,
                         "around key must be a scalar or entity; got " +
                             key->sig.output.display(),
                         key->span);
    }
    Signature sig{ctx.input, ctx.input, Cardinality::Seq};
    sig.params = key->sig.params;
    sig.usesFlow = true;
    auto node = makeNode(TypedKind::AroundBy, std::move(sig), expr.span);
    node->children = {std::move(key)};
    return node;
}

TypedPtr Typer::inferLength(const QueryExpr& expr, const Ctx& ctx) {
    checkArity(expr, 1, 1);
    TypedPtr arg = inferExpr(*expr.children[0], ctx);
    if (arg->sig.card == Cardinality::Seq) {
        throw QueryError(ErrorKind::Cardinality,
                         "length needs a singular or optional Text argument", arg->span);
    }
    DataType t;
    if (!unifyTypes(arg->sig.output, DataType::text(), &t) || !t.is(DataType::Kind::Text)) {
        throw QueryError(ErrorKind::Type,
                         "length needs Text; got " + arg->sig.output.display(), expr.span);
    }
    Signature sig{ctx.input, DataType::integer(), arg->sig.card};
    sig.params = arg->sig.params;
    sig.usesFlow = arg->sig.usesFlow;
    auto node = makeNode(TypedKind::TextLength, std::move(sig), expr.span);
    node->children = {std::move(arg)};
    return node;
}

} // namespace rabbit
