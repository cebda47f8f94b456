#include "mquery/expr.hpp"

#include <algorithm>
#include <stdexcept>

namespace mquery {

bool operator==(const PathRef& a, const PathRef& b) {
    if (a.head != b.head || a.rest != b.rest) return false;
    if (a.head == PathRef::Head::Var) return a.var == b.var;
    if (a.head == PathRef::Head::Const) return identical(a.constant, b.constant);
    return true;
}

namespace build {

namespace {
std::shared_ptr<Term> node(Term::Kind k) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    return t;
}
std::shared_ptr<BoolExpr> bnode(BoolExpr::Kind k) {
    auto b = std::make_shared<BoolExpr>();
    b->kind = k;
    return b;
}
}  // namespace

TermPtr lit(DValue v) {
    auto t = node(Term::Kind::Literal);
    t->literal = std::move(v);
    return t;
}
TermPtr path(PathRef p) {
    auto t = node(Term::Kind::Path);
    t->path = std::move(p);
    return t;
}
TermPtr path(std::string_view dotted) { return path(PathRef::root(Path::of(dotted))); }
TermPtr var(std::string x, std::string_view rest) { return path(PathRef::variable(std::move(x), Path::of(rest))); }
TermPtr array(std::vector<TermPtr> items) {
    auto t = node(Term::Kind::Array);
    t->items = std::move(items);
    return t;
}
TermPtr object(std::vector<std::pair<std::string, TermPtr>> fields) {
    auto t = node(Term::Kind::Object);
    t->fields = std::move(fields);
    return t;
}
TermPtr call(std::string fn, TermPtr arg) {
    auto t = node(Term::Kind::Call);
    t->name = std::move(fn);
    t->arg = std::move(arg);
    return t;
}
TermPtr cond(BoolPtr test, TermPtr then, TermPtr otherwise) {
    auto t = node(Term::Kind::Cond);
    t->test = std::move(test);
    t->arg = std::move(then);
    t->alt = std::move(otherwise);
    return t;
}
TermPtr map(PathRef input, std::string x, TermPtr body) {
    auto t = node(Term::Kind::Map);
    t->path = std::move(input);
    t->name = std::move(x);
    t->arg = std::move(body);
    return t;
}
TermPtr filter(PathRef input, std::string x, BoolPtr pred) {
    auto t = node(Term::Kind::Filter);
    t->path = std::move(input);
    t->name = std::move(x);
    t->test = std::move(pred);
    return t;
}

BoolPtr exists(PathRef p) {
    auto b = bnode(BoolExpr::Kind::Exists);
    b->path = std::move(p);
    return b;
}
namespace {
BoolPtr binary(BoolExpr::Kind k, TermPtr x, TermPtr y) {
    auto b = bnode(k);
    b->lhs = std::move(x);
    b->rhs = std::move(y);
    return b;
}
}  // namespace
BoolPtr eq(TermPtr a, TermPtr b) { return binary(BoolExpr::Kind::Eq, std::move(a), std::move(b)); }
BoolPtr lte(TermPtr a, TermPtr b) { return binary(BoolExpr::Kind::Lte, std::move(a), std::move(b)); }
BoolPtr in(TermPtr a, TermPtr b) { return binary(BoolExpr::Kind::In, std::move(a), std::move(b)); }
BoolPtr not_(BoolPtr a) {
    auto b = bnode(BoolExpr::Kind::Not);
    b->a = std::move(a);
    return b;
}
BoolPtr and_(BoolPtr a, BoolPtr b) {
    auto n = bnode(BoolExpr::Kind::And);
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}
BoolPtr ne(TermPtr a, TermPtr b) { return not_(eq(std::move(a), std::move(b))); }
BoolPtr lt(TermPtr a, TermPtr b) { return not_(lte(std::move(b), std::move(a))); }
BoolPtr gt(TermPtr a, TermPtr b) { return not_(lte(std::move(a), std::move(b))); }
BoolPtr gte(TermPtr a, TermPtr b) { return lte(std::move(b), std::move(a)); }
BoolPtr or_(BoolPtr a, BoolPtr b) { return not_(and_(not_(std::move(a)), not_(std::move(b)))); }

BoolPtr conj(const std::vector<BoolPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("conj: no parts");
    BoolPtr acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = and_(acc, parts[i]);
    return acc;
}

BoolPtr disj(const std::vector<BoolPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("disj: no parts");
    if (parts.size() == 1) return parts[0];
    std::vector<BoolPtr> negs;
    for (const auto& p : parts) negs.push_back(not_(p));
    return not_(conj(negs));
}

}  // namespace build

// ---- structural equality ----

bool equal(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Term::Kind::Literal: return identical(a.literal, b.literal);
    case Term::Kind::Path: return a.path == b.path;
    case Term::Kind::Array:
        if (a.items.size() != b.items.size()) return false;
        for (std::size_t i = 0; i < a.items.size(); ++i)
            if (!equal(a.items[i], b.items[i])) return false;
        return true;
    case Term::Kind::Object:
        if (a.fields.size() != b.fields.size()) return false;
        for (std::size_t i = 0; i < a.fields.size(); ++i)
            if (a.fields[i].first != b.fields[i].first || !equal(a.fields[i].second, b.fields[i].second))
                return false;
        return true;
    case Term::Kind::Call: return a.name == b.name && equal(a.arg, b.arg);
    case Term::Kind::Cond: return equal(a.test, b.test) && equal(a.arg, b.arg) && equal(a.alt, b.alt);
    case Term::Kind::Map: return a.path == b.path && a.name == b.name && equal(a.arg, b.arg);
    case Term::Kind::Filter: return a.path == b.path && a.name == b.name && equal(a.test, b.test);
    }
    return false;
}

bool equal(const BoolExpr& a, const BoolExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case BoolExpr::Kind::Exists: return a.path == b.path;
    case BoolExpr::Kind::Eq:
    case BoolExpr::Kind::Lte:
    case BoolExpr::Kind::In: return equal(a.lhs, b.lhs) && equal(a.rhs, b.rhs);
    case BoolExpr::Kind::Not: return equal(a.a, b.a);
    case BoolExpr::Kind::And: return equal(a.a, b.a) && equal(a.b, b.b);
    }
    return false;
}

std::vector<BoolPtr> conjuncts(const BoolPtr& b) {
    std::vector<BoolPtr> out;
    std::vector<BoolPtr> stack{b};
    while (!stack.empty()) {
        BoolPtr cur = stack.back();
        stack.pop_back();
        if (cur->kind == BoolExpr::Kind::And) {
            stack.push_back(cur->b);
            stack.push_back(cur->a);
        } else {
            out.push_back(cur);
        }
    }
    return out;
}

// ---- evaluation ----

const DValue* EvalContext::lookup(const std::string& x) const {
    for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
        if (it->first == x) return &it->second;
    return nullptr;
}

DValue FunctionRegistry::call(const std::string& name, const DValue& arg, Mode mode) const {
    auto it = fns_.find(name);
    if (it == fns_.end()) return DValue();
    return it->second(arg, mode);
}

std::vector<std::string> FunctionRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : fns_) out.push_back(k);
    return out;
}

DValue eval_ref(const EvalContext& ctx, const PathRef& p) {
    switch (p.head) {
    case PathRef::Head::Root: return eval_path(ctx.root, p.rest);
    case PathRef::Head::Var: {
        const DValue* v = ctx.lookup(p.var);
        return v ? eval_path(*v, p.rest) : DValue();
    }
    case PathRef::Head::Const: return eval_path(p.constant, p.rest);
    }
    return DValue();
}

namespace {

DValue eval_t(EvalContext& ctx, const Term& t, const FunctionRegistry& reg, Mode mode);

bool sat(EvalContext& ctx, const BoolExpr& b, const FunctionRegistry& reg, Mode mode) {
    switch (b.kind) {
    case BoolExpr::Kind::Exists: return !eval_ref(ctx, b.path).is_null();
    case BoolExpr::Kind::Eq:
        return natural_compare(eval_t(ctx, *b.lhs, reg, mode), eval_t(ctx, *b.rhs, reg, mode), mode) == Ord::EQ;
    case BoolExpr::Kind::Lte:
        return natural_compare(eval_t(ctx, *b.lhs, reg, mode), eval_t(ctx, *b.rhs, reg, mode), mode) != Ord::GT;
    case BoolExpr::Kind::In: {
        DValue needle = eval_t(ctx, *b.lhs, reg, mode);
        DValue hay = eval_t(ctx, *b.rhs, reg, mode);
        if (!hay.is_array()) return false;
        for (const auto& e : hay.as_array())
            if (natural_compare(needle, e, mode) == Ord::EQ) return true;
        return false;
    }
    case BoolExpr::Kind::Not: return !sat(ctx, *b.a, reg, mode);
    case BoolExpr::Kind::And: return sat(ctx, *b.a, reg, mode) && sat(ctx, *b.b, reg, mode);
    }
    return false;
}

DValue eval_t(EvalContext& ctx, const Term& t, const FunctionRegistry& reg, Mode mode) {
    switch (t.kind) {
    case Term::Kind::Literal: return t.literal;
    case Term::Kind::Path: return eval_ref(ctx, t.path);
    case Term::Kind::Array: {
        Array out;
        out.reserve(t.items.size());
        for (const auto& i : t.items) out.push_back(eval_t(ctx, *i, reg, mode));
        return DValue(std::move(out));
    }
    case Term::Kind::Object: {
        Object out;
        for (const auto& [k, f] : t.fields) {
            DValue v = eval_t(ctx, *f, reg, mode);
            if (!v.is_null()) out.emplace_back(k, std::move(v));
        }
        return DValue(std::move(out));
    }
    case Term::Kind::Call: return reg.call(t.name, eval_t(ctx, *t.arg, reg, mode), mode);
    case Term::Kind::Cond:
        return sat(ctx, *t.test, reg, mode) ? eval_t(ctx, *t.arg, reg, mode) : eval_t(ctx, *t.alt, reg, mode);
    case Term::Kind::Map:
    case Term::Kind::Filter: {
        DValue input = eval_ref(ctx, t.path);
        if (!input.is_array()) return DValue();
        Array out;
        for (const auto& e : input.as_array()) {
            ctx.bindings.emplace_back(t.name, e);
            if (t.kind == Term::Kind::Map)
                out.push_back(eval_t(ctx, *t.arg, reg, mode));
            else if (sat(ctx, *t.test, reg, mode))
                out.push_back(e);
            ctx.bindings.pop_back();
        }
        return DValue(std::move(out));
    }
    }
    return DValue();
}

}  // namespace

DValue eval_term(const EvalContext& ctx, const Term& t, const FunctionRegistry& reg, Mode mode) {
    EvalContext local = ctx;
    return eval_t(local, t, reg, mode);
}

bool satisfies(const EvalContext& ctx, const BoolExpr& b, const FunctionRegistry& reg, Mode mode) {
    EvalContext local = ctx;
    return sat(local, b, reg, mode);
}

// ---- path sets ----

namespace {

struct Entry {
    std::optional<std::string> var;  // set while still relative to a map/filter variable
    Path path;
};

void collect(const Term& t, std::vector<Entry>& out);

void collect_ref(const PathRef& p, std::vector<Entry>& out) {
    if (p.head == PathRef::Head::Root) out.push_back({std::nullopt, p.rest});
    else if (p.head == PathRef::Head::Var) out.push_back({p.var, p.rest});
}

void collect(const BoolExpr& b, std::vector<Entry>& out) {
    switch (b.kind) {
    case BoolExpr::Kind::Exists: collect_ref(b.path, out); break;
    case BoolExpr::Kind::Eq:
    case BoolExpr::Kind::Lte:
    case BoolExpr::Kind::In:
        collect(*b.lhs, out);
        collect(*b.rhs, out);
        break;
    case BoolExpr::Kind::Not: collect(*b.a, out); break;
    case BoolExpr::Kind::And:
        collect(*b.a, out);
        collect(*b.b, out);
        break;
    }
}

void resolve_scope(const PathRef& input, const std::string& x, std::vector<Entry>& body, std::vector<Entry>& out) {
    for (auto& e : body) {
        if (e.var && *e.var == x) {
            if (input.head == PathRef::Head::Const) continue;
            Entry r;
            if (input.head == PathRef::Head::Var) r.var = input.var;
            r.path = input.rest.concat(e.path);
            out.push_back(std::move(r));
        } else {
            out.push_back(std::move(e));
        }
    }
}

void collect(const Term& t, std::vector<Entry>& out) {
    switch (t.kind) {
    case Term::Kind::Literal: break;
    case Term::Kind::Path: collect_ref(t.path, out); break;
    case Term::Kind::Array:
        for (const auto& i : t.items) collect(*i, out);
        break;
    case Term::Kind::Object:
        for (const auto& f : t.fields) collect(*f.second, out);
        break;
    case Term::Kind::Call: collect(*t.arg, out); break;
    case Term::Kind::Cond:
        collect(*t.test, out);
        collect(*t.arg, out);
        collect(*t.alt, out);
        break;
    case Term::Kind::Map:
    case Term::Kind::Filter: {
        std::vector<Entry> body;
        if (t.kind == Term::Kind::Map) collect(*t.arg, body);
        else collect(*t.test, body);
        resolve_scope(t.path, t.name, body, out);
        break;
    }
    }
}

PathSet absolute(const std::vector<Entry>& es) {
    PathSet s;
    for (const auto& e : es)
        if (!e.var) s.insert(e.path);
    return s;
}

// Conservative reads. `scope` maps a map/filter variable to the (cut) input path
// it ranges over, or nullopt when the input is not a document path.
using Scope = std::vector<std::pair<std::string, std::optional<Path>>>;

std::optional<Path> ref_read(const PathRef& p, const Scope& scope) {
    if (p.head == PathRef::Head::Root) return p.rest.truncate_at_index();
    if (p.head == PathRef::Head::Var) {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == p.var) return it->second;
    }
    return std::nullopt;
}

void reads(const Term& t, Scope& scope, PathSet& out);

void reads(const BoolExpr& b, Scope& scope, PathSet& out) {
    switch (b.kind) {
    case BoolExpr::Kind::Exists:
        if (auto r = ref_read(b.path, scope)) out.insert(*r);
        break;
    case BoolExpr::Kind::Eq:
    case BoolExpr::Kind::Lte:
    case BoolExpr::Kind::In:
        reads(*b.lhs, scope, out);
        reads(*b.rhs, scope, out);
        break;
    case BoolExpr::Kind::Not: reads(*b.a, scope, out); break;
    case BoolExpr::Kind::And:
        reads(*b.a, scope, out);
        reads(*b.b, scope, out);
        break;
    }
}

void reads(const Term& t, Scope& scope, PathSet& out) {
    switch (t.kind) {
    case Term::Kind::Literal: break;
    case Term::Kind::Path:
        if (auto r = ref_read(t.path, scope)) out.insert(*r);
        break;
    case Term::Kind::Array:
        for (const auto& i : t.items) reads(*i, scope, out);
        break;
    case Term::Kind::Object:
        for (const auto& [k, f] : t.fields) {
            PathSet inner;
            reads(*f, scope, inner);
            for (const auto& p : inner) {
                out.insert(p);
                out.insert(Path({Segment(k)}).concat(p));
            }
        }
        break;
    case Term::Kind::Call: reads(*t.arg, scope, out); break;
    case Term::Kind::Cond:
        reads(*t.test, scope, out);
        reads(*t.arg, scope, out);
        reads(*t.alt, scope, out);
        break;
    case Term::Kind::Map:
    case Term::Kind::Filter: {
        auto input = ref_read(t.path, scope);
        if (input) out.insert(*input);
        scope.emplace_back(t.name, input);
        if (t.kind == Term::Kind::Map) reads(*t.arg, scope, out);
        else reads(*t.test, scope, out);
        scope.pop_back();
        break;
    }
    }
}

void free_t(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out);

void free_ref(const PathRef& p, const std::vector<std::string>& bound, std::set<std::string>& out) {
    if (p.head == PathRef::Head::Var && std::find(bound.begin(), bound.end(), p.var) == bound.end())
        out.insert(p.var);
}

void free_b(const BoolExpr& b, std::vector<std::string>& bound, std::set<std::string>& out) {
    switch (b.kind) {
    case BoolExpr::Kind::Exists: free_ref(b.path, bound, out); break;
    case BoolExpr::Kind::Eq:
    case BoolExpr::Kind::Lte:
    case BoolExpr::Kind::In:
        free_t(*b.lhs, bound, out);
        free_t(*b.rhs, bound, out);
        break;
    case BoolExpr::Kind::Not: free_b(*b.a, bound, out); break;
    case BoolExpr::Kind::And:
        free_b(*b.a, bound, out);
        free_b(*b.b, bound, out);
        break;
    }
}

void free_t(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out) {
    switch (t.kind) {
    case Term::Kind::Literal: break;
    case Term::Kind::Path: free_ref(t.path, bound, out); break;
    case Term::Kind::Array:
        for (const auto& i : t.items) free_t(*i, bound, out);
        break;
    case Term::Kind::Object:
        for (const auto& f : t.fields) free_t(*f.second, bound, out);
        break;
    case Term::Kind::Call: free_t(*t.arg, bound, out); break;
    case Term::Kind::Cond:
        free_b(*t.test, bound, out);
        free_t(*t.arg, bound, out);
        free_t(*t.alt, bound, out);
        break;
    case Term::Kind::Map:
    case Term::Kind::Filter:
        free_ref(t.path, bound, out);
        bound.push_back(t.name);
        if (t.kind == Term::Kind::Map) free_t(*t.arg, bound, out);
        else free_b(*t.test, bound, out);
        bound.pop_back();
        break;
    }
}

}  // namespace

PathSet paths_of_term(const Term& t) {
    std::vector<Entry> es;
    collect(t, es);
    return absolute(es);
}

PathSet paths_of_bool(const BoolExpr& b) {
    std::vector<Entry> es;
    collect(b, es);
    return absolute(es);
}

PathSet read_set(const Term& t) {
    Scope scope;
    PathSet out;
    reads(t, scope, out);
    return out;
}

PathSet read_set(const BoolExpr& b) {
    Scope scope;
    PathSet out;
    reads(b, scope, out);
    return out;
}

std::set<std::string> free_vars(const Term& t) {
    std::vector<std::string> bound;
    std::set<std::string> out;
    free_t(t, bound, out);
    return out;
}

std::set<std::string> free_vars(const BoolExpr& b) {
    std::vector<std::string> bound;
    std::set<std::string> out;
    free_b(b, bound, out);
    return out;
}

// ---- rewriting helpers ----

namespace {

struct Subst {
    const Substitution& s;
    std::vector<std::string> shadow;

    bool active(const std::string& x) const {
        return s.count(x) && std::find(shadow.begin(), shadow.end(), x) == shadow.end();
    }

    PathRef ref(const PathRef& p) const {
        if (p.head == PathRef::Head::Var && active(p.var))
            return PathRef::of_constant(eval_path(s.at(p.var), p.rest));
        return p;
    }

    TermPtr term(const TermPtr& t) {
        switch (t->kind) {
        case Term::Kind::Literal: return t;
        case Term::Kind::Path:
            if (t->path.head == PathRef::Head::Var && active(t->path.var))
                return build::lit(eval_path(s.at(t->path.var), t->path.rest));
            return t;
        case Term::Kind::Array: {
            std::vector<TermPtr> items;
            for (const auto& i : t->items) items.push_back(term(i));
            return build::array(std::move(items));
        }
        case Term::Kind::Object: {
            std::vector<std::pair<std::string, TermPtr>> fs;
            for (const auto& [k, f] : t->fields) fs.emplace_back(k, term(f));
            return build::object(std::move(fs));
        }
        case Term::Kind::Call: return build::call(t->name, term(t->arg));
        case Term::Kind::Cond: return build::cond(boolean(t->test), term(t->arg), term(t->alt));
        case Term::Kind::Map:
        case Term::Kind::Filter: {
            PathRef input = ref(t->path);
            shadow.push_back(t->name);
            TermPtr r = t->kind == Term::Kind::Map ? build::map(input, t->name, term(t->arg))
                                                   : build::filter(input, t->name, boolean(t->test));
            shadow.pop_back();
            return r;
        }
        }
        return t;
    }

    BoolPtr boolean(const BoolPtr& b) {
        switch (b->kind) {
        case BoolExpr::Kind::Exists: return build::exists(ref(b->path));
        case BoolExpr::Kind::Eq: return build::eq(term(b->lhs), term(b->rhs));
        case BoolExpr::Kind::Lte: return build::lte(term(b->lhs), term(b->rhs));
        case BoolExpr::Kind::In: return build::in(term(b->lhs), term(b->rhs));
        case BoolExpr::Kind::Not: return build::not_(boolean(b->a));
        case BoolExpr::Kind::And: return build::and_(boolean(b->a), boolean(b->b));
        }
        return b;
    }
};

struct Rename {
    const std::string& from;
    const std::string& to;

    PathRef ref(const PathRef& p) const {
        if (p.head != PathRef::Head::Root || p.rest.empty()) return p;
        auto* k = std::get_if<std::string>(&p.rest.segs[0]);
        if (!k || *k != from) return p;
        PathRef r = p;
        r.rest.segs[0] = to;
        return r;
    }

    TermPtr term(const TermPtr& t) const {
        switch (t->kind) {
        case Term::Kind::Literal: return t;
        case Term::Kind::Path: return build::path(ref(t->path));
        case Term::Kind::Array: {
            std::vector<TermPtr> items;
            for (const auto& i : t->items) items.push_back(term(i));
            return build::array(std::move(items));
        }
        case Term::Kind::Object: {
            std::vector<std::pair<std::string, TermPtr>> fs;
            for (const auto& [k, f] : t->fields) fs.emplace_back(k, term(f));
            return build::object(std::move(fs));
        }
        case Term::Kind::Call: return build::call(t->name, term(t->arg));
        case Term::Kind::Cond: return build::cond(boolean(t->test), term(t->arg), term(t->alt));
        case Term::Kind::Map: return build::map(ref(t->path), t->name, term(t->arg));
        case Term::Kind::Filter: return build::filter(ref(t->path), t->name, boolean(t->test));
        }
        return t;
    }

    BoolPtr boolean(const BoolPtr& b) const {
        switch (b->kind) {
        case BoolExpr::Kind::Exists: return build::exists(ref(b->path));
        case BoolExpr::Kind::Eq: return build::eq(term(b->lhs), term(b->rhs));
        case BoolExpr::Kind::Lte: return build::lte(term(b->lhs), term(b->rhs));
        case BoolExpr::Kind::In: return build::in(term(b->lhs), term(b->rhs));
        case BoolExpr::Kind::Not: return build::not_(boolean(b->a));
        case BoolExpr::Kind::And: return build::and_(boolean(b->a), boolean(b->b));
        }
        return b;
    }
};

}  // namespace

TermPtr substitute(const TermPtr& t, const Substitution& s) {
    if (s.empty()) return t;
    Subst sub{s, {}};
    return sub.term(t);
}

BoolPtr substitute(const BoolPtr& b, const Substitution& s) {
    if (s.empty()) return b;
    Subst sub{s, {}};
    return sub.boolean(b);
}

TermPtr rename_head(const TermPtr& t, const std::string& from, const std::string& to) {
    return Rename{from, to}.term(t);
}

BoolPtr rename_head(const BoolPtr& b, const std::string& from, const std::string& to) {
    return Rename{from, to}.boolean(b);
}

}  // namespace mquery
