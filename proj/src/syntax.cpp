#include "mquery/syntax.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "mquery/json_io.hpp"

namespace mquery {

const char* issue_kind_name(ParseIssue::Kind k) { return k == ParseIssue::Kind::Syntax ? "syntax" : "validation"; }

std::string issues_to_json(const std::vector<ParseIssue>& issues) {
    Array out;
    for (const auto& i : issues)
        out.emplace_back(Object{{"location", DValue(i.location)},
                                {"message", DValue(i.message)},
                                {"kind", DValue(issue_kind_name(i.kind))}});
    return to_json(DValue(std::move(out)));
}

namespace {

std::string child(const std::string& at, std::string_view key) { return at + "/" + json_pointer_escape(key); }
std::string child(const std::string& at, std::size_t i) { return at + "/" + std::to_string(i); }

bool valid_var_name(const std::string& x) {
    return !x.empty() && x != "ROOT" && x.find('.') == std::string::npos && x[0] != '$';
}

const char* const kBoolOps[] = {"$eq", "$ne", "$lt", "$lte", "$gt", "$gte", "$in", "$and", "$or", "$not", "$exists"};

bool is_bool_op(const std::string& k) {
    return std::any_of(std::begin(kBoolOps), std::end(kBoolOps), [&](const char* op) { return k == op; });
}

class Parser {
public:
    Parser(std::vector<ParseIssue>& issues, const FunctionRegistry& reg) : issues_(issues), reg_(reg) {}

    void error(const std::string& at, std::string msg, ParseIssue::Kind kind = ParseIssue::Kind::Syntax) {
        issues_.push_back(ParseIssue{at, std::move(msg), kind});
    }

    // Checks that an operator argument object has exactly the listed keys (optional ones may be absent).
    bool shape(const DValue& v, const std::string& at, std::initializer_list<const char*> required,
               std::initializer_list<const char*> optional = {}) {
        if (!v.is_object()) {
            error(at, "expected an object");
            return false;
        }
        bool ok = true;
        for (const char* r : required)
            if (!v.find(r)) {
                error(at, std::string("missing field \"") + r + "\"");
                ok = false;
            }
        for (const auto& [k, _] : v.as_object()) {
            auto known = [&](std::initializer_list<const char*> l) {
                return std::any_of(l.begin(), l.end(), [&](const char* x) { return k == x; });
            };
            if (!known(required) && !known(optional)) {
                error(child(at, k), "unknown field \"" + k + "\"");
                ok = false;
            }
        }
        return ok;
    }

    bool path_text(const DValue& v, const std::string& at, Path& out) {
        if (!v.is_string() || !Path::parse(v.as_string(), out) || out.empty()) {
            error(at, "expected a non-empty dotted path");
            return false;
        }
        return true;
    }

    // "$p" as a document path.
    bool dollar_path(const DValue& v, const std::string& at, Path& out) {
        if (!v.is_string() || v.as_string().size() < 2 || v.as_string()[0] != '$' || v.as_string()[1] == '$' ||
            !Path::parse(std::string_view(v.as_string()).substr(1), out)) {
            error(at, "expected a path of the form \"$a.b\"");
            return false;
        }
        return true;
    }

    bool ref(const DValue& v, const std::string& at, PathRef& out, bool allow_const) {
        if (allow_const && v.is_object() && v.as_object().size() == 1 && v.as_object()[0].first == "$literal") {
            out = PathRef::of_constant(v.as_object()[0].second);
            return true;
        }
        if (!v.is_string() || v.as_string().size() < 2 || v.as_string()[0] != '$') {
            error(at, "expected a path reference \"$p\" or \"$$x.p\"");
            return false;
        }
        const std::string& s = v.as_string();
        if (s[1] != '$') {
            Path p;
            if (!Path::parse(std::string_view(s).substr(1), p)) {
                error(at, "malformed path \"" + s + "\"");
                return false;
            }
            out = PathRef::root(std::move(p));
            return true;
        }
        std::string_view body = std::string_view(s).substr(2);
        std::size_t dot = body.find('.');
        std::string head(body.substr(0, dot));
        Path rest;
        if (dot != std::string_view::npos && (!Path::parse(body.substr(dot + 1), rest) || rest.empty())) {
            error(at, "malformed path \"" + s + "\"");
            return false;
        }
        if (head == "ROOT") {
            out = PathRef::root(std::move(rest));
            return true;
        }
        if (!valid_var_name(head)) {
            error(at, "malformed variable reference \"" + s + "\"");
            return false;
        }
        out = PathRef::variable(std::move(head), std::move(rest));
        return true;
    }

    bool var_name(const DValue& v, const std::string& at, std::string& out) {
        if (!v.is_string() || !valid_var_name(v.as_string())) {
            error(at, "expected a variable name");
            return false;
        }
        out = v.as_string();
        return true;
    }

    TermPtr term(const DValue& v, const std::string& at) {
        switch (v.kind()) {
        case DValue::Kind::Null:
        case DValue::Kind::Bool:
        case DValue::Kind::Number: return build::lit(v);
        case DValue::Kind::String: {
            if (v.as_string().empty() || v.as_string()[0] != '$') return build::lit(v);
            PathRef r;
            if (!ref(v, at, r, false)) return nullptr;
            return build::path(std::move(r));
        }
        case DValue::Kind::Array: {
            std::vector<TermPtr> items;
            bool ok = true;
            const auto& a = v.as_array();
            for (std::size_t i = 0; i < a.size(); ++i) {
                TermPtr t = term(a[i], child(at, i));
                ok = ok && t;
                items.push_back(std::move(t));
            }
            return ok ? build::array(std::move(items)) : nullptr;
        }
        case DValue::Kind::Object: break;
        }
        const auto& o = v.as_object();
        if (o.size() != 1) {
            error(at, "expected an operator object with exactly one key (use $object for constructors)");
            return nullptr;
        }
        const auto& [op, arg] = o[0];
        std::string here = child(at, op);
        if (op == "$literal") return build::lit(arg);
        if (op == "$object") {
            if (!arg.is_object()) {
                error(here, "expected an object");
                return nullptr;
            }
            std::vector<std::pair<std::string, TermPtr>> fields;
            bool ok = true;
            for (const auto& [k, f] : arg.as_object()) {
                if (std::any_of(fields.begin(), fields.end(), [&](const auto& p) { return p.first == k; })) {
                    error(child(here, k), "duplicate key \"" + k + "\"");
                    ok = false;
                    continue;
                }
                TermPtr t = term(f, child(here, k));
                ok = ok && t;
                fields.emplace_back(k, std::move(t));
            }
            return ok ? build::object(std::move(fields)) : nullptr;
        }
        if (op == "$cond") {
            if (!shape(arg, here, {"if", "then", "else"})) return nullptr;
            BoolPtr c = boolean(*arg.find("if"), child(here, "if"));
            TermPtr t = term(*arg.find("then"), child(here, "then"));
            TermPtr e = term(*arg.find("else"), child(here, "else"));
            return c && t && e ? build::cond(c, t, e) : nullptr;
        }
        if (op == "$map" || op == "$filter") {
            const char* body = op == "$map" ? "in" : "cond";
            if (!shape(arg, here, {"input", "as", body})) return nullptr;
            PathRef input;
            std::string x;
            bool ok = ref(*arg.find("input"), child(here, "input"), input, true);
            ok = var_name(*arg.find("as"), child(here, "as"), x) && ok;
            if (op == "$map") {
                TermPtr b = term(*arg.find("in"), child(here, "in"));
                return ok && b ? build::map(input, x, b) : nullptr;
            }
            BoolPtr b = boolean(*arg.find("cond"), child(here, "cond"));
            return ok && b ? build::filter(input, x, b) : nullptr;
        }
        if (op == "$fn") {
            if (!shape(arg, here, {"name", "arg"})) return nullptr;
            const DValue& name = *arg.find("name");
            if (!name.is_string()) {
                error(child(here, "name"), "expected a function name");
                return nullptr;
            }
            if (!reg_.has(name.as_string())) {
                error(child(here, "name"), "unknown function \"" + name.as_string() + "\"", ParseIssue::Kind::Validation);
                return nullptr;
            }
            TermPtr a = term(*arg.find("arg"), child(here, "arg"));
            return a ? build::call(name.as_string(), a) : nullptr;
        }
        if (op.size() > 1 && op[0] == '$' && reg_.has(op.substr(1))) {
            TermPtr a = term(arg, here);
            return a ? build::call(op.substr(1), a) : nullptr;
        }
        if (is_bool_op(op))
            error(at, "Boolean expression \"" + op + "\" used where a term is expected");
        else
            error(at, "unknown operator \"" + op + "\" (use $object for constructors)");
        return nullptr;
    }

    BoolPtr boolean(const DValue& v, const std::string& at) {
        if (!v.is_object() || v.as_object().size() != 1) {
            error(at, "expected a Boolean operator object");
            return nullptr;
        }
        const auto& [op, arg] = v.as_object()[0];
        std::string here = child(at, op);
        if (op == "$eq" || op == "$ne" || op == "$lt" || op == "$lte" || op == "$gt" || op == "$gte" || op == "$in") {
            if (!arg.is_array() || arg.as_array().size() != 2) {
                error(here, "expected an array of two terms");
                return nullptr;
            }
            TermPtr a = term(arg.as_array()[0], child(here, 0));
            TermPtr b = term(arg.as_array()[1], child(here, 1));
            if (!a || !b) return nullptr;
            if (op == "$eq") return build::eq(a, b);
            if (op == "$ne") return build::ne(a, b);
            if (op == "$lt") return build::lt(a, b);
            if (op == "$lte") return build::lte(a, b);
            if (op == "$gt") return build::gt(a, b);
            if (op == "$gte") return build::gte(a, b);
            return build::in(a, b);
        }
        if (op == "$and" || op == "$or") {
            if (!arg.is_array() || arg.as_array().empty()) {
                error(here, "expected a non-empty array");
                return nullptr;
            }
            std::vector<BoolPtr> parts;
            bool ok = true;
            for (std::size_t i = 0; i < arg.as_array().size(); ++i) {
                BoolPtr p = boolean(arg.as_array()[i], child(here, i));
                ok = ok && p;
                parts.push_back(std::move(p));
            }
            if (!ok) return nullptr;
            return op == "$and" ? build::conj(parts) : build::disj(parts);
        }
        if (op == "$not") {
            BoolPtr a = boolean(arg, here);
            return a ? build::not_(a) : nullptr;
        }
        if (op == "$exists") {
            PathRef r;
            return ref(arg, here, r, true) ? build::exists(std::move(r)) : nullptr;
        }
        error(at, "unknown Boolean operator \"" + op + "\"");
        return nullptr;
    }

    std::optional<Query> query(const DValue& v, const std::string& at) {
        if (!shape(v, at, {"collection", "pipeline"})) return std::nullopt;
        const DValue& c = *v.find("collection");
        const DValue& p = *v.find("pipeline");
        bool ok = true;
        if (!c.is_string()) {
            error(child(at, "collection"), "expected a collection name");
            ok = false;
        }
        if (!p.is_array()) {
            error(child(at, "pipeline"), "expected an array of stages");
            return std::nullopt;
        }
        Query q;
        if (ok) q.source = c.as_string();
        for (std::size_t i = 0; i < p.as_array().size(); ++i) {
            auto s = stage(p.as_array()[i], child(child(at, "pipeline"), i));
            if (s)
                q.stages.push_back(std::move(*s));
            else
                ok = false;
        }
        if (!ok) return std::nullopt;
        return q;
    }

    std::optional<std::size_t> count_arg(const DValue& v, const std::string& at) {
        if (!v.is_number() || v.as_number() != std::trunc(v.as_number()) || std::fabs(v.as_number()) > 1e15) {
            error(at, "expected an integer");
            return std::nullopt;
        }
        if (v.as_number() < 1) {
            error(at, "must be a positive integer", ParseIssue::Kind::Validation);
            return std::nullopt;
        }
        return static_cast<std::size_t>(v.as_number());
    }

    std::optional<Stage> stage(const DValue& v, const std::string& at) {
        if (!v.is_object() || v.as_object().size() != 1) {
            error(at, "a stage is an object with exactly one operator key");
            return std::nullopt;
        }
        const auto& [op, arg] = v.as_object()[0];
        std::string here = child(at, op);
        if (op == "$match") {
            BoolPtr b = boolean(arg, here);
            if (!b) return std::nullopt;
            return stage::match(b);
        }
        if (op == "$unwind") {
            Path p;
            if (!dollar_path(arg, here, p)) return std::nullopt;
            return stage::unwind(p);
        }
        if (op == "$project") {
            if (!arg.is_object()) {
                error(here, "expected an object of path definitions");
                return std::nullopt;
            }
            std::vector<PathDef> defs;
            bool ok = true;
            for (const auto& [k, val] : arg.as_object()) {
                std::string at_k = child(here, k);
                Path target;
                if (!Path::parse(k, target) || target.empty()) {
                    error(at_k, "malformed target path \"" + k + "\"");
                    ok = false;
                    continue;
                }
                if (val.is_number() && val.as_number() == 1) {
                    defs.push_back(idle_def(target));
                    continue;
                }
                if (val.is_bool() || (val.is_number() && val.as_number() == 0)) {
                    error(at_k, "exclusions are not supported; use 1 or a term (wrap constants in $literal)");
                    ok = false;
                    continue;
                }
                TermPtr t = term(val, at_k);
                if (!t) {
                    ok = false;
                    continue;
                }
                defs.push_back(PathDef{target, t});
            }
            if (!ok) return std::nullopt;
            return stage::project(std::move(defs));
        }
        if (op == "$group") {
            if (!shape(arg, here, {"_id"}, {"collect"})) return std::nullopt;
            std::optional<std::string> key;
            const DValue& id = *arg.find("_id");
            if (id.is_string()) {
                std::string k = id.as_string();
                if (!k.empty() && k[0] == '$') k.erase(0, 1);
                key = k;
            } else if (!id.is_null()) {
                error(child(here, "_id"), "expected a key or null");
                return std::nullopt;
            }
            std::vector<std::string> collect;
            if (const DValue* c = arg.find("collect")) {
                if (!c->is_array()) {
                    error(child(here, "collect"), "expected an array of keys");
                    return std::nullopt;
                }
                for (std::size_t i = 0; i < c->as_array().size(); ++i) {
                    const DValue& k = c->as_array()[i];
                    if (!k.is_string()) {
                        error(child(child(here, "collect"), i), "expected a key");
                        return std::nullopt;
                    }
                    collect.push_back(k.as_string());
                }
            }
            return stage::group(std::move(key), std::move(collect));
        }
        if (op == "$lookup") {
            if (!shape(arg, here, {"pipeline", "as"}, {"let"})) return std::nullopt;
            std::vector<VarDef> vars;
            bool ok = true;
            if (const DValue* let = arg.find("let")) {
                if (!let->is_object()) {
                    error(child(here, "let"), "expected an object of variable definitions");
                    return std::nullopt;
                }
                for (const auto& [x, src] : let->as_object()) {
                    std::string at_x = child(child(here, "let"), x);
                    if (!valid_var_name(x)) {
                        error(at_x, "invalid variable name \"" + x + "\"");
                        ok = false;
                        continue;
                    }
                    Path p;
                    if (!dollar_path(src, at_x, p)) {
                        ok = false;
                        continue;
                    }
                    vars.push_back(VarDef{x, p});
                }
            }
            auto sub = query(*arg.find("pipeline"), child(here, "pipeline"));
            Path as;
            ok = path_text(*arg.find("as"), child(here, "as"), as) && ok;
            if (!ok || !sub) return std::nullopt;
            return stage::lookup(std::move(vars), std::move(*sub), std::move(as));
        }
        if (op == "$graphLookup") {
            if (!shape(arg, here, {"from", "startWith", "connectFromField", "connectToField", "as"}))
                return std::nullopt;
            const DValue& from = *arg.find("from");
            bool ok = true;
            if (!from.is_string()) {
                error(child(here, "from"), "expected a collection name");
                ok = false;
            }
            Path seed, f, t, as;
            ok = dollar_path(*arg.find("startWith"), child(here, "startWith"), seed) && ok;
            ok = path_text(*arg.find("connectFromField"), child(here, "connectFromField"), f) && ok;
            ok = path_text(*arg.find("connectToField"), child(here, "connectToField"), t) && ok;
            ok = path_text(*arg.find("as"), child(here, "as"), as) && ok;
            if (!ok) return std::nullopt;
            return stage::graph_lookup(seed, from.as_string(), f, t, as);
        }
        if (op == "$unionWith") {
            auto sub = query(arg, here);
            if (!sub) return std::nullopt;
            return stage::union_with(std::move(*sub));
        }
        if (op == "$count") {
            if (!arg.is_string() || arg.as_string().empty()) {
                error(here, "expected a key");
                return std::nullopt;
            }
            return stage::count(arg.as_string());
        }
        if (op == "$sort") {
            if (!arg.is_object() || arg.as_object().empty()) {
                error(here, "expected a non-empty object of comparators");
                return std::nullopt;
            }
            std::vector<Comparator> order;
            for (const auto& [k, dir] : arg.as_object()) {
                Path p;
                if (!path_text(DValue(k), child(here, k), p)) return std::nullopt;
                if (!dir.is_number() || (dir.as_number() != 1 && dir.as_number() != -1)) {
                    error(child(here, k), "sort direction must be 1 or -1");
                    return std::nullopt;
                }
                order.push_back(Comparator{p, dir.as_number() == 1});
            }
            return stage::sort(std::move(order));
        }
        if (op == "$limit" || op == "$skip") {
            auto n = count_arg(arg, here);
            if (!n) return std::nullopt;
            return op == "$limit" ? stage::limit(*n) : stage::skip(*n);
        }
        error(at, "unknown stage \"" + op + "\"");
        return std::nullopt;
    }

private:
    std::vector<ParseIssue>& issues_;
    const FunctionRegistry& reg_;
};

// ---- validation ----

void call_names(const Term& t, std::set<std::string>& out);

void call_names(const BoolExpr& b, std::set<std::string>& out) {
    if (b.lhs) call_names(*b.lhs, out);
    if (b.rhs) call_names(*b.rhs, out);
    if (b.a) call_names(*b.a, out);
    if (b.b) call_names(*b.b, out);
}

void call_names(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Call) out.insert(t.name);
    for (const auto& i : t.items) call_names(*i, out);
    for (const auto& f : t.fields) call_names(*f.second, out);
    if (t.arg) call_names(*t.arg, out);
    if (t.alt) call_names(*t.alt, out);
    if (t.test) call_names(*t.test, out);
}

class Validator {
public:
    Validator(std::vector<ParseIssue>& issues, const FunctionRegistry& reg) : issues_(issues), reg_(reg) {}

    void query(const Query& q, const std::string& at, const std::set<std::string>& scope) {
        for (std::size_t i = 0; i < q.stages.size(); ++i) stage(q.stages[i], child(child(at, "pipeline"), i), scope);
    }

private:
    std::vector<ParseIssue>& issues_;
    const FunctionRegistry& reg_;

    void issue(const std::string& at, std::string msg) {
        issues_.push_back(ParseIssue{at, std::move(msg), ParseIssue::Kind::Validation});
    }

    template <class E>
    void expr(const E& e, const std::string& at, const std::set<std::string>& scope) {
        std::set<std::string> fns;
        call_names(e, fns);
        for (const auto& f : fns)
            if (!reg_.has(f)) issue(at, "unknown function \"" + f + "\"");
        for (const auto& x : free_vars(e))
            if (!scope.count(x)) issue(at, "unbound variable \"" + x + "\"");
    }

    void object_path(const Path& p, const std::string& at, const char* what) {
        if (p.empty() || !p.index_free()) issue(at, std::string(what) + " must be a non-empty index-free path");
    }

    void key(const std::string& k, const std::string& at) {
        if (k.empty() || k.find('.') != std::string::npos) issue(at, "expected a single key, got \"" + k + "\"");
    }

    void stage(const Stage& s, const std::string& at0, const std::set<std::string>& scope) {
        std::string at = child(at0, std::string("$") + stage_name(s.kind));
        switch (s.kind) {
        case Stage::Kind::Match: expr(*s.cond, at, scope); break;
        case Stage::Kind::Unwind: object_path(s.path, at, "unwind path"); break;
        case Stage::Kind::Project:
            if (s.defs.empty()) issue(at, "project needs at least one definition");
            for (std::size_t i = 0; i < s.defs.size(); ++i) {
                const auto& d = s.defs[i];
                std::string at_d = child(at, d.target.str());
                object_path(d.target, at_d, "project target");
                for (std::size_t j = 0; j < i; ++j) {
                    const Path& o = s.defs[j].target;
                    if (o.is_prefix_of(d.target) || d.target.is_prefix_of(o))
                        issue(at_d, "target \"" + d.target.str() + "\" is not compatible with \"" + o.str() + "\"");
                }
                expr(*d.value, at_d, scope);
            }
            break;
        case Stage::Kind::Group: {
            if (s.group_key) key(*s.group_key, child(at, "_id"));
            std::set<std::string> seen;
            for (std::size_t i = 0; i < s.collect.size(); ++i) {
                std::string at_k = child(child(at, "collect"), i);
                const auto& k = s.collect[i];
                if (k == "_id") issue(at_k, "\"_id\" cannot be collected");
                else key(k, at_k);
                if (!seen.insert(k).second) issue(at_k, "duplicate key \"" + k + "\"");
            }
            break;
        }
        case Stage::Kind::Lookup: {
            std::set<std::string> inner = scope;
            std::set<std::string> seen;
            for (const auto& v : s.vars) {
                std::string at_v = child(child(at, "let"), v.var);
                if (!valid_var_name(v.var)) issue(at_v, "invalid variable name \"" + v.var + "\"");
                if (!seen.insert(v.var).second) issue(at_v, "duplicate variable \"" + v.var + "\"");
                if (v.source.empty()) issue(at_v, "variable source must be a non-empty path");
                inner.insert(v.var);
            }
            object_path(s.path, child(at, "as"), "lookup output");
            query(*s.sub, child(at, "pipeline"), inner);
            break;
        }
        case Stage::Kind::GraphLookup:
            if (s.seed.empty()) issue(child(at, "startWith"), "path must be non-empty");
            if (s.from.empty()) issue(child(at, "connectFromField"), "path must be non-empty");
            if (s.to.empty()) issue(child(at, "connectToField"), "path must be non-empty");
            object_path(s.path, child(at, "as"), "graphLookup output");
            break;
        case Stage::Kind::UnionWith: query(*s.sub, at, scope); break;
        case Stage::Kind::Count:
            if (s.key.empty()) issue(at, "count key must be non-empty");
            break;
        case Stage::Kind::Sort:
            if (s.order.empty()) issue(at, "sort needs at least one comparator");
            break;
        case Stage::Kind::Limit:
        case Stage::Kind::Skip:
            if (s.n < 1) issue(at, "must be a positive integer");
            break;
        }
    }
};

// ---- printing ----

DValue ref_to_value(const PathRef& r) {
    switch (r.head) {
    case PathRef::Head::Root: return DValue(r.rest.empty() ? std::string("$$ROOT") : "$" + r.rest.str());
    case PathRef::Head::Var: return DValue("$$" + r.var + (r.rest.empty() ? "" : "." + r.rest.str()));
    case PathRef::Head::Const: break;
    }
    return DValue(Object{{"$literal", eval_path(r.constant, r.rest)}});
}

DValue literal_to_value(const DValue& v) {
    if (v.is_array() || v.is_object() || (v.is_string() && !v.as_string().empty() && v.as_string()[0] == '$'))
        return DValue(Object{{"$literal", v}});
    return v;
}

DValue op(const std::string& name, DValue arg) { return DValue(Object{{name, std::move(arg)}}); }

void left_spine(const BoolPtr& b, std::vector<BoolPtr>& out) {
    if (b->kind == BoolExpr::Kind::And) {
        left_spine(b->a, out);
        out.push_back(b->b);
    } else {
        out.push_back(b);
    }
}

DValue pair(const Term& a, const Term& b) { return DValue(Array{term_to_value(a), term_to_value(b)}); }

DValue stage_to_value(const Stage& s) {
    switch (s.kind) {
    case Stage::Kind::Match: return op("$match", bool_to_value(*s.cond));
    case Stage::Kind::Unwind: return op("$unwind", DValue("$" + s.path.str()));
    case Stage::Kind::Project: {
        Object defs;
        for (const auto& d : s.defs) {
            DValue v;
            if (d.idle()) {
                v = DValue(1);
            } else if (d.value->kind == Term::Kind::Literal &&
                       (d.value->literal.is_bool() || (d.value->literal.is_number() &&
                                                       (d.value->literal.as_number() == 0 ||
                                                        d.value->literal.as_number() == 1)))) {
                v = op("$literal", d.value->literal);
            } else {
                v = term_to_value(*d.value);
            }
            defs.emplace_back(d.target.str(), std::move(v));
        }
        return op("$project", DValue(std::move(defs)));
    }
    case Stage::Kind::Group: {
        Array collect;
        for (const auto& k : s.collect) collect.emplace_back(k);
        return op("$group", DValue(Object{{"_id", s.group_key ? DValue(*s.group_key) : DValue()},
                                          {"collect", DValue(std::move(collect))}}));
    }
    case Stage::Kind::Lookup: {
        Object let;
        for (const auto& v : s.vars) let.emplace_back(v.var, DValue("$" + v.source.str()));
        return op("$lookup", DValue(Object{{"let", DValue(std::move(let))},
                                           {"pipeline", query_to_value(*s.sub)},
                                           {"as", DValue(s.path.str())}}));
    }
    case Stage::Kind::GraphLookup:
        return op("$graphLookup", DValue(Object{{"from", DValue(s.coll)},
                                                {"startWith", DValue("$" + s.seed.str())},
                                                {"connectFromField", DValue(s.from.str())},
                                                {"connectToField", DValue(s.to.str())},
                                                {"as", DValue(s.path.str())}}));
    case Stage::Kind::UnionWith: return op("$unionWith", query_to_value(*s.sub));
    case Stage::Kind::Count: return op("$count", DValue(s.key));
    case Stage::Kind::Sort: {
        Object o;
        for (const auto& c : s.order) o.emplace_back(c.path.str(), DValue(c.ascending ? 1 : -1));
        return op("$sort", DValue(std::move(o)));
    }
    case Stage::Kind::Limit: return op("$limit", DValue(s.n));
    case Stage::Kind::Skip: return op("$skip", DValue(s.n));
    }
    return DValue();
}

}  // namespace

DValue term_to_value(const Term& t) {
    switch (t.kind) {
    case Term::Kind::Literal: return literal_to_value(t.literal);
    case Term::Kind::Path: return ref_to_value(t.path);
    case Term::Kind::Array: {
        Array out;
        for (const auto& i : t.items) out.push_back(term_to_value(*i));
        return DValue(std::move(out));
    }
    case Term::Kind::Object: {
        Object out;
        for (const auto& [k, f] : t.fields) out.emplace_back(k, term_to_value(*f));
        return op("$object", DValue(std::move(out)));
    }
    case Term::Kind::Call: return op("$" + t.name, term_to_value(*t.arg));
    case Term::Kind::Cond:
        return op("$cond", DValue(Object{{"if", bool_to_value(*t.test)},
                                         {"then", term_to_value(*t.arg)},
                                         {"else", term_to_value(*t.alt)}}));
    case Term::Kind::Map:
        return op("$map", DValue(Object{{"input", ref_to_value(t.path)}, {"as", DValue(t.name)}, {"in", term_to_value(*t.arg)}}));
    case Term::Kind::Filter:
        return op("$filter",
                  DValue(Object{{"input", ref_to_value(t.path)}, {"as", DValue(t.name)}, {"cond", bool_to_value(*t.test)}}));
    }
    return DValue();
}

DValue bool_to_value(const BoolExpr& b) {
    switch (b.kind) {
    case BoolExpr::Kind::Exists: return op("$exists", ref_to_value(b.path));
    case BoolExpr::Kind::Eq: return op("$eq", pair(*b.lhs, *b.rhs));
    case BoolExpr::Kind::Lte: return op("$lte", pair(*b.lhs, *b.rhs));
    case BoolExpr::Kind::In: return op("$in", pair(*b.lhs, *b.rhs));
    case BoolExpr::Kind::Not: {
        const BoolExpr& inner = *b.a;
        if (inner.kind == BoolExpr::Kind::Eq) return op("$ne", pair(*inner.lhs, *inner.rhs));
        if (inner.kind == BoolExpr::Kind::Lte) return op("$gt", pair(*inner.lhs, *inner.rhs));
        if (inner.kind == BoolExpr::Kind::And) {
            std::vector<BoolPtr> leaves;
            left_spine(b.a, leaves);
            if (std::all_of(leaves.begin(), leaves.end(), [](const BoolPtr& l) { return l->kind == BoolExpr::Kind::Not; })) {
                Array parts;
                for (const auto& l : leaves) parts.push_back(bool_to_value(*l->a));
                return op("$or", DValue(std::move(parts)));
            }
        }
        return op("$not", bool_to_value(inner));
    }
    case BoolExpr::Kind::And: {
        std::vector<BoolPtr> leaves;
        left_spine(b.a, leaves);
        leaves.push_back(b.b);
        Array parts;
        for (const auto& l : leaves) parts.push_back(bool_to_value(*l));
        return op("$and", DValue(std::move(parts)));
    }
    }
    return DValue();
}

DValue query_to_value(const Query& q) {
    Array stages;
    for (const auto& s : q.stages) stages.push_back(stage_to_value(s));
    return DValue(Object{{"collection", DValue(q.source)}, {"pipeline", DValue(std::move(stages))}});
}

std::string print_query(const Query& q, bool pretty) { return to_json(query_to_value(q), Mode::Ordered, pretty); }

std::vector<ParseIssue> validate(const Query& q, const FunctionRegistry& reg) {
    std::vector<ParseIssue> issues;
    Validator(issues, reg).query(q, "", {});
    return issues;
}

std::optional<Query> parse_query_value(const DValue& v, std::vector<ParseIssue>& issues, const FunctionRegistry& reg) {
    std::size_t before = issues.size();
    auto q = Parser(issues, reg).query(v, "");
    if (!q) return std::nullopt;
    Validator(issues, reg).query(*q, "", {});
    if (issues.size() != before) return std::nullopt;
    return q;
}

std::optional<Query> parse_query(std::string_view text, std::vector<ParseIssue>& issues, const FunctionRegistry& reg) {
    DValue v;
    JsonError err;
    if (!parse_json(text, v, err)) {
        issues.push_back(ParseIssue{err.pointer, err.message, ParseIssue::Kind::Syntax});
        return std::nullopt;
    }
    return parse_query_value(v, issues, reg);
}

std::optional<TermPtr> parse_term(const DValue& v, std::vector<ParseIssue>& issues, const FunctionRegistry& reg) {
    TermPtr t = Parser(issues, reg).term(v, "");
    if (!t) return std::nullopt;
    return t;
}

std::optional<BoolPtr> parse_bool(const DValue& v, std::vector<ParseIssue>& issues, const FunctionRegistry& reg) {
    BoolPtr b = Parser(issues, reg).boolean(v, "");
    if (!b) return std::nullopt;
    return b;
}

std::optional<DatabaseInstance> load_instance(std::string_view text, std::vector<ParseIssue>& issues) {
    DValue v;
    JsonError err;
    if (!parse_json(text, v, err)) {
        issues.push_back(ParseIssue{err.pointer, err.message, ParseIssue::Kind::Syntax});
        return std::nullopt;
    }
    if (!v.is_object()) {
        issues.push_back(ParseIssue{"", "an instance is an object mapping collection names to arrays", ParseIssue::Kind::Syntax});
        return std::nullopt;
    }
    std::size_t before = issues.size();
    DatabaseInstance db;
    for (const auto& [name, docs] : v.as_object()) {
        std::string at = child("", name);
        if (!docs.is_array()) {
            issues.push_back(ParseIssue{at, "expected an array of documents", ParseIssue::Kind::Syntax});
            continue;
        }
        std::set<DValue, NaturalLess> ids{NaturalLess{Mode::Ordered}};
        Collection coll;
        for (std::size_t i = 0; i < docs.as_array().size(); ++i) {
            const DValue& d = docs.as_array()[i];
            std::string at_d = child(at, i);
            if (!d.is_object()) {
                issues.push_back(ParseIssue{at_d, "a document must be an object", ParseIssue::Kind::Syntax});
                continue;
            }
            const DValue* id = d.find("_id");
            if (!id) {
                issues.push_back(ParseIssue{at_d, "document has no _id", ParseIssue::Kind::Validation});
                continue;
            }
            if (!ids.insert(*id).second)
                issues.push_back(ParseIssue{child(at_d, "_id"), "duplicate _id " + to_json(*id), ParseIssue::Kind::Validation});
            coll.push_back(d);
        }
        db.collections[name] = std::move(coll);
    }
    if (issues.size() != before) return std::nullopt;
    return db;
}

DValue instance_to_value(const DatabaseInstance& db) {
    Object out;
    for (const auto& [name, docs] : db.collections) out.emplace_back(name, DValue(Array(docs.begin(), docs.end())));
    return DValue(std::move(out));
}

}  // namespace mquery
