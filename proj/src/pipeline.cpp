#include "mquery/pipeline.hpp"

#include <algorithm>
#include <deque>

namespace mquery {

bool PathDef::idle() const {
    return value && value->kind == Term::Kind::Path && value->path.is_root() && value->path.rest == target;
}

PathDef idle_def(const Path& p) { return PathDef{p, build::path(PathRef::root(p))}; }

const char* stage_name(Stage::Kind k) {
    switch (k) {
    case Stage::Kind::Match: return "match";
    case Stage::Kind::Unwind: return "unwind";
    case Stage::Kind::Project: return "project";
    case Stage::Kind::Group: return "group";
    case Stage::Kind::Lookup: return "lookup";
    case Stage::Kind::GraphLookup: return "graphLookup";
    case Stage::Kind::UnionWith: return "unionWith";
    case Stage::Kind::Count: return "count";
    case Stage::Kind::Sort: return "sort";
    case Stage::Kind::Limit: return "limit";
    case Stage::Kind::Skip: return "skip";
    }
    return "?";
}

namespace stage {

namespace {
Stage of(Stage::Kind k) {
    Stage s;
    s.kind = k;
    return s;
}
}  // namespace

Stage match(BoolPtr cond) {
    Stage s = of(Stage::Kind::Match);
    s.cond = std::move(cond);
    return s;
}
Stage unwind(Path p) {
    Stage s = of(Stage::Kind::Unwind);
    s.path = std::move(p);
    return s;
}
Stage project(std::vector<PathDef> defs) {
    Stage s = of(Stage::Kind::Project);
    s.defs = std::move(defs);
    return s;
}
Stage group(std::optional<std::string> key, std::vector<std::string> collect) {
    Stage s = of(Stage::Kind::Group);
    s.group_key = std::move(key);
    s.collect = std::move(collect);
    return s;
}
Stage lookup(std::vector<VarDef> vars, Query tmpl, Path as) {
    Stage s = of(Stage::Kind::Lookup);
    s.vars = std::move(vars);
    s.sub = std::make_shared<const Query>(std::move(tmpl));
    s.path = std::move(as);
    return s;
}
Stage graph_lookup(Path seed, std::string coll, Path from, Path to, Path as) {
    Stage s = of(Stage::Kind::GraphLookup);
    s.seed = std::move(seed);
    s.coll = std::move(coll);
    s.from = std::move(from);
    s.to = std::move(to);
    s.path = std::move(as);
    return s;
}
Stage union_with(Query q) {
    Stage s = of(Stage::Kind::UnionWith);
    s.sub = std::make_shared<const Query>(std::move(q));
    return s;
}
Stage count(std::string key) {
    Stage s = of(Stage::Kind::Count);
    s.key = std::move(key);
    return s;
}
Stage sort(std::vector<Comparator> order) {
    Stage s = of(Stage::Kind::Sort);
    s.order = std::move(order);
    return s;
}
Stage limit(std::size_t n) {
    Stage s = of(Stage::Kind::Limit);
    s.n = n;
    return s;
}
Stage skip(std::size_t n) {
    Stage s = of(Stage::Kind::Skip);
    s.n = n;
    return s;
}

}  // namespace stage

bool equal(const Stage& a, const Stage& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Stage::Kind::Match: return equal(a.cond, b.cond);
    case Stage::Kind::Unwind: return a.path == b.path;
    case Stage::Kind::Project:
        if (a.defs.size() != b.defs.size()) return false;
        for (std::size_t i = 0; i < a.defs.size(); ++i)
            if (a.defs[i].target != b.defs[i].target || !equal(a.defs[i].value, b.defs[i].value)) return false;
        return true;
    case Stage::Kind::Group: return a.group_key == b.group_key && a.collect == b.collect;
    case Stage::Kind::Lookup:
        if (a.vars.size() != b.vars.size() || a.path != b.path) return false;
        for (std::size_t i = 0; i < a.vars.size(); ++i)
            if (a.vars[i].var != b.vars[i].var || a.vars[i].source != b.vars[i].source) return false;
        return equal(*a.sub, *b.sub);
    case Stage::Kind::GraphLookup:
        return a.seed == b.seed && a.coll == b.coll && a.from == b.from && a.to == b.to && a.path == b.path;
    case Stage::Kind::UnionWith: return equal(*a.sub, *b.sub);
    case Stage::Kind::Count: return a.key == b.key;
    case Stage::Kind::Sort:
        if (a.order.size() != b.order.size()) return false;
        for (std::size_t i = 0; i < a.order.size(); ++i)
            if (a.order[i].path != b.order[i].path || a.order[i].ascending != b.order[i].ascending) return false;
        return true;
    case Stage::Kind::Limit:
    case Stage::Kind::Skip: return a.n == b.n;
    }
    return false;
}

bool equal(const Query& a, const Query& b) {
    if (a.source != b.source || a.stages.size() != b.stages.size()) return false;
    for (std::size_t i = 0; i < a.stages.size(); ++i)
        if (!equal(a.stages[i], b.stages[i])) return false;
    return true;
}

bool is_core(const Query& q) {
    for (const auto& s : q.stages) {
        switch (s.kind) {
        case Stage::Kind::Match:
        case Stage::Kind::Unwind:
        case Stage::Kind::Project:
        case Stage::Kind::Group: break;
        case Stage::Kind::Lookup:
        case Stage::Kind::UnionWith:
            if (!is_core(*s.sub)) return false;
            break;
        default: return false;
        }
    }
    return true;
}

const Collection& DatabaseInstance::get(const std::string& name) const {
    static const Collection empty;
    auto it = collections.find(name);
    return it == collections.end() ? empty : it->second;
}

// ---- substitution over queries ----

namespace {

Substitution without(const Substitution& s, const std::vector<VarDef>& vars) {
    Substitution r = s;
    for (const auto& v : vars) r.erase(v.var);
    return r;
}

}  // namespace

Query substitute(const Query& q, const Substitution& s) {
    if (s.empty()) return q;
    Query r;
    r.source = q.source;
    for (const auto& st : q.stages) {
        Stage n = st;
        switch (st.kind) {
        case Stage::Kind::Match: n.cond = substitute(st.cond, s); break;
        case Stage::Kind::Project:
            for (auto& d : n.defs) d.value = substitute(d.value, s);
            break;
        case Stage::Kind::Lookup: {
            Substitution inner = without(s, st.vars);
            n.sub = std::make_shared<const Query>(substitute(*st.sub, inner));
            break;
        }
        case Stage::Kind::UnionWith: n.sub = std::make_shared<const Query>(substitute(*st.sub, s)); break;
        default: break;
        }
        r.stages.push_back(std::move(n));
    }
    return r;
}

Query ground_template(const Query& tmpl, const std::vector<VarDef>& vars, const DValue& doc) {
    Substitution s;
    for (const auto& v : vars) s[v.var] = eval_path(doc, v.source);
    return substitute(tmpl, s);
}

std::set<std::string> free_vars(const Query& q) {
    std::set<std::string> out;
    for (const auto& st : q.stages) {
        switch (st.kind) {
        case Stage::Kind::Match: {
            auto f = free_vars(*st.cond);
            out.insert(f.begin(), f.end());
            break;
        }
        case Stage::Kind::Project:
            for (const auto& d : st.defs) {
                auto f = free_vars(*d.value);
                out.insert(f.begin(), f.end());
            }
            break;
        case Stage::Kind::Lookup: {
            auto f = free_vars(*st.sub);
            for (const auto& v : st.vars) f.erase(v.var);
            out.insert(f.begin(), f.end());
            break;
        }
        case Stage::Kind::UnionWith: {
            auto f = free_vars(*st.sub);
            out.insert(f.begin(), f.end());
            break;
        }
        default: break;
        }
    }
    return out;
}

// ---- evaluation ----

namespace {

const FunctionRegistry& registry(const EvalOptions& opt) {
    return opt.registry ? *opt.registry : builtin_registry();
}

}  // namespace

Collection eval_match(const Collection& in, const BoolPtr& cond, const EvalOptions& opt) {
    Collection out;
    const auto& reg = registry(opt);
    for (const auto& o : in)
        if (satisfies(EvalContext(o), *cond, reg, opt.mode)) out.push_back(o);
    return out;
}

Collection eval_unwind(const Collection& in, const Path& p) {
    Collection out;
    for (const auto& o : in) {
        DValue v = eval_path(o, p);
        if (!v.is_array()) continue;
        for (const auto& e : v.as_array()) out.push_back(override_path(o, p, e));
    }
    return out;
}

Collection eval_project(const Collection& in, const std::vector<PathDef>& defs, const EvalOptions& opt) {
    Collection out;
    out.reserve(in.size());
    const auto& reg = registry(opt);
    for (const auto& o : in) {
        EvalContext ctx(o);
        DValue r{Object{}};
        for (const auto& d : defs) r = merge_pair(r, d.target, eval_term(ctx, *d.value, reg, opt.mode));
        out.push_back(std::move(r));
    }
    return out;
}

Collection eval_group(const Collection& in, const std::optional<std::string>& key,
                      const std::vector<std::string>& collect, Mode mode) {
    std::map<DValue, std::size_t, NaturalLess> index{NaturalLess{mode}};
    std::vector<DValue> ids;
    std::vector<std::vector<Array>> values;
    for (const auto& o : in) {
        DValue id;
        if (key)
            if (const DValue* v = o.find(*key)) id = *v;
        auto [it, fresh] = index.emplace(id, ids.size());
        if (fresh) {
            ids.push_back(id);
            values.emplace_back(collect.size());
        }
        auto& cls = values[it->second];
        for (std::size_t i = 0; i < collect.size(); ++i) {
            const DValue* v = o.find(collect[i]);
            if (v && !v->is_null()) cls[i].push_back(*v);
        }
    }
    Collection out;
    for (std::size_t c = 0; c < ids.size(); ++c) {
        Object obj;
        obj.emplace_back("_id", ids[c]);
        for (std::size_t i = 0; i < collect.size(); ++i) obj.emplace_back(collect[i], DValue(std::move(values[c][i])));
        out.emplace_back(std::move(obj));
    }
    return out;
}

Collection eval_lookup(const Collection& in, const DatabaseInstance& db, const std::vector<VarDef>& vars,
                       const Query& tmpl, const Path& as, const EvalOptions& opt) {
    std::map<DValue, DValue, NaturalLess> cache{NaturalLess{Mode::Ordered}};
    Collection out;
    out.reserve(in.size());
    for (const auto& o : in) {
        Array key;
        for (const auto& v : vars) key.push_back(eval_path(o, v.source));
        DValue k(std::move(key));
        DValue joined;
        auto it = opt.cache_lookups ? cache.find(k) : cache.end();
        if (it != cache.end()) {
            joined = it->second;
        } else {
            Collection r = eval_query(db, ground_template(tmpl, vars, o), opt);
            joined = DValue(Array(r.begin(), r.end()));
            if (opt.cache_lookups) cache.emplace(k, joined);
        }
        out.push_back(merge_or_override(o, as, joined));
    }
    return out;
}

Collection eval_graph_lookup(const Collection& in, const DatabaseInstance& db, const Path& seed,
                             const std::string& coll, const Path& from, const Path& to, const Path& as,
                             Mode mode) {
    const Collection& c = db.get(coll);
    std::map<DValue, std::vector<std::size_t>, NaturalLess> by_to{NaturalLess{mode}};
    for (std::size_t i = 0; i < c.size(); ++i) by_to[eval_path(c[i], to)].push_back(i);
    auto targets = [&](const DValue& v) -> const std::vector<std::size_t>* {
        auto it = by_to.find(v);
        return it == by_to.end() ? nullptr : &it->second;
    };
    // Edges out of a target document: its own from-links, plus seed-links when it also occurs in the input.
    std::vector<std::vector<std::size_t>> succ(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (auto* t = targets(eval_path(c[i], from))) succ[i] = *t;
        bool in_input = std::any_of(in.begin(), in.end(), [&](const DValue& o) { return mode_equal(o, c[i], mode); });
        if (in_input)
            if (auto* t = targets(eval_path(c[i], seed))) succ[i].insert(succ[i].end(), t->begin(), t->end());
    }

    Collection out;
    out.reserve(in.size());
    for (const auto& o : in) {
        std::vector<char> reached(c.size(), 0);
        std::deque<std::size_t> frontier;
        auto visit = [&](std::size_t j) {
            if (!reached[j]) {
                reached[j] = 1;
                frontier.push_back(j);
            }
        };
        if (auto* t = targets(eval_path(o, seed)))
            for (auto j : *t) visit(j);
        for (std::size_t i = 0; i < c.size(); ++i)
            if (mode_equal(o, c[i], mode))
                for (auto j : succ[i]) visit(j);
        while (!frontier.empty()) {
            std::size_t i = frontier.front();
            frontier.pop_front();
            for (auto j : succ[i]) visit(j);
        }
        Array found;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (!reached[j]) continue;
            bool dup = std::any_of(found.begin(), found.end(), [&](const DValue& x) { return mode_equal(x, c[j], mode); });
            if (!dup) found.push_back(c[j]);
        }
        out.push_back(merge_or_override(o, as, DValue(std::move(found))));
    }
    return out;
}

Collection eval_sort(const Collection& in, const std::vector<Comparator>& order, Mode mode) {
    Collection out = in;
    std::stable_sort(out.begin(), out.end(), [&](const DValue& a, const DValue& b) {
        for (const auto& c : order) {
            Ord r = natural_compare(eval_path(a, c.path), eval_path(b, c.path), mode);
            if (r == Ord::EQ) continue;
            return c.ascending ? r == Ord::LT : r == Ord::GT;
        }
        return false;
    });
    return out;
}

Collection eval_stage(const DatabaseInstance& db, const Collection& in, const Stage& s, const EvalOptions& opt) {
    switch (s.kind) {
    case Stage::Kind::Match: return eval_match(in, s.cond, opt);
    case Stage::Kind::Unwind: return eval_unwind(in, s.path);
    case Stage::Kind::Project: return eval_project(in, s.defs, opt);
    case Stage::Kind::Group: return eval_group(in, s.group_key, s.collect, opt.mode);
    case Stage::Kind::Lookup: return eval_lookup(in, db, s.vars, *s.sub, s.path, opt);
    case Stage::Kind::GraphLookup: return eval_graph_lookup(in, db, s.seed, s.coll, s.from, s.to, s.path, opt.mode);
    case Stage::Kind::UnionWith: {
        Collection out = in;
        Collection more = eval_query(db, *s.sub, opt);
        out.insert(out.end(), more.begin(), more.end());
        return out;
    }
    case Stage::Kind::Count: return Collection{DValue(Object{{s.key, DValue(in.size())}})};
    case Stage::Kind::Sort: return eval_sort(in, s.order, opt.mode);
    case Stage::Kind::Limit: return Collection(in.begin(), in.begin() + std::min(s.n, in.size()));
    case Stage::Kind::Skip: return s.n >= in.size() ? Collection{} : Collection(in.begin() + s.n, in.end());
    }
    return in;
}

Collection eval_query(const DatabaseInstance& db, const Query& q, const EvalOptions& opt) {
    Collection cur = db.get(q.source);
    for (const auto& s : q.stages) cur = eval_stage(db, cur, s, opt);
    return cur;
}

}  // namespace mquery
