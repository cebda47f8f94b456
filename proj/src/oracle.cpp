#include <algorithm>

#include "mquery/harness.hpp"

namespace mquery {

namespace {

const std::string& seg_key(const Path& p, std::size_t i) { return std::get<std::string>(p.segs[i]); }

DValue nest(const Path& p, std::size_t from, const DValue& v) {
    if (from == p.size()) return v;
    return DValue(Object{{seg_key(p, from), nest(p, from + 1, v)}});
}

// v with the value at p (which exists) replaced by w.
DValue replace(const DValue& v, const Path& p, std::size_t k, const DValue& w) {
    if (k == p.size()) return w;
    Object out;
    for (const auto& [key, child] : v.as_object())
        out.emplace_back(key, key == seg_key(p, k) ? replace(child, p, k + 1, w) : child);
    return DValue(std::move(out));
}

// o ⊕ (p ↦ v)
DValue extend(const DValue& o, const Path& p, std::size_t k, const DValue& v) {
    if (v.is_null()) return o;
    const std::string& key = seg_key(p, k);
    Object out = o.as_object();
    for (auto& [name, child] : out) {
        if (name != key) continue;
        if (k + 1 < p.size() && child.is_object())
            child = extend(child, p, k + 1, v);
        else
            child = nest(p, k + 1, v);
        return DValue(std::move(out));
    }
    out.emplace_back(key, nest(p, k + 1, v));
    return DValue(std::move(out));
}

// o ⊕* (p ↦ v)
DValue attach(const DValue& o, const Path& p, const DValue& v) {
    if (!eval_path(o, p).is_null()) return replace(o, p, 0, v);
    return extend(o, p, 0, v);
}

DValue field(const DValue& o, const std::string& k) {
    const DValue* v = o.find(k);
    return v ? *v : DValue();
}

}  // namespace

Collection oracle_eval_stage(const DatabaseInstance& db, const Collection& in, const Stage& s, Mode mode) {
    const auto& reg = builtin_registry();
    Collection out;
    switch (s.kind) {
    case Stage::Kind::Match:
        for (const auto& o : in)
            if (satisfies(EvalContext(o), *s.cond, reg, mode)) out.push_back(o);
        return out;
    case Stage::Kind::Unwind:
        for (const auto& o : in) {
            DValue arr = eval_path(o, s.path);
            if (!arr.is_array()) continue;
            for (std::size_t i = 0; i < arr.as_array().size(); ++i) out.push_back(replace(o, s.path, 0, arr.as_array()[i]));
        }
        return out;
    case Stage::Kind::Project:
        for (const auto& o : in) {
            DValue r{Object{}};
            for (const auto& d : s.defs) r = extend(r, d.target, 0, eval_term(EvalContext(o), *d.value, reg, mode));
            out.push_back(r);
        }
        return out;
    case Stage::Kind::Group: {
        auto gid = [&](const DValue& o) { return s.group_key ? field(o, *s.group_key) : DValue(); };
        std::vector<DValue> ids;
        for (const auto& o : in) {
            DValue id = gid(o);
            if (std::none_of(ids.begin(), ids.end(), [&](const DValue& x) { return mode_equal(x, id, mode); }))
                ids.push_back(id);
        }
        for (const auto& id : ids) {
            Object r{{"_id", id}};
            for (const auto& a : s.collect) {
                Array vals;
                for (const auto& o : in)
                    if (mode_equal(gid(o), id, mode) && !field(o, a).is_null()) vals.push_back(field(o, a));
                r.emplace_back(a, DValue(std::move(vals)));
            }
            out.emplace_back(std::move(r));
        }
        return out;
    }
    case Stage::Kind::Lookup:
        for (const auto& o : in) {
            Collection r = oracle_eval_query(db, ground_template(*s.sub, s.vars, o), mode);
            out.push_back(attach(o, s.path, DValue(Array(r.begin(), r.end()))));
        }
        return out;
    case Stage::Kind::GraphLookup: {
        const Collection& c = db.get(s.coll);
        // Nodes: distinct documents of in ∪ c.
        std::vector<DValue> nodes;
        auto node_of = [&](const DValue& v) {
            for (std::size_t i = 0; i < nodes.size(); ++i)
                if (mode_equal(nodes[i], v, mode)) return i;
            nodes.push_back(v);
            return nodes.size() - 1;
        };
        std::vector<std::size_t> in_nodes, c_nodes;
        for (const auto& o : in) in_nodes.push_back(node_of(o));
        for (const auto& x : c) c_nodes.push_back(node_of(x));
        std::size_t n = nodes.size();
        std::vector<std::vector<char>> t(n, std::vector<char>(n, 0));
        for (std::size_t i : in_nodes)
            for (std::size_t j : c_nodes)
                if (mode_equal(eval_path(nodes[i], s.seed), eval_path(nodes[j], s.to), mode)) t[i][j] = 1;
        for (std::size_t i : c_nodes)
            for (std::size_t j : c_nodes)
                if (mode_equal(eval_path(nodes[i], s.from), eval_path(nodes[j], s.to), mode)) t[i][j] = 1;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (t[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (t[k][j]) t[i][j] = 1;
        for (std::size_t idx = 0; idx < in.size(); ++idx) {
            Array found;
            std::vector<std::size_t> seen;
            for (std::size_t j : c_nodes) {
                if (!t[in_nodes[idx]][j] || std::find(seen.begin(), seen.end(), j) != seen.end()) continue;
                seen.push_back(j);
                found.push_back(nodes[j]);
            }
            out.push_back(attach(in[idx], s.path, DValue(std::move(found))));
        }
        return out;
    }
    case Stage::Kind::UnionWith: {
        out = in;
        Collection more = oracle_eval_query(db, *s.sub, mode);
        out.insert(out.end(), more.begin(), more.end());
        return out;
    }
    case Stage::Kind::Count: return {DValue(Object{{s.key, DValue(in.size())}})};
    case Stage::Kind::Sort: {
        auto before = [&](const DValue& a, const DValue& b) {
            for (const auto& c : s.order) {
                Ord r = natural_compare(eval_path(a, c.path), eval_path(b, c.path), mode);
                if (r != Ord::EQ) return c.ascending ? r == Ord::LT : r == Ord::GT;
            }
            return false;
        };
        for (const auto& o : in) {
            auto pos = out.end();
            while (pos != out.begin() && before(o, *(pos - 1))) --pos;
            out.insert(pos, o);
        }
        return out;
    }
    case Stage::Kind::Limit:
        for (std::size_t i = 0; i < in.size() && i < s.n; ++i) out.push_back(in[i]);
        return out;
    case Stage::Kind::Skip:
        for (std::size_t i = s.n; i < in.size(); ++i) out.push_back(in[i]);
        return out;
    }
    return out;
}

Collection oracle_eval_query(const DatabaseInstance& db, const Query& q, Mode mode) {
    Collection cur = db.get(q.source);
    for (const auto& s : q.stages) cur = oracle_eval_stage(db, cur, s, mode);
    return cur;
}

}  // namespace mquery
