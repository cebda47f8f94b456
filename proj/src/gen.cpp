#include <algorithm>

#include "mquery/harness.hpp"

namespace mquery {

const char* const kMainCollection = "c0";
const char* const kExternalCollection = "c1";

namespace {

const char* const kKeys[] = {"a", "b", "c", "d", "e", "f"};

const DValue& pool_literal(std::size_t i) {
    static const std::vector<DValue> pool = {DValue(),      DValue(0),    DValue(1),      DValue(2),     DValue("x"),
                                             DValue(true),  DValue("y"),  DValue(false),  DValue(-1),    DValue(2.5)};
    return pool[i % pool.size()];
}

const char* const kUnary[] = {"size", "sum", "max", "concat", "toUpper", "setUnion", "trunc"};
const char* const kBinary[] = {"add", "subtract", "multiply"};

const std::vector<std::pair<Family, const char*>> kFamilyNames = {
    {Family::Match, "match"},   {Family::Unwind, "unwind"},       {Family::Project, "project"},
    {Family::Group, "group"},   {Family::Lookup, "lookup"},       {Family::Union, "union"},
    {Family::GraphLookup, "graphLookup"}, {Family::Sort, "sort"}, {Family::Limit, "limit"},
    {Family::Skip, "skip"},     {Family::Count, "count"},
};

}  // namespace

FamilySet core_families() {
    return {Family::Match, Family::Unwind, Family::Project, Family::Group, Family::Lookup, Family::Union};
}

FamilySet all_families() {
    FamilySet s;
    for (const auto& [f, _] : kFamilyNames) s.insert(f);
    return s;
}

const char* family_name(Family f) {
    for (const auto& [g, n] : kFamilyNames)
        if (g == f) return n;
    return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
    for (const auto& [g, n] : kFamilyNames)
        if (name == n) return g;
    return std::nullopt;
}

Generator::Generator(const GenParams& p) : p_(p), rng_(p.seed ^ 0x9e3779b97f4a7c15ULL) {}

bool Generator::coin(double p) { return static_cast<double>(rng_() % 1000000) < p * 1000000.0; }

int Generator::uniform(int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string Generator::key() {
    if (!vocab_.empty() && coin(0.7)) {
        const Path& v = vocab_[static_cast<std::size_t>(uniform(0, static_cast<int>(vocab_.size()) - 1))];
        if (!v.empty())
            if (auto* k = std::get_if<std::string>(&v.segs[0])) return *k;
    }
    int n = std::clamp(p_.key_alphabet, 1, 6);
    return kKeys[uniform(0, n - 1)];
}

DValue Generator::value(int depth) {
    int r = uniform(0, 99);
    if (depth <= 0 || r < 35) return pool_literal(static_cast<std::size_t>(uniform(0, std::max(p_.literal_pool, 1) - 1)));
    if (r < 65) {
        Array a;
        int n = uniform(0, p_.max_fanout);
        for (int i = 0; i < n; ++i) a.push_back(value(depth - 1));
        return DValue(std::move(a));
    }
    Object o;
    int n = uniform(0, p_.max_fanout);
    for (int i = 0; i < n; ++i) {
        std::string k = key();
        if (std::any_of(o.begin(), o.end(), [&](const Member& m) { return m.first == k; })) continue;
        o.emplace_back(k, value(depth - 1));
    }
    return DValue(std::move(o));
}

DValue Generator::document(int id) {
    Object o;
    std::vector<std::string> keys;
    int n = std::clamp(p_.key_alphabet, 1, 6);
    for (int i = 0; i < n; ++i) keys.emplace_back(kKeys[i]);
    std::shuffle(keys.begin(), keys.end(), rng_);
    int count = uniform(1, std::min(n, p_.max_fanout + 1));
    int id_at = uniform(0, count);
    for (int i = 0; i <= count; ++i) {
        if (i == id_at) o.emplace_back("_id", DValue(id));
        if (i < count) o.emplace_back(keys[static_cast<std::size_t>(i)], value(p_.max_depth));
    }
    return DValue(std::move(o));
}

DatabaseInstance Generator::instance() {
    DatabaseInstance db;
    for (const char* name : {kMainCollection, kExternalCollection}) {
        Collection c;
        int n = uniform(0, p_.max_docs);
        for (int i = 0; i < n; ++i) c.push_back(document(i + 1));
        db.collections[name] = std::move(c);
    }
    return db;
}

Path Generator::path(bool index_free) {
    if (!vocab_.empty() && coin(0.75)) {
        Path v = vocab_[static_cast<std::size_t>(uniform(0, static_cast<int>(vocab_.size()) - 1))];
        if (coin(0.3)) v.segs.emplace_back(key());
        if (!v.empty()) return v;
    }
    Path p;
    int len = uniform(1, std::clamp(p_.max_depth, 1, 3));
    for (int i = 0; i < len; ++i) {
        if (!index_free && i > 0 && coin(0.15)) p.segs.emplace_back(static_cast<std::size_t>(uniform(0, 1)));
        p.segs.emplace_back(key());
    }
    return p;
}

PathRef Generator::ref(const std::vector<std::string>& scope) {
    if (!scope.empty() && coin(0.4)) {
        std::string x = scope[static_cast<std::size_t>(uniform(0, static_cast<int>(scope.size()) - 1))];
        return PathRef::variable(std::move(x), coin(0.5) ? Path() : path(false));
    }
    if (coin(0.02)) return PathRef::root(Path());
    return PathRef::root(path(false));
}

TermPtr Generator::term(int depth, const std::vector<std::string>& scope) {
    int r = uniform(0, depth > 0 ? 9 : 2);
    switch (r) {
    case 0: return build::lit(value(1));
    case 1:
    case 2: return build::path(ref(scope));
    case 3: {
        std::vector<TermPtr> items;
        int n = uniform(0, 2);
        for (int i = 0; i < n; ++i) items.push_back(term(depth - 1, scope));
        return build::array(std::move(items));
    }
    case 4: {
        std::vector<std::pair<std::string, TermPtr>> fields;
        int n = uniform(1, 2);
        for (int i = 0; i < n; ++i) {
            std::string k = key();
            if (std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.first == k; })) continue;
            fields.emplace_back(k, term(depth - 1, scope));
        }
        return build::object(std::move(fields));
    }
    case 5: {
        if (coin(0.5)) return build::call(kUnary[uniform(0, 6)], term(depth - 1, scope));
        return build::call(kBinary[uniform(0, 2)], build::array({term(depth - 1, scope), term(depth - 1, scope)}));
    }
    case 6: return build::cond(boolean(depth - 1, scope), term(depth - 1, scope), term(depth - 1, scope));
    case 7:
    case 8: {
        std::string x = "x" + std::to_string(next_var_++);
        std::vector<std::string> inner = scope;
        inner.push_back(x);
        PathRef input = ref(scope);
        if (r == 7) return build::map(input, x, term(depth - 1, inner));
        return build::filter(input, x, boolean(depth - 1, inner));
    }
    default: return build::path(ref(scope));
    }
}

BoolPtr Generator::boolean(int depth, const std::vector<std::string>& scope) {
    int r = uniform(0, depth > 0 ? 9 : 5);
    int d = std::max(depth - 1, 0);
    switch (r) {
    case 0: return build::exists(ref(scope));
    case 1: return build::eq(term(d, scope), term(d, scope));
    case 2: return build::eq(build::path(ref(scope)), build::lit(value(1)));
    case 3: return build::lte(term(d, scope), term(d, scope));
    case 4: return build::lte(build::path(ref(scope)), build::lit(value(0)));
    case 5: return build::in(term(d, scope), term(d, scope));
    case 6: return build::not_(boolean(d, scope));
    case 7:
    case 8: return build::and_(boolean(d, scope), boolean(d, scope));
    default: return build::or_(boolean(d, scope), boolean(d, scope));
    }
}

Query Generator::simple_subquery(const std::vector<std::string>& scope) {
    Query q;
    q.source = coin(0.85) ? kExternalCollection : kMainCollection;
    int n = uniform(0, 2);
    for (int i = 0; i < n; ++i) {
        int r = uniform(0, 2);
        if (r == 0)
            q.stages.push_back(stage(Family::Match, scope));
        else if (r == 1)
            q.stages.push_back(stage(Family::Project, scope));
        else
            q.stages.push_back(stage(Family::Unwind, scope));
    }
    return q;
}

Stage Generator::stage(Family f, const std::vector<std::string>& scope) {
    switch (f) {
    case Family::Match: {
        if (!scope.empty() && coin(0.6)) {
            const std::string& x = scope[static_cast<std::size_t>(uniform(0, static_cast<int>(scope.size()) - 1))];
            BoolPtr b = coin(0.5) ? build::eq(build::path(ref({})), build::var(x))
                                  : build::in(build::var(x), build::path(ref({})));
            if (coin(0.3)) b = build::and_(b, boolean(1, scope));
            return stage::match(b);
        }
        return stage::match(boolean(2, scope));
    }
    case Family::Unwind: return stage::unwind(path(true));
    case Family::Project: {
        std::vector<PathDef> defs;
        int n = uniform(1, 3);
        for (int i = 0; i < n * 3 && static_cast<int>(defs.size()) < n; ++i) {
            Path t = path(true);
            bool clash = std::any_of(defs.begin(), defs.end(), [&](const PathDef& d) {
                return d.target.is_prefix_of(t) || t.is_prefix_of(d.target);
            });
            if (clash) continue;
            defs.push_back(coin(0.55) ? idle_def(t) : PathDef{t, term(2, scope)});
        }
        return stage::project(std::move(defs));
    }
    case Family::Group: {
        std::optional<std::string> g;
        if (coin(0.8)) g = key();
        std::vector<std::string> collect;
        int n = std::clamp(p_.key_alphabet, 1, 6);
        for (int i = 0; i < n; ++i)
            if (coin(0.5)) collect.emplace_back(kKeys[i]);
        if (!vocab_.empty())
            for (const auto& v : vocab_)
                if (v.size() == 1 && coin(0.5)) {
                    const auto& k = std::get<std::string>(v.segs[0]);
                    if (k != "_id" && std::find(collect.begin(), collect.end(), k) == collect.end()) collect.push_back(k);
                }
        return stage::group(std::move(g), std::move(collect));
    }
    case Family::Lookup: {
        std::vector<VarDef> vars;
        int n = uniform(0, 2);
        for (int i = 0; i < n; ++i) vars.push_back(VarDef{"v" + std::to_string(i), path(false)});
        std::vector<std::string> inner = scope;
        for (const auto& v : vars) inner.push_back(v.var);
        Query t = simple_subquery(inner);
        return stage::lookup(std::move(vars), std::move(t), path(true));
    }
    case Family::Union: return stage::union_with(simple_subquery(scope));
    case Family::GraphLookup: {
        Path seed = path(true), from = path(true), to = path(true), as = path(true);
        return stage::graph_lookup(seed, coin(0.8) ? kExternalCollection : kMainCollection, from, to, as);
    }
    case Family::Sort: {
        std::vector<Comparator> order;
        int n = uniform(1, 2);
        for (int i = 0; i < n; ++i) {
            Path p = path(false);
            if (std::none_of(order.begin(), order.end(), [&](const Comparator& c) { return c.path == p; }))
                order.push_back(Comparator{p, coin(0.5)});
        }
        return stage::sort(std::move(order));
    }
    case Family::Limit: return stage::limit(static_cast<std::size_t>(uniform(1, 4)));
    case Family::Skip: return stage::skip(static_cast<std::size_t>(uniform(1, 4)));
    case Family::Count: return stage::count(key());
    }
    return stage::limit(1);
}

Stage Generator::stage_of_kind(Stage::Kind k, const std::vector<std::string>& scope) {
    switch (k) {
    case Stage::Kind::Match: return stage(Family::Match, scope);
    case Stage::Kind::Unwind: return stage(Family::Unwind, scope);
    case Stage::Kind::Project: return stage(Family::Project, scope);
    case Stage::Kind::Group: return stage(Family::Group, scope);
    case Stage::Kind::Lookup: return stage(Family::Lookup, scope);
    case Stage::Kind::GraphLookup: return stage(Family::GraphLookup, scope);
    case Stage::Kind::UnionWith: return stage(Family::Union, scope);
    case Stage::Kind::Count: return stage(Family::Count, scope);
    case Stage::Kind::Sort: return stage(Family::Sort, scope);
    case Stage::Kind::Limit: return stage(Family::Limit, scope);
    case Stage::Kind::Skip: return stage(Family::Skip, scope);
    }
    return stage(Family::Match, scope);
}

Query Generator::query(const FamilySet& families) {
    std::vector<Family> fs(families.begin(), families.end());
    Query q;
    q.source = kMainCollection;
    if (fs.empty()) return q;
    int n = uniform(1, std::max(p_.max_stages, 1));
    for (int i = 0; i < n; ++i) q.stages.push_back(stage(fs[static_cast<std::size_t>(uniform(0, static_cast<int>(fs.size()) - 1))]));
    return q;
}

DatabaseInstance gen_instance(const GenParams& p) {
    GenParams q = p;
    q.seed = p.seed * 2 + 1;
    return Generator(q).instance();
}

Query gen_query(const GenParams& p, const FamilySet& families) {
    GenParams q = p;
    q.seed = p.seed * 2;
    return Generator(q).query(families);
}

namespace {

// Paths a stage touches; used to steer the second stage of a rule window towards interaction.
std::vector<Path> mentioned(const Stage& s) {
    std::vector<Path> out;
    switch (s.kind) {
    case Stage::Kind::Project:
        for (const auto& d : s.defs)
            if (d.idle()) out.push_back(d.target);
        break;
    case Stage::Kind::Group: out.push_back(Path::of("_id")); break;
    case Stage::Kind::Unwind: out.push_back(s.path); break;
    case Stage::Kind::Lookup:
        out.push_back(s.path);
        for (const auto& v : s.vars) out.push_back(v.source.truncate_at_index());
        break;
    case Stage::Kind::Match:
        for (const auto& p : read_set(*s.cond))
            if (!p.empty()) out.push_back(p);
        break;
    default: break;
    }
    return out;
}

}  // namespace

std::optional<RuleCase> gen_rule_case(const std::string& rule, std::uint64_t seed, Mode mode, const GenParams& base) {
    const RewriteRule* r = find_rule(rule);
    if (!r) return std::nullopt;
    GenParams p = base;
    p.seed = seed * 7919 + std::hash<std::string>{}(rule);
    Generator g(p);
    for (int attempt = 0; attempt < 64; ++attempt) {
        g.set_vocabulary({});
        Query q;
        q.source = kMainCollection;
        if (g.coin(0.25)) q.stages.push_back(g.stage(g.coin(0.5) ? Family::Unwind : Family::Project));
        std::size_t pos = q.stages.size();
        Stage a = g.stage_of_kind(r->first);
        if (g.coin(0.75)) g.set_vocabulary(mentioned(a));
        Stage b = g.stage_of_kind(r->second);
        g.set_vocabulary({});
        q.stages.push_back(std::move(a));
        q.stages.push_back(std::move(b));
        auto after = apply_rule(q, rule, pos, mode);
        if (!after) continue;
        RuleCase c{rule, std::move(q), std::move(*after), {}};
        for (int i = 0; i < 3; ++i) c.instances.push_back(g.instance());
        return c;
    }
    return std::nullopt;
}

}  // namespace mquery
