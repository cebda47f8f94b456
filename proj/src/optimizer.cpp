#include "mquery/optimizer.hpp"

#include <algorithm>

#include "mquery/syntax.hpp"

namespace mquery {

namespace {

using K = Stage::Kind;

const std::vector<RewriteRule> kRules = {
    {"match.merge", "match", K::Match, K::Match, false, "match(f) > match(g) => match(f and g)"},
    {"unwind.past-match", "match", K::Unwind, K::Match, false,
     "conjuncts compatible with the unwound path move before the unwind"},
    {"lookup.past-match", "match", K::Lookup, K::Match, false,
     "conjuncts compatible with the lookup output path move before the lookup"},
    {"project.past-match", "match", K::Project, K::Match, false,
     "conjuncts reading only below idle definitions move before the project"},
    {"group.past-match", "match", K::Group, K::Match, false,
     "conjuncts reading only _id move before the group, renamed to the group key"},
    {"unwind.past-unwind", "unwind", K::Unwind, K::Unwind, false, "compatible unwinds commute"},
    {"unwind.past-lookup", "unwind", K::Unwind, K::Lookup, false,
     "unwind compatible with the lookup variables and output moves after it"},
    {"unwind.past-project", "unwind", K::Unwind, K::Project, false,
     "unwind below an idle definition and clear of other right-hand sides moves after the project"},
    {"project.merge", "project", K::Project, K::Project, false,
     "a project reading only below idle definitions of its predecessor replaces it"},
    {"project.past-unwind", "project", K::Project, K::Unwind, false,
     "project moves after an unwind below one of its idle definitions"},
    {"project.past-lookup", "project", K::Project, K::Lookup, true,
     "project moves after a lookup whose variables and output lie below idle definitions"},
    {"project.past-group", "project", K::Project, K::Group, false,
     "a project keeping the group key and collected keys idle is dropped before the group"},
    {"lookup.past-lookup", "lookup", K::Lookup, K::Lookup, true, "independent lookups commute"},
    {"match.past-lookup", "lookup", K::Match, K::Lookup, false,
     "a match compatible with the lookup output moves after it"},
    {"lookup.past-unwind", "lookup", K::Lookup, K::Unwind, false,
     "an unwind compatible with the lookup variables and output moves before it"},
    {"lookup.past-project", "lookup", K::Lookup, K::Project, true,
     "a project keeping the lookup variables and output idle moves before it"},
};

bool all_in_extensions(const PathSet& reads, const PathSet& roots) {
    return std::all_of(reads.begin(), reads.end(), [&](const Path& r) { return in_extensions(r, roots); });
}

PathSet with(PathSet s, const Path& p) {
    s.insert(p);
    return s;
}

// Splits the conjuncts of `cond` by `qualifies`. Returns nullopt when none qualifies.
std::optional<std::vector<Stage>> split(const BoolPtr& cond, const std::function<bool(const BoolPtr&)>& qualifies,
                                        const Stage& middle,
                                        const std::function<BoolPtr(const BoolPtr&)>& rewrite = nullptr) {
    std::vector<BoolPtr> moved, kept;
    for (const auto& c : conjuncts(cond)) (qualifies(c) ? moved : kept).push_back(c);
    if (moved.empty()) return std::nullopt;
    BoolPtr front = kept.empty() ? cond : build::conj(moved);
    if (rewrite) front = rewrite(front);
    std::vector<Stage> out{stage::match(front), middle};
    if (!kept.empty()) out.push_back(stage::match(build::conj(kept)));
    return out;
}

bool lookup_clear_of(const Stage& lookup, const Path& p) {
    // p is compatible with the lookup's variable sources and output path.
    return is_compatible(p, with(analyze_variables(lookup.vars).var_paths, lookup.path));
}

bool project_lookup_ok(const Stage& project, const Stage& lookup) {
    DefinitionAnalysis d = analyze_definitions(project.defs);
    return is_compatible(lookup.path, d.active_rhs_paths) &&
           all_in_extensions(with(analyze_variables(lookup.vars).var_paths, lookup.path), d.idle);
}

// The idle definition covering p must be a strict prefix: an idle definition of p
// itself drops unwound null elements on one side only.
bool project_unwind_ok(const Stage& project, const Path& p) {
    DefinitionAnalysis d = analyze_definitions(project.defs);
    bool strictly_below = std::any_of(d.idle.begin(), d.idle.end(),
                                      [&](const Path& q) { return q != p && q.is_prefix_of(p); });
    return is_compatible(p, d.active_rhs_paths) && strictly_below;
}

}  // namespace

const std::vector<RewriteRule>& rule_catalog() { return kRules; }

const RewriteRule* find_rule(const std::string& id) {
    for (const auto& r : kRules)
        if (r.id == id) return &r;
    return nullptr;
}

DefinitionAnalysis analyze_definitions(const std::vector<PathDef>& defs) {
    DefinitionAnalysis a;
    for (const auto& d : defs) {
        PathSet r = read_set(*d.value);
        a.rhs_paths.insert(r.begin(), r.end());
        if (d.idle())
            a.idle.insert(d.target);
        else
            a.active_rhs_paths.insert(r.begin(), r.end());
    }
    return a;
}

DefinitionAnalysis analyze_variables(const std::vector<VarDef>& vars) {
    DefinitionAnalysis a;
    for (const auto& v : vars) a.var_paths.insert(v.source.truncate_at_index());
    return a;
}

std::optional<std::vector<Stage>> apply_window(const std::string& id, const Stage& a, const Stage& b, Mode mode) {
    const RewriteRule* rule = find_rule(id);
    if (!rule || a.kind != rule->first || b.kind != rule->second) return std::nullopt;
    if (rule->unordered_only && mode != Mode::Unordered) return std::nullopt;
    using V = std::vector<Stage>;

    if (id == "match.merge") return V{stage::match(build::and_(a.cond, b.cond))};

    if (id == "unwind.past-match")
        return split(b.cond, [&](const BoolPtr& c) { return is_compatible(a.path, read_set(*c)); }, a);

    if (id == "lookup.past-match")
        return split(b.cond, [&](const BoolPtr& c) { return is_compatible(a.path, read_set(*c)); }, a);

    if (id == "project.past-match") {
        PathSet idle = analyze_definitions(a.defs).idle;
        return split(b.cond, [&](const BoolPtr& c) { return all_in_extensions(read_set(*c), idle); }, a);
    }

    if (id == "group.past-match") {
        if (!a.group_key) return std::nullopt;
        PathSet id_only{Path({Segment(std::string("_id"))})};
        std::string g = *a.group_key;
        return split(
            b.cond, [&](const BoolPtr& c) { return all_in_extensions(read_set(*c), id_only); }, a,
            [&](const BoolPtr& f) { return rename_head(f, "_id", g); });
    }

    if (id == "unwind.past-unwind") {
        if (!is_compatible(a.path, PathSet{b.path})) return std::nullopt;
        return V{b, a};
    }

    if (id == "unwind.past-lookup") {
        if (!lookup_clear_of(b, a.path)) return std::nullopt;
        return V{b, a};
    }

    if (id == "lookup.past-unwind") {
        if (!lookup_clear_of(a, b.path)) return std::nullopt;
        return V{b, a};
    }

    if (id == "unwind.past-project") {
        if (!project_unwind_ok(b, a.path)) return std::nullopt;
        return V{b, a};
    }

    if (id == "project.past-unwind") {
        if (!project_unwind_ok(a, b.path)) return std::nullopt;
        return V{b, a};
    }

    if (id == "project.merge") {
        DefinitionAnalysis d1 = analyze_definitions(a.defs);
        DefinitionAnalysis d2 = analyze_definitions(b.defs);
        if (!all_in_extensions(d2.rhs_paths, d1.idle)) return std::nullopt;
        return V{b};
    }

    if (id == "project.past-lookup") {
        if (!project_lookup_ok(a, b)) return std::nullopt;
        return V{b, a};
    }

    if (id == "lookup.past-project") {
        if (!project_lookup_ok(b, a)) return std::nullopt;
        return V{b, a};
    }

    if (id == "project.past-group") {
        PathSet idle = analyze_definitions(a.defs).idle;
        auto key_idle = [&](const std::string& k) { return idle.count(Path({Segment(k)})) != 0; };
        if (b.group_key && !key_idle(*b.group_key)) return std::nullopt;
        if (!std::all_of(b.collect.begin(), b.collect.end(), key_idle)) return std::nullopt;
        return V{b};
    }

    if (id == "lookup.past-lookup") {
        PathSet x1 = analyze_variables(a.vars).var_paths;
        PathSet x2 = analyze_variables(b.vars).var_paths;
        if (!is_compatible(a.path, with(x2, b.path)) || !is_compatible(b.path, x1)) return std::nullopt;
        return V{b, a};
    }

    if (id == "match.past-lookup") {
        if (!is_compatible(b.path, read_set(*a.cond))) return std::nullopt;
        return V{b, a};
    }

    return std::nullopt;
}

std::optional<Query> apply_rule(const Query& q, const std::string& id, std::size_t pos, Mode mode) {
    if (pos + 1 >= q.stages.size()) return std::nullopt;
    auto window = apply_window(id, q.stages[pos], q.stages[pos + 1], mode);
    if (!window) return std::nullopt;
    Query r;
    r.source = q.source;
    r.stages.assign(q.stages.begin(), q.stages.begin() + static_cast<std::ptrdiff_t>(pos));
    r.stages.insert(r.stages.end(), window->begin(), window->end());
    r.stages.insert(r.stages.end(), q.stages.begin() + static_cast<std::ptrdiff_t>(pos + 2), q.stages.end());
    return r;
}

std::vector<Candidate> rewrite_step(const Query& q, Mode mode) {
    std::vector<Candidate> out;
    for (std::size_t pos = 0; pos + 1 < q.stages.size(); ++pos)
        for (const auto& rule : kRules)
            if (auto r = apply_rule(q, rule.id, pos, mode)) out.push_back(Candidate{rule.id, pos, std::move(*r)});
    return out;
}

namespace {

const std::vector<std::vector<std::string>> kPhases = {
    {"project.merge", "project.past-unwind", "project.past-lookup", "project.past-group", "project.past-match"},
    {"unwind.past-match", "unwind.past-lookup"},
    {"unwind.past-match", "lookup.past-match", "project.past-match", "group.past-match"},
    {"match.merge"},
};

}  // namespace

NormalizeResult normalize(const Query& q, Mode mode, std::size_t ceiling) {
    NormalizeResult res{q, {}, false};
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& phase : kPhases) {
            while (true) {
                if (res.trace.size() >= ceiling) {
                    res.hit_ceiling = true;
                    return res;
                }
                bool fired = false;
                for (std::size_t pos = 0; pos + 1 < res.query.stages.size() && !fired; ++pos) {
                    for (const auto& id : phase) {
                        auto next = apply_rule(res.query, id, pos, mode);
                        if (!next) continue;
                        res.trace.push_back(TraceStep{id, pos, res.query, *next});
                        res.query = std::move(*next);
                        fired = true;
                        break;
                    }
                }
                if (!fired) break;
                changed = true;
            }
        }
    }
    return res;
}

std::optional<Query> replay(const Query& q, const std::vector<TraceStep>& trace, Mode mode) {
    Query cur = q;
    for (const auto& step : trace) {
        auto next = apply_rule(cur, step.rule, step.position, mode);
        if (!next) return std::nullopt;
        cur = std::move(*next);
    }
    return cur;
}

DValue trace_to_value(const std::vector<TraceStep>& trace) {
    Array out;
    for (const auto& s : trace)
        out.emplace_back(Object{{"rule", DValue(s.rule)},
                                {"position", DValue(s.position)},
                                {"before", query_to_value(s.before)},
                                {"after", query_to_value(s.after)}});
    return DValue(std::move(out));
}

}  // namespace mquery
