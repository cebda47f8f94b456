#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mquery/expr.hpp"

namespace mquery {

using Collection = std::vector<DValue>;

struct PathDef {
    Path target;
    TermPtr value;
    // p/p: the target is copied unchanged.
    bool idle() const;
};

struct VarDef {
    std::string var;
    Path source;
};

struct Comparator {
    Path path;
    bool ascending = true;
};

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

struct Stage {
    enum class Kind : std::uint8_t { Match, Unwind, Project, Group, Lookup, GraphLookup, UnionWith, Count, Sort, Limit, Skip };
    Kind kind = Kind::Match;
    BoolPtr cond;                          // Match
    Path path;                             // Unwind path; Lookup/GraphLookup output path
    std::vector<PathDef> defs;             // Project
    std::optional<std::string> group_key;  // Group
    std::vector<std::string> collect;      // Group
    std::vector<VarDef> vars;              // Lookup
    QueryPtr sub;                          // Lookup template; UnionWith query
    std::string coll;                      // GraphLookup collection
    Path seed, from, to;                   // GraphLookup
    std::string key;                       // Count
    std::vector<Comparator> order;         // Sort
    std::size_t n = 0;                     // Limit, Skip
};

struct Query {
    std::string source;
    std::vector<Stage> stages;
};

const char* stage_name(Stage::Kind k);

namespace stage {
Stage match(BoolPtr cond);
Stage unwind(Path p);
Stage project(std::vector<PathDef> defs);
Stage group(std::optional<std::string> key, std::vector<std::string> collect);
Stage lookup(std::vector<VarDef> vars, Query tmpl, Path as);
Stage graph_lookup(Path seed, std::string coll, Path from, Path to, Path as);
Stage union_with(Query q);
Stage count(std::string key);
Stage sort(std::vector<Comparator> order);
Stage limit(std::size_t n);
Stage skip(std::size_t n);
}  // namespace stage

// Shorthand for an idle definition p/p.
PathDef idle_def(const Path& p);

bool equal(const Stage& a, const Stage& b);
bool equal(const Query& a, const Query& b);

// Sort/limit/skip/count/graphLookup are outside the core fragment.
bool is_core(const Query& q);

struct DatabaseInstance {
    std::map<std::string, Collection> collections;
    const Collection& get(const std::string& name) const;  // empty when absent
};

struct EvalOptions {
    Mode mode = Mode::Ordered;
    const FunctionRegistry* registry = nullptr;  // builtins when null
    bool cache_lookups = true;
};

Collection eval_query(const DatabaseInstance& db, const Query& q, const EvalOptions& opt = {});
Collection eval_stage(const DatabaseInstance& db, const Collection& in, const Stage& s, const EvalOptions& opt = {});

Collection eval_match(const Collection& in, const BoolPtr& cond, const EvalOptions& opt = {});
Collection eval_unwind(const Collection& in, const Path& p);
Collection eval_project(const Collection& in, const std::vector<PathDef>& defs, const EvalOptions& opt = {});
Collection eval_group(const Collection& in, const std::optional<std::string>& key,
                      const std::vector<std::string>& collect, Mode mode = Mode::Ordered);
Collection eval_lookup(const Collection& in, const DatabaseInstance& db, const std::vector<VarDef>& vars,
                       const Query& tmpl, const Path& as, const EvalOptions& opt = {});
Collection eval_graph_lookup(const Collection& in, const DatabaseInstance& db, const Path& seed,
                             const std::string& coll, const Path& from, const Path& to, const Path& as,
                             Mode mode = Mode::Ordered);
Collection eval_sort(const Collection& in, const std::vector<Comparator>& order, Mode mode = Mode::Ordered);

// Replaces the free variables of a lookup template by constants.
Query substitute(const Query& q, const Substitution& s);
Query ground_template(const Query& tmpl, const std::vector<VarDef>& vars, const DValue& doc);

// Free variables of all terms in q (nested templates included, minus their own variables).
std::set<std::string> free_vars(const Query& q);

}  // namespace mquery
