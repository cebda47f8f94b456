#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mquery/pipeline.hpp"

namespace mquery {

struct RewriteRule {
    std::string id;      // e.g. "unwind.past-match": unwind ▷ match becomes match ▷ unwind
    std::string family;  // match | unwind | project | lookup
    Stage::Kind first;   // kinds of the two-stage window it rewrites
    Stage::Kind second;
    bool unordered_only = false;
    std::string summary;
};

const std::vector<RewriteRule>& rule_catalog();
const RewriteRule* find_rule(const std::string& id);

struct DefinitionAnalysis {
    PathSet idle;       // targets p of definitions p/p
    PathSet rhs_paths;  // read set of all right-hand sides
    PathSet active_rhs_paths;  // read set of the non-idle right-hand sides
    PathSet var_paths;  // lookup variable sources, cut at the first index
};

DefinitionAnalysis analyze_definitions(const std::vector<PathDef>& defs);
DefinitionAnalysis analyze_variables(const std::vector<VarDef>& vars);

// Rewrites the window starting at `pos` with rule `id`; nullopt when the precondition fails.
std::optional<std::vector<Stage>> apply_window(const std::string& id, const Stage& a, const Stage& b, Mode mode);
std::optional<Query> apply_rule(const Query& q, const std::string& id, std::size_t pos, Mode mode);

struct Candidate {
    std::string rule;
    std::size_t position;
    Query result;
};

// Every applicable (rule, window) pair of the top-level pipeline.
std::vector<Candidate> rewrite_step(const Query& q, Mode mode);

struct TraceStep {
    std::string rule;
    std::size_t position;
    Query before;
    Query after;
};

struct NormalizeResult {
    Query query;
    std::vector<TraceStep> trace;
    bool hit_ceiling = false;
};

constexpr std::size_t kStepCeiling = 10000;

NormalizeResult normalize(const Query& q, Mode mode, std::size_t ceiling = kStepCeiling);

// Re-applies each step's rule at its position; nullopt if a step does not apply.
std::optional<Query> replay(const Query& q, const std::vector<TraceStep>& trace, Mode mode);

DValue trace_to_value(const std::vector<TraceStep>& trace);

}  // namespace mquery
