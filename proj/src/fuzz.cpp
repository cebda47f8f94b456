#include <algorithm>

#include "mquery/harness.hpp"

namespace mquery {

bool FuzzSummary::ok() const {
    return std::all_of(rules.begin(), rules.end(), [](const RuleStats& r) { return r.violations.empty(); });
}

std::vector<std::string> rules_for_family(const std::string& family) {
    std::vector<std::string> out;
    for (const auto& r : rule_catalog())
        if (family == "all" || r.family == family) out.push_back(r.id);
    return out;
}

namespace {

struct SeedOutcome {
    bool applied = false;
    bool verified = false;
    std::optional<EquivReport> violation;
};

SeedOutcome run_seed(const std::string& rule, std::uint64_t seed, Mode mode) {
    SeedOutcome o;
    auto c = gen_rule_case(rule, seed, mode);
    if (!c) return o;
    o.applied = true;
    EquivReport r = check_equiv(c->before, c->after, c->instances, mode);
    if (r.equal)
        o.verified = true;
    else
        o.violation = std::move(r);
    return o;
}

void merge(RuleStats& stats, const SeedOutcome& o) {
    ++stats.attempts;
    if (o.applied) ++stats.applied;
    if (o.verified) ++stats.verified;
    if (o.violation) stats.violations.push_back(*o.violation);
}

}  // namespace

FuzzSummary fuzz_rules(std::uint64_t first_seed, std::size_t seeds, const std::vector<std::string>& rules, Mode mode,
                       bool parallel) {
    FuzzSummary s;
    s.mode = mode;
    s.first_seed = first_seed;
    s.seeds = seeds;
    for (const auto& rule : rules) {
        std::vector<SeedOutcome> outcomes(seeds);
        const long long n = static_cast<long long>(seeds);
        if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
            for (long long i = 0; i < n; ++i)
                outcomes[static_cast<std::size_t>(i)] = run_seed(rule, first_seed + static_cast<std::uint64_t>(i), mode);
        } else {
            for (long long i = 0; i < n; ++i)
                outcomes[static_cast<std::size_t>(i)] = run_seed(rule, first_seed + static_cast<std::uint64_t>(i), mode);
        }
        RuleStats stats;
        stats.rule = rule;
        for (const auto& o : outcomes) merge(stats, o);
        s.rules.push_back(std::move(stats));
    }
    return s;
}

DValue fuzz_to_value(const FuzzSummary& s) {
    Array rules;
    for (const auto& r : s.rules) {
        Array violations;
        for (const auto& v : r.violations) violations.push_back(report_to_value(v));
        rules.emplace_back(Object{{"rule", DValue(r.rule)},
                                  {"attempts", DValue(r.attempts)},
                                  {"applied", DValue(r.applied)},
                                  {"verified", DValue(r.verified)},
                                  {"violations", DValue(std::move(violations))}});
    }
    return DValue(Object{{"mode", DValue(mode_name(s.mode))},
                         {"first_seed", DValue(static_cast<double>(s.first_seed))},
                         {"seeds", DValue(s.seeds)},
                         {"ok", DValue(s.ok())},
                         {"rules", DValue(std::move(rules))}});
}

}  // namespace mquery
