#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mquery/harness.hpp"
#include "mquery/json_io.hpp"
#include "mquery/optimizer.hpp"
#include "mquery/syntax.hpp"

using namespace mquery;

namespace {

const std::string kCorpus = MQUERY_CORPUS_DIR;

struct Outcome {
    bool ok = true;
    int failures = 0;
    std::string detail;
    void fail(const std::string& why) {
        if (failures < 3) detail += (failures ? "; " : "") + why;
        else if (failures == 3) detail += "; ...";
        ++failures;
        ok = false;
    }
};

std::vector<DatabaseInstance> instances(std::uint64_t seed, int n, int max_docs = 5) {
    std::vector<DatabaseInstance> out;
    for (int k = 0; k < n; ++k) {
        GenParams p;
        p.seed = seed * 1000003ULL + static_cast<std::uint64_t>(k);
        p.max_docs = max_docs;
        out.push_back(gen_instance(p));
    }
    return out;
}

Outcome golden_suite(bool relational) {
    Outcome o;
    std::string error;
    auto cases = load_golden_manifest(kCorpus, error);
    if (!error.empty()) {
        o.fail(error);
        return o;
    }
    int n = 0;
    for (const auto& c : cases) {
        if ((c.name.rfind("ra-", 0) == 0) != relational) continue;
        ++n;
        GoldenResult r = run_golden_case(kCorpus, c);
        if (!r.passed) o.fail(c.name + ": " + r.detail);
    }
    if (o.ok) o.detail = std::to_string(n) + " pipelines match exactly";
    return o;
}

Outcome rewrite_soundness() {
    Outcome o;
    const std::size_t seeds = 1200;
    std::size_t cases = 0;
    std::size_t min_applied = ~std::size_t{0};
    for (const auto& rule : rule_catalog()) {
        std::vector<Mode> modes = {Mode::Unordered};
        if (!rule.unordered_only) modes.insert(modes.begin(), Mode::Ordered);
        for (Mode m : modes) {
            FuzzSummary s = fuzz_rules(0, seeds, {rule.id}, m, true);
            const RuleStats& st = s.rules.front();
            cases += st.applied;
            min_applied = std::min(min_applied, st.applied);
            if (st.applied < 1000)
                o.fail(rule.id + " (" + mode_name(m) + "): only " + std::to_string(st.applied) + " applicable cases");
            if (!st.violations.empty()) {
                const EquivReport& v = st.violations.front();
                o.fail(rule.id + " (" + mode_name(m) + "): " + std::to_string(st.violations.size()) +
                       " violations, first: " + print_query(v.q1) + " vs " + print_query(v.q2));
            }
        }
    }
    if (o.ok)
        o.detail = std::to_string(rule_catalog().size()) + " rules, " + std::to_string(cases) +
                   " verified cases, min per rule/mode " + std::to_string(min_applied);
    return o;
}

Outcome normalization() {
    Outcome o;
    std::size_t steps = 0, max_steps = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        GenParams p;
        p.seed = s;
        Query q = gen_query(p, core_families());
        Mode m = s % 2 ? Mode::Unordered : Mode::Ordered;
        NormalizeResult n = normalize(q, m);
        steps += n.trace.size();
        max_steps = std::max(max_steps, n.trace.size());
        if (n.hit_ceiling) {
            o.fail("step ceiling reached on seed " + std::to_string(s));
            continue;
        }
        NormalizeResult again = normalize(n.query, m);
        if (!again.trace.empty()) o.fail("not idempotent on seed " + std::to_string(s) + ": " + print_query(q));
        EquivReport r = check_equiv(q, n.query, instances(s, 4), m);
        if (!r.equal) o.fail("semantics changed on seed " + std::to_string(s) + ": " + print_query(q));
    }
    if (o.ok)
        o.detail = "1000 queries, " + std::to_string(steps) + " rewrite steps, max " + std::to_string(max_steps) +
                   " per query";
    return o;
}

int sign(Ord x) { return static_cast<int>(x); }

Outcome order_laws() {
    Outcome o;
    for (Mode m : {Mode::Ordered, Mode::Unordered}) {
        GenParams p;
        p.seed = m == Mode::Ordered ? 11 : 12;
        p.max_depth = 3;
        Generator g(p);
        for (int i = 0; i < 10000; ++i) {
            DValue a = g.value(p.max_depth), b = g.value(p.max_depth), c = g.value(p.max_depth);
            if (g.coin(0.2)) b = a;
            if (g.coin(0.1)) c = b;
            Ord ab = natural_compare(a, b, m), ba = natural_compare(b, a, m);
            Ord bc = natural_compare(b, c, m), ac = natural_compare(a, c, m);
            if (sign(ab) != -sign(ba)) o.fail(std::string("not antisymmetric: ") + to_json(a) + " " + to_json(b));
            if (sign(ab) <= 0 && sign(bc) <= 0 && sign(ac) > 0)
                o.fail("not transitive: " + to_json(a) + " " + to_json(b) + " " + to_json(c));
            if (ab == Ord::EQ && natural_compare(a, c, m) != natural_compare(b, c, m))
                o.fail("equal values order differently: " + to_json(a) + " " + to_json(b));
            if (natural_compare(a, a, m) != Ord::EQ) o.fail("not reflexive: " + to_json(a));
        }
        // Sort symmetry: ascending then reversed is sorted descending.
        for (int i = 0; i < 500; ++i) {
            Collection in;
            int n = g.uniform(0, 8);
            for (int k = 0; k < n; ++k) {
                Object d{{"_id", DValue(k)}};
                DValue v = g.value(2);
                if (!v.is_null()) d.emplace_back("v", v);
                in.emplace_back(std::move(d));
            }
            Path v = Path::of("v");
            Collection asc = eval_sort(in, {Comparator{v, true}}, m);
            std::reverse(asc.begin(), asc.end());
            for (std::size_t k = 1; k < asc.size(); ++k)
                if (natural_compare(eval_path(asc[k - 1], v), eval_path(asc[k], v), m) == Ord::LT)
                    o.fail("reversed ascending sort is not descending");
            if (!bag_equal(asc, in, m)) o.fail("sort is not a permutation");
        }
    }
    if (o.ok) o.detail = "10000 triples per mode, 500 sort-symmetry checks per mode";
    return o;
}

Outcome data_independence() {
    Outcome o;
    std::size_t evals = 0, docs = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) {
        GenParams p;
        p.seed = s;
        try {
            DatabaseInstance db = gen_instance(p);
            Query q = gen_query(p, all_families());
            EvalOptions opt;
            opt.mode = s % 2 ? Mode::Unordered : Mode::Ordered;
            docs += eval_query(db, q, opt).size();
            ++evals;
        } catch (const std::exception& e) {
            o.fail("seed " + std::to_string(s) + ": " + e.what());
        }
    }
    // Membership in a non-array is false, never an error.
    GenParams p;
    p.seed = 99;
    Generator g(p);
    std::size_t in_checks = 0;
    for (int i = 0; i < 2000; ++i) {
        DValue a = g.value(2), b = g.value(2);
        if (b.is_array()) continue;
        try {
            BoolPtr f = build::in(build::lit(a), build::lit(b));
            if (satisfies(EvalContext(DValue(Object{})), *f, builtin_registry(), Mode::Ordered))
                o.fail("in with non-array evaluated to true: " + to_json(b));
            ++in_checks;
        } catch (const std::exception& e) {
            o.fail(std::string("in with non-array raised: ") + e.what());
        }
    }
    if (o.ok)
        o.detail = std::to_string(evals) + " evaluations (" + std::to_string(docs) + " documents), " +
                   std::to_string(in_checks) + " non-array membership checks";
    return o;
}

bool sequence_stage(Stage::Kind k) { return k == Stage::Kind::Sort || k == Stage::Kind::Limit || k == Stage::Kind::Skip; }

Outcome oracle() {
    Outcome o;
    std::size_t stages = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
        GenParams p;
        p.seed = s;
        p.max_docs = 6;
        p.max_depth = 2;
        DatabaseInstance db = gen_instance(p);
        Query q = gen_query(p, all_families());
        for (Mode m : {Mode::Ordered, Mode::Unordered}) {
            EvalOptions opt;
            opt.mode = m;
            Collection cur = db.get(q.source);
            for (const auto& st : q.stages) {
                Collection engine = eval_stage(db, cur, st, opt);
                Collection ref = oracle_eval_stage(db, cur, st, m);
                bool same = sequence_stage(st.kind)
                                ? engine.size() == ref.size() &&
                                      std::equal(engine.begin(), engine.end(), ref.begin(),
                                                 [&](const DValue& x, const DValue& y) { return mode_equal(x, y, m); })
                                : bag_equal(engine, ref, m);
                ++stages;
                if (!same) {
                    o.fail("seed " + std::to_string(s) + " (" + mode_name(m) + ") stage " + stage_name(st.kind) +
                           " in " + print_query(q));
                    break;
                }
                cur = std::move(engine);
            }
        }
    }
    if (o.ok) o.detail = "500 seeds, " + std::to_string(stages) + " stage evaluations in both modes";
    return o;
}

DValue permute_keys(const DValue& v, Generator& g) {
    if (v.is_array()) {
        Array out;
        for (const auto& x : v.as_array()) out.push_back(permute_keys(x, g));
        return DValue(std::move(out));
    }
    if (!v.is_object()) return v;
    Object out;
    for (const auto& [k, x] : v.as_object()) out.emplace_back(k, permute_keys(x, g));
    std::shuffle(out.begin(), out.end(), g.rng());
    return DValue(std::move(out));
}

Outcome mode_contract() {
    Outcome o;
    DValue o1(Object{{"age", DValue(27)}, {"name", DValue("Alex Doe")}});
    DValue o2(Object{{"name", DValue("Alex Doe")}, {"age", DValue(27)}});
    if (natural_compare(o1, o2, Mode::Unordered) != Ord::EQ) o.fail("example pair differs in unordered mode");
    if (natural_compare(o1, o2, Mode::Ordered) == Ord::EQ) o.fail("example pair equal in ordered mode");
    GenParams p;
    p.seed = 5;
    p.max_depth = 3;
    p.key_alphabet = 5;
    Generator g(p);
    std::size_t pairs = 0, reordered = 0;
    while (pairs < 1000) {
        DValue a = g.document(static_cast<int>(pairs));
        if (a.as_object().size() < 2) continue;
        DValue b = permute_keys(a, g);
        ++pairs;
        if (natural_compare(a, b, Mode::Unordered) != Ord::EQ) o.fail("permuted pair differs in unordered mode: " + to_json(a));
        bool same_order = identical(a, b);
        if (!same_order) ++reordered;
        if ((natural_compare(a, b, Mode::Ordered) == Ord::EQ) != same_order)
            o.fail("ordered comparison disagrees with member order: " + to_json(a) + " " + to_json(b));
    }
    if (o.ok) o.detail = "example pair plus 1000 permuted pairs (" + std::to_string(reordered) + " reordered)";
    return o;
}

bool round_trips(const Query& q, std::string& why) {
    std::string text = print_query(q);
    std::vector<ParseIssue> issues;
    auto back = parse_query(text, issues);
    if (!back) {
        why = "reparse failed: " + text + " " + issues_to_json(issues);
        return false;
    }
    if (!equal(q, *back) || print_query(*back) != text) {
        why = "round trip changed " + text;
        return false;
    }
    return true;
}

bool rejected_at(const std::string& text, const std::string& pointer) {
    std::vector<ParseIssue> issues;
    if (parse_query(text, issues)) return false;
    return std::any_of(issues.begin(), issues.end(), [&](const ParseIssue& i) {
        return i.kind == ParseIssue::Kind::Validation && i.location == pointer;
    });
}

Outcome parser() {
    Outcome o;
    std::string error, why;
    auto cases = load_golden_manifest(kCorpus, error);
    if (!error.empty()) o.fail(error);
    for (const auto& c : cases) {
        std::string text;
        std::vector<ParseIssue> issues;
        if (!read_file(kCorpus + "/" + c.query_file, text)) {
            o.fail("cannot read " + c.query_file);
            continue;
        }
        auto q = parse_query(text, issues);
        if (!q)
            o.fail(c.name + " does not parse");
        else if (!round_trips(*q, why))
            o.fail(c.name + ": " + why);
    }
    for (std::uint64_t s = 0; s < 1000; ++s) {
        GenParams p;
        p.seed = s;
        if (!round_trips(gen_query(p, all_families()), why)) o.fail("seed " + std::to_string(s) + ": " + why);
    }
    if (!rejected_at(R"({"collection":"bands","pipeline":[{"$project":{"albums":1,"albums.title":1}}]})",
                     "/pipeline/0/$project/albums.title"))
        o.fail("incompatible project paths not rejected at /pipeline/0/$project/albums.title");
    if (!rejected_at(R"({"collection":"bands","pipeline":[{"$group":{"_id":"name","collect":["_id"]}}]})",
                     "/pipeline/0/$group/collect/0"))
        o.fail("_id in collect not rejected at /pipeline/0/$group/collect/0");
    if (o.ok)
        o.detail = std::to_string(cases.size()) + " corpus queries and 1000 generated queries round-trip; both validation rules located";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "golden corpus of worked stage pipelines", [] { return golden_suite(false); }},
        {2, "relational simulation pipelines", [] { return golden_suite(true); }},
        {3, "rewrite-rule soundness", rewrite_soundness},
        {4, "normalization idempotent and sound", normalization},
        {5, "natural order laws and sort symmetry", order_laws},
        {6, "data independence", data_independence},
        {7, "oracle equivalence", oracle},
        {8, "ordered/unordered mode contract", mode_contract},
        {9, "parser round trip and validation", parser},
    };
    int failed = 0;
    auto start = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o = c.run();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.ok) ++failed;
        std::printf("%s criterion %d: %s: %s [%.1fs]\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d/%zu criteria passed in %.1fs\n", static_cast<int>(criteria.size()) - failed, criteria.size(), total);
    return failed == 0 ? 0 : 1;
}
