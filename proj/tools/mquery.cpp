#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mquery/harness.hpp"
#include "mquery/json_io.hpp"
#include "mquery/optimizer.hpp"
#include "mquery/syntax.hpp"

using namespace mquery;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kMismatch = 2, kIo = 3 };

struct Common {
    std::string mode_flag;
    bool json = false;
    bool pretty = false;
};

struct Failure {
    int code;
};

Mode resolve_mode(const Common& c) {
    std::string m = c.mode_flag;
    if (m.empty())
        if (const char* env = std::getenv("MQUERY_MODE")) m = env;
    return m == "unordered" ? Mode::Unordered : Mode::Ordered;
}

[[noreturn]] void fail(const Common& c, int code, const std::string& kind, const std::string& message,
                       const std::vector<ParseIssue>& issues = {}) {
    if (c.json) {
        DValue issues_v;
        JsonError err;
        parse_json(issues_to_json(issues), issues_v, err);
        std::cerr << to_json(DValue(Object{{"error", DValue(kind)}, {"message", DValue(message)}, {"issues", issues_v}}))
                  << "\n";
    } else {
        std::cerr << "mquery: " << message << "\n";
        for (const auto& i : issues)
            std::cerr << "  " << issue_kind_name(i.kind) << " at " << (i.location.empty() ? "/" : i.location) << ": "
                      << i.message << "\n";
    }
    throw Failure{code};
}

std::string read_or_fail(const Common& c, const std::string& path) {
    std::string text;
    if (!read_file(path, text)) fail(c, kIo, "io", "cannot read " + path);
    return text;
}

Query load_query(const Common& c, const std::string& path) {
    std::vector<ParseIssue> issues;
    auto q = parse_query(read_or_fail(c, path), issues);
    if (!q) fail(c, kInvalid, "parse", "invalid query in " + path, issues);
    return *q;
}

DatabaseInstance load_db(const Common& c, const std::vector<std::string>& paths) {
    DatabaseInstance db;
    for (const auto& p : paths) {
        std::vector<ParseIssue> issues;
        auto part = load_instance(read_or_fail(c, p), issues);
        if (!part) fail(c, kInvalid, "parse", "invalid instance in " + p, issues);
        for (auto& [name, docs] : part->collections) db.collections[name] = std::move(docs);
    }
    return db;
}

void print(const DValue& v, Mode mode, bool pretty) { std::cout << to_json(v, mode, pretty) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluate, optimize and test document-database pipelines"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--mode", common.mode_flag, "object semantics")->check(CLI::IsMember({"ordered", "unordered"}));
    app.add_flag("--json", common.json, "machine-readable diagnostics on stderr");

    std::vector<std::string> db_files;
    std::string query_file;

    auto* eval = app.add_subcommand("eval", "evaluate a query over an instance");
    eval->add_option("--db", db_files, "instance file (repeatable)")->required();
    eval->add_option("--query", query_file, "query file")->required();
    eval->add_flag("--pretty", common.pretty, "indent output");

    bool trace = false;
    auto* opt = app.add_subcommand("optimize", "normalize a query with the rewrite rules");
    opt->add_option("--query", query_file, "query file")->required();
    opt->add_flag("--trace", trace, "also print the rewrite trace");
    opt->add_flag("--pretty", common.pretty, "indent output");

    std::string q1_file, q2_file;
    long long seeds = -1;
    auto* equiv = app.add_subcommand("equiv", "check two queries for bag equality");
    equiv->add_option("--q1", q1_file, "first query")->required();
    equiv->add_option("--q2", q2_file, "second query")->required();
    auto* equiv_db = equiv->add_option("--db", db_files, "instance file (repeatable)");
    auto* equiv_seeds = equiv->add_option("--seeds", seeds, "number of generated instances");
    equiv_db->excludes(equiv_seeds);
    equiv->add_flag("--pretty", common.pretty, "indent output");

    long long fuzz_seeds = 1000;
    long long first_seed = 0;
    std::string rules = "all";
    bool serial = false;
    auto* fuzz = app.add_subcommand("fuzz", "differential soundness campaign for the rewrite rules");
    fuzz->add_option("--seeds", fuzz_seeds, "seeds per rule");
    fuzz->add_option("--first-seed", first_seed, "first seed");
    fuzz->add_option("--rules", rules, "rule family")->check(CLI::IsMember({"all", "match", "unwind", "project", "lookup"}));
    fuzz->add_flag("--serial", serial, "single-threaded");
    fuzz->add_flag("--pretty", common.pretty, "indent output");

    std::string corpus = "corpus";
    auto* golden = app.add_subcommand("golden", "run the golden corpus");
    golden->add_option("--corpus", corpus, "corpus directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    try {
        Mode mode = resolve_mode(common);
        if (*eval) {
            DatabaseInstance db = load_db(common, db_files);
            Query q = load_query(common, query_file);
            EvalOptions o;
            o.mode = mode;
            Collection r = eval_query(db, q, o);
            print(DValue(Array(r.begin(), r.end())), mode, common.pretty);
            return kOk;
        }
        if (*opt) {
            Query q = load_query(common, query_file);
            NormalizeResult n = normalize(q, mode);
            if (trace)
                print(DValue(Object{{"query", query_to_value(n.query)}, {"trace", trace_to_value(n.trace)}}),
                      Mode::Ordered, common.pretty);
            else
                print(query_to_value(n.query), Mode::Ordered, common.pretty);
            return kOk;
        }
        if (*equiv) {
            Query q1 = load_query(common, q1_file);
            Query q2 = load_query(common, q2_file);
            std::vector<DatabaseInstance> instances;
            if (!db_files.empty()) {
                instances.push_back(load_db(common, db_files));
            } else {
                if (seeds < 1) fail(common, kInvalid, "validation", "--seeds must be at least 1 (or pass --db)");
                if (!is_core(q1) || !is_core(q2))
                    fail(common, kInvalid, "validation", "generated-instance checks need core-fragment queries");
                for (long long s = 0; s < seeds; ++s) {
                    GenParams p;
                    p.seed = static_cast<std::uint64_t>(s);
                    instances.push_back(gen_instance(p));
                }
            }
            EquivReport r = check_equiv(q1, q2, instances, mode);
            print(report_to_value(r), Mode::Ordered, common.pretty);
            return r.equal ? kOk : kMismatch;
        }
        if (*fuzz) {
            if (fuzz_seeds < 1) fail(common, kInvalid, "validation", "--seeds must be at least 1");
            FuzzSummary s = fuzz_rules(static_cast<std::uint64_t>(first_seed), static_cast<std::size_t>(fuzz_seeds),
                                       rules_for_family(rules), mode, !serial);
            print(fuzz_to_value(s), Mode::Ordered, common.pretty);
            return s.ok() ? kOk : kMismatch;
        }
        if (*golden) {
            std::string error;
            auto cases = load_golden_manifest(corpus, error);
            if (!error.empty()) fail(common, kIo, "io", error);
            bool all = true;
            Array report;
            for (const auto& c : cases) {
                GoldenResult r = run_golden_case(corpus, c);
                all = all && r.passed;
                if (common.json)
                    report.emplace_back(Object{{"name", DValue(r.name)}, {"passed", DValue(r.passed)}, {"detail", DValue(r.detail)}});
                else
                    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << (r.passed ? "" : ": " + r.detail) << "\n";
            }
            if (common.json) print(DValue(std::move(report)), Mode::Ordered, false);
            return all ? kOk : kMismatch;
        }
    } catch (const Failure& f) {
        return f.code;
    }
    return kOk;
}
