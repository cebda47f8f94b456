#include "mquery/harness.hpp"
#include "mquery/json_io.hpp"
#include "mquery/syntax.hpp"

namespace mquery {

namespace {

std::string join(const std::string& dir, const std::string& rel) { return dir.empty() ? rel : dir + "/" + rel; }

bool load_db(const std::string& dir, const std::vector<std::string>& files, DatabaseInstance& db, std::string& err) {
    for (const auto& f : files) {
        std::string text;
        if (!read_file(join(dir, f), text)) {
            err = "cannot read " + f;
            return false;
        }
        std::vector<ParseIssue> issues;
        auto part = load_instance(text, issues);
        if (!part) {
            err = f + ": " + issues_to_json(issues);
            return false;
        }
        for (auto& [name, docs] : part->collections) db.collections[name] = std::move(docs);
    }
    return true;
}

}  // namespace

std::vector<GoldenCase> load_golden_manifest(const std::string& corpus_dir, std::string& error) {
    std::vector<GoldenCase> out;
    std::string text;
    if (!read_file(join(corpus_dir, "MANIFEST.json"), text)) {
        error = "cannot read MANIFEST.json in " + corpus_dir;
        return out;
    }
    DValue v;
    JsonError err;
    if (!parse_json(text, v, err)) {
        error = "MANIFEST.json" + err.pointer + ": " + err.message;
        return out;
    }
    const DValue* cases = v.find("cases");
    if (!cases || !cases->is_array()) {
        error = "MANIFEST.json: missing \"cases\" array";
        return out;
    }
    for (const auto& c : cases->as_array()) {
        GoldenCase g;
        auto str = [&](const char* k) {
            const DValue* s = c.find(k);
            return s && s->is_string() ? s->as_string() : std::string();
        };
        g.name = str("name");
        g.query_file = str("query");
        g.expected_file = str("expected");
        g.note = str("note");
        g.mode = str("mode") == "unordered" ? Mode::Unordered : Mode::Ordered;
        if (const DValue* fx = c.find("fixtures"); fx && fx->is_array())
            for (const auto& f : fx->as_array())
                if (f.is_string()) g.fixtures.push_back(f.as_string());
        if (g.name.empty() || g.query_file.empty() || g.expected_file.empty()) {
            error = "MANIFEST.json: incomplete case entry";
            return {};
        }
        out.push_back(std::move(g));
    }
    return out;
}

GoldenResult run_golden_case(const std::string& corpus_dir, const GoldenCase& c) {
    GoldenResult r;
    r.name = c.name;
    DatabaseInstance db;
    if (!load_db(corpus_dir, c.fixtures, db, r.detail)) return r;
    std::string qtext, etext;
    if (!read_file(join(corpus_dir, c.query_file), qtext) || !read_file(join(corpus_dir, c.expected_file), etext)) {
        r.detail = "cannot read query or expected file";
        return r;
    }
    std::vector<ParseIssue> issues;
    auto q = parse_query(qtext, issues);
    if (!q) {
        r.detail = "query: " + issues_to_json(issues);
        return r;
    }
    DValue expected;
    JsonError err;
    if (!parse_json(etext, expected, err) || !expected.is_array()) {
        r.detail = "expected file is not a JSON array";
        return r;
    }
    r.expected.assign(expected.as_array().begin(), expected.as_array().end());
    EvalOptions opt;
    opt.mode = c.mode;
    r.actual = eval_query(db, *q, opt);
    auto canon = [&](const DValue& d) { return c.mode == Mode::Unordered ? canonicalize(d) : d; };
    if (r.actual.size() != r.expected.size()) {
        r.detail = "expected " + std::to_string(r.expected.size()) + " documents, got " + std::to_string(r.actual.size());
        return r;
    }
    for (std::size_t i = 0; i < r.actual.size(); ++i) {
        if (!identical(canon(r.actual[i]), canon(r.expected[i]))) {
            r.detail = "document " + std::to_string(i) + ": expected " + to_json(r.expected[i], c.mode) + ", got " +
                       to_json(r.actual[i], c.mode);
            return r;
        }
    }
    r.passed = true;
    return r;
}

std::vector<GoldenResult> run_golden_corpus(const std::string& corpus_dir) {
    std::string error;
    auto cases = load_golden_manifest(corpus_dir, error);
    std::vector<GoldenResult> out;
    if (!error.empty()) {
        out.push_back(GoldenResult{"MANIFEST", false, error, {}, {}});
        return out;
    }
    for (const auto& c : cases) out.push_back(run_golden_case(corpus_dir, c));
    return out;
}

}  // namespace mquery
