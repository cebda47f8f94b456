#include <algorithm>
#include <fstream>
#include <sstream>

#include "mquery/harness.hpp"
#include "mquery/json_io.hpp"
#include "mquery/syntax.hpp"

namespace mquery {

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

bool bag_equal(const Collection& a, const Collection& b, Mode mode, DValue* witness, std::size_t* a_count,
               std::size_t* b_count) {
    NaturalLess less{mode};
    Collection x = a, y = b;
    std::sort(x.begin(), x.end(), less);
    std::sort(y.begin(), y.end(), less);
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        // Smallest remaining document and its multiplicity on each side.
        const DValue& d = (j >= y.size() || (i < x.size() && !less(y[j], x[i]))) ? x[i] : y[j];
        std::size_t ci = 0, cj = 0;
        while (i < x.size() && mode_equal(x[i], d, mode)) ++i, ++ci;
        while (j < y.size() && mode_equal(y[j], d, mode)) ++j, ++cj;
        if (ci != cj) {
            if (witness) *witness = d;
            if (a_count) *a_count = ci;
            if (b_count) *b_count = cj;
            return false;
        }
    }
    return true;
}

EquivReport check_equiv(const Query& q1, const Query& q2, const std::vector<DatabaseInstance>& instances, Mode mode) {
    EquivReport r;
    r.mode = mode;
    r.q1 = q1;
    r.q2 = q2;
    EvalOptions opt;
    opt.mode = mode;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        Collection left = eval_query(instances[i], q1, opt);
        Collection right = eval_query(instances[i], q2, opt);
        DValue w;
        std::size_t lc = 0, rc = 0;
        if (!bag_equal(left, right, mode, &w, &lc, &rc)) {
            r.equal = false;
            r.instance_index = i;
            r.instance = instances[i];
            r.left = std::move(left);
            r.right = std::move(right);
            r.witness = w;
            r.left_count = lc;
            r.right_count = rc;
            return r;
        }
    }
    return r;
}

DValue report_to_value(const EquivReport& r) {
    Object o{{"verdict", DValue(r.equal ? "equal" : "counterexample")},
             {"mode", DValue(mode_name(r.mode))},
             {"q1", query_to_value(r.q1)},
             {"q2", query_to_value(r.q2)}};
    if (!r.equal) {
        o.emplace_back("instance", instance_to_value(r.instance));
        o.emplace_back("left", DValue(Array(r.left.begin(), r.left.end())));
        o.emplace_back("right", DValue(Array(r.right.begin(), r.right.end())));
        o.emplace_back("witness", r.witness);
        o.emplace_back("left_count", DValue(r.left_count));
        o.emplace_back("right_count", DValue(r.right_count));
    }
    return DValue(std::move(o));
}

std::optional<EquivReport> report_from_value(const DValue& v) {
    if (!v.is_object()) return std::nullopt;
    const DValue* verdict = v.find("verdict");
    const DValue* mode = v.find("mode");
    const DValue* q1 = v.find("q1");
    const DValue* q2 = v.find("q2");
    if (!verdict || !mode || !q1 || !q2 || !verdict->is_string() || !mode->is_string()) return std::nullopt;
    std::vector<ParseIssue> issues;
    auto p1 = parse_query_value(*q1, issues);
    auto p2 = parse_query_value(*q2, issues);
    if (!p1 || !p2) return std::nullopt;
    EquivReport r;
    r.equal = verdict->as_string() == "equal";
    r.mode = mode->as_string() == "unordered" ? Mode::Unordered : Mode::Ordered;
    r.q1 = *p1;
    r.q2 = *p2;
    if (!r.equal) {
        const DValue* inst = v.find("instance");
        if (!inst) return std::nullopt;
        auto db = load_instance(to_json(*inst), issues);
        if (!db) return std::nullopt;
        r.instance = *db;
        auto coll = [&](const char* k) {
            Collection c;
            if (const DValue* a = v.find(k); a && a->is_array()) c.assign(a->as_array().begin(), a->as_array().end());
            return c;
        };
        r.left = coll("left");
        r.right = coll("right");
        if (const DValue* w = v.find("witness")) r.witness = *w;
        if (const DValue* c = v.find("left_count"); c && c->is_number()) r.left_count = static_cast<std::size_t>(c->as_number());
        if (const DValue* c = v.find("right_count"); c && c->is_number()) r.right_count = static_cast<std::size_t>(c->as_number());
    }
    return r;
}

EquivReport replay_report(const EquivReport& r) { return check_equiv(r.q1, r.q2, {r.instance}, r.mode); }

}  // namespace mquery
