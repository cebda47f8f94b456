#include <gtest/gtest.h>

#include "mquery/harness.hpp"
#include "mquery/syntax.hpp"
#include "util.hpp"

using namespace mquery;
using testutil::J;
using testutil::Q;

namespace {

std::vector<ParseIssue> issues_of(const std::string& text) {
    std::vector<ParseIssue> issues;
    auto q = parse_query(text, issues);
    EXPECT_FALSE(q.has_value());
    return issues;
}

bool has_issue_at(const std::vector<ParseIssue>& issues, const std::string& at, ParseIssue::Kind k) {
    for (const auto& i : issues)
        if (i.location == at && i.kind == k) return true;
    return false;
}

}  // namespace

TEST(Parse, StageForms) {
    auto q = Q(R"({"collection":"c","pipeline":[
        {"$match":{"$and":[{"$exists":"$a"},{"$not":{"$eq":["$b",1]}}]}},
        {"$unwind":"$a"},
        {"$project":{"a":1,"b":"$c.d","e":{"$literal":0}}},
        {"$group":{"_id":"a","collect":["b"]}},
        {"$lookup":{"let":{"x":"$a"},"pipeline":{"collection":"d","pipeline":[]},"as":"out"}},
        {"$graphLookup":{"from":"d","startWith":"$a","connectFromField":"f","connectToField":"t","as":"g"}},
        {"$unionWith":{"collection":"d","pipeline":[]}},
        {"$sort":{"a":1,"b":-1}},
        {"$skip":1},
        {"$limit":2},
        {"$count":"n"}]})");
    ASSERT_EQ(q.stages.size(), 11u);
    EXPECT_EQ(q.stages[2].defs.size(), 3u);
    EXPECT_TRUE(q.stages[2].defs[0].idle());
    EXPECT_EQ(q.stages[3].group_key.value(), "a");
    EXPECT_EQ(q.stages[7].order.size(), 2u);
    EXPECT_FALSE(q.stages[7].order[1].ascending);
}

TEST(Parse, SyntaxErrorsCarryPointers) {
    auto is = issues_of(R"({"collection":"c","pipeline":[{"$match":{"$eq":["$a"]}}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/0/$match/$eq", ParseIssue::Kind::Syntax));
    is = issues_of(R"({"collection":"c","pipeline":[{"$bogus":1}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/0", ParseIssue::Kind::Syntax));
    is = issues_of(R"({"collection":"c","pipeline":[{"$project":{"a":{"$eq":[1,1]}}}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/0/$project/a", ParseIssue::Kind::Syntax));
    is = issues_of(R"({"collection":"c","pipeline":[{"$limit":0}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/0/$limit", ParseIssue::Kind::Validation));
    is = issues_of("{not json");
    EXPECT_FALSE(is.empty());
}

TEST(Validate, IncompatibleProjectPaths) {
    auto is = issues_of(R"({"collection":"c","pipeline":[{"$project":{"a":1,"a.b":"$x"}}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/0/$project/a.b", ParseIssue::Kind::Validation));
}

TEST(Validate, IdInCollect) {
    auto is = issues_of(R"({"collection":"c","pipeline":[{"$unwind":"$a"},{"$group":{"_id":"g","collect":["v","_id"]}}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/1/$group/collect/1", ParseIssue::Kind::Validation));
}

TEST(Validate, UnboundVariableInTemplate) {
    auto is = issues_of(
        R"({"collection":"c","pipeline":[{"$lookup":{"let":{"x":"$a"},"pipeline":{"collection":"d","pipeline":[{"$match":{"$eq":["$$y",1]}}]},"as":"o"}}]})");
    EXPECT_TRUE(has_issue_at(is, "/pipeline/0/$lookup/pipeline/pipeline/0/$match", ParseIssue::Kind::Validation));
}

TEST(Validate, AstBuiltByHand) {
    Query q{"c", {stage::group(std::string("g"), {"_id"})}};
    auto is = validate(q);
    ASSERT_EQ(is.size(), 1u);
    EXPECT_EQ(is[0].location, "/pipeline/0/$group/collect/0");
}

TEST(Print, RoundTripIsIdentity) {
    const char* texts[] = {
        R"({"collection":"c","pipeline":[{"$match":{"$or":[{"$lt":["$a",1]},{"$gte":["$b","$c"]}]}}]})",
        R"({"collection":"c","pipeline":[{"$project":{"a":1,"z":0.5,"k":{"$literal":1},"t":{"$literal":true},"s":{"$literal":"$x"},"o":{"$object":{"p":[1,"$q"]}}}}]})",
        R"({"collection":"c","pipeline":[{"$project":{"m":{"$map":{"input":"$a","as":"x","in":{"$cond":{"if":{"$in":["$$x","$b"]},"then":"$$x.k","else":null}}}}}}]})",
        R"({"collection":"c","pipeline":[{"$lookup":{"let":{"x":"$a"},"pipeline":{"collection":"d","pipeline":[{"$match":{"$ne":["$$x","$y"]}}]},"as":"o.p"}}]})",
        R"({"collection":"c","pipeline":[{"$sort":{"a":-1}},{"$limit":3},{"$count":"n"}]})",
    };
    for (const char* t : texts) {
        Query q = Q(t);
        Query back = Q(print_query(q));
        EXPECT_TRUE(equal(q, back)) << t << "\n" << print_query(q);
        EXPECT_EQ(print_query(back), print_query(q));
    }
}

TEST(Print, GeneratedQueriesRoundTrip) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        GenParams p;
        p.seed = s;
        Query q = gen_query(p, all_families());
        std::vector<ParseIssue> issues;
        auto back = parse_query(print_query(q), issues);
        ASSERT_TRUE(back.has_value()) << print_query(q) << issues_to_json(issues);
        EXPECT_TRUE(equal(q, *back)) << print_query(q);
    }
}

TEST(Instance, RequiresUniqueIds) {
    std::vector<ParseIssue> issues;
    EXPECT_FALSE(load_instance(R"({"c":[{"_id":1},{"_id":1}]})", issues).has_value());
    EXPECT_FALSE(issues.empty());
    issues.clear();
    EXPECT_FALSE(load_instance(R"({"c":[{"a":1}]})", issues).has_value());
    issues.clear();
    EXPECT_TRUE(load_instance(R"({"c":[{"_id":1},{"_id":2}],"d":[]})", issues).has_value());
}
