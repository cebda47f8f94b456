#include <gtest/gtest.h>

#include "mquery/harness.hpp"
#include "mquery/optimizer.hpp"
#include "util.hpp"

using namespace mquery;
using testutil::Q;

namespace {

const char* kBandsDir = MQUERY_CORPUS_DIR;

DatabaseInstance bands() {
    std::string text;
    EXPECT_TRUE(read_file(std::string(kBandsDir) + "/fixtures/bands.json", text));
    return testutil::DB(text);
}

std::string kinds(const Query& q) {
    std::string s;
    for (const auto& st : q.stages) s += std::string(stage_name(st.kind)) + " ";
    return s;
}

}  // namespace

TEST(Catalog, SixteenRulesInFourFamilies) {
    EXPECT_EQ(rule_catalog().size(), 16u);
    for (const auto& r : rule_catalog()) {
        EXPECT_TRUE(r.family == "match" || r.family == "unwind" || r.family == "project" || r.family == "lookup") << r.id;
        EXPECT_EQ(find_rule(r.id), &r);
    }
}

TEST(Rules, MatchMerge) {
    auto q = Q(R"({"collection":"c","pipeline":[{"$match":{"$exists":"$a"}},{"$match":{"$exists":"$b"}}]})");
    auto r = apply_rule(q, "match.merge", 0, Mode::Ordered);
    ASSERT_TRUE(r);
    ASSERT_EQ(r->stages.size(), 1u);
    EXPECT_EQ(conjuncts(r->stages[0].cond).size(), 2u);
}

TEST(Rules, UnwindPastMatchSplitsConjunction) {
    auto q = Q(R"({"collection":"bands","pipeline":[{"$unwind":"$albums"},
        {"$match":{"$and":[{"$eq":["$name","ABBA"]},{"$gt":["$albums.release",1974]}]}}]})");
    auto r = apply_rule(q, "unwind.past-match", 0, Mode::Ordered);
    ASSERT_TRUE(r);
    EXPECT_EQ(kinds(*r), "match unwind match ");
    auto db = bands();
    EXPECT_TRUE(check_equiv(q, *r, {db}, Mode::Ordered).equal);
}

TEST(Rules, UnwindPastMatchBlockedByPrefix) {
    auto q = Q(R"({"collection":"bands","pipeline":[{"$unwind":"$albums"},{"$match":{"$gt":["$albums.release",1975]}}]})");
    EXPECT_FALSE(apply_rule(q, "unwind.past-match", 0, Mode::Ordered));
}

TEST(Rules, GroupPastMatchRenamesId) {
    auto q = Q(R"({"collection":"c","pipeline":[{"$group":{"_id":"g","collect":["v"]}},{"$match":{"$eq":["$_id",1]}}]})");
    auto r = apply_rule(q, "group.past-match", 0, Mode::Ordered);
    ASSERT_TRUE(r);
    EXPECT_EQ(paths_of_bool(*r->stages[0].cond), PathSet{Path::of("g")});
    auto db = testutil::DB(R"({"c":[{"_id":1,"g":1,"v":1},{"_id":2,"g":2,"v":2},{"_id":3,"g":1,"v":3}]})");
    EXPECT_TRUE(check_equiv(q, *r, {db}, Mode::Ordered).equal);
}

TEST(Rules, UnwindPastUnwindNeedsCompatiblePaths) {
    auto bad = Q(R"({"collection":"c","pipeline":[{"$unwind":"$a.b"},{"$unwind":"$a"}]})");
    EXPECT_FALSE(apply_rule(bad, "unwind.past-unwind", 0, Mode::Ordered));
    auto ok = Q(R"({"collection":"c","pipeline":[{"$unwind":"$a"},{"$unwind":"$b"}]})");
    EXPECT_TRUE(apply_rule(ok, "unwind.past-unwind", 0, Mode::Ordered));
}

TEST(Rules, UnwindProjectSwapNeedsStrictIdlePrefix) {
    auto exact = Q(R"({"collection":"c","pipeline":[{"$unwind":"$a"},{"$project":{"a":1}}]})");
    EXPECT_FALSE(apply_rule(exact, "unwind.past-project", 0, Mode::Ordered));
    auto db = testutil::DB(R"({"c":[{"_id":1,"a":[1,null]}]})");
    auto swapped = Q(R"({"collection":"c","pipeline":[{"$project":{"a":1}},{"$unwind":"$a"}]})");
    EXPECT_FALSE(check_equiv(exact, swapped, {db}, Mode::Ordered).equal);
    EXPECT_FALSE(apply_rule(swapped, "project.past-unwind", 0, Mode::Ordered));

    auto below = Q(R"({"collection":"bands","pipeline":[{"$unwind":"$albums.title"},{"$project":{"albums":1}}]})");
    auto r = apply_rule(below, "unwind.past-project", 0, Mode::Ordered);
    ASSERT_TRUE(r);
    EXPECT_EQ(kinds(*r), "project unwind ");
    auto nulls = testutil::DB(R"({"bands":[{"_id":1,"albums":{"title":[null,"x"]}}]})");
    EXPECT_TRUE(check_equiv(below, *r, {nulls, bands()}, Mode::Ordered).equal);
}

TEST(Rules, ProjectMergeAndPastGroup) {
    auto q = Q(R"({"collection":"c","pipeline":[{"$project":{"a":1,"b":1}},{"$project":{"x":"$a"}}]})");
    auto r = apply_rule(q, "project.merge", 0, Mode::Ordered);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->stages.size(), 1u);
    auto blocked = Q(R"({"collection":"c","pipeline":[{"$project":{"a":"$b"}},{"$project":{"x":"$a"}}]})");
    EXPECT_FALSE(apply_rule(blocked, "project.merge", 0, Mode::Ordered));
    auto g = Q(R"({"collection":"c","pipeline":[{"$project":{"g":1,"v":1}},{"$group":{"_id":"g","collect":["v"]}}]})");
    EXPECT_TRUE(apply_rule(g, "project.past-group", 0, Mode::Ordered));
}

TEST(Rules, UnorderedOnlyRulesAreGated) {
    auto q = Q(R"({"collection":"c","pipeline":[
        {"$lookup":{"pipeline":{"collection":"d","pipeline":[]},"as":"x"}},
        {"$lookup":{"pipeline":{"collection":"d","pipeline":[]},"as":"y"}}]})");
    EXPECT_FALSE(apply_rule(q, "lookup.past-lookup", 0, Mode::Ordered));
    EXPECT_TRUE(apply_rule(q, "lookup.past-lookup", 0, Mode::Unordered));
}

TEST(Normalize, TwoMatchesMergeInOneStep) {
    auto q = Q(R"({"collection":"c","pipeline":[{"$match":{"$exists":"$a"}},{"$match":{"$exists":"$b"}}]})");
    auto n = normalize(q, Mode::Ordered);
    EXPECT_EQ(n.query.stages.size(), 1u);
    ASSERT_EQ(n.trace.size(), 1u);
    EXPECT_EQ(n.trace[0].rule, "match.merge");
}

TEST(Normalize, NonCoreQueryUntouched) {
    auto q = Q(R"({"collection":"c","pipeline":[{"$sort":{"a":1}},{"$limit":2}]})");
    auto n = normalize(q, Mode::Ordered);
    EXPECT_TRUE(n.trace.empty());
    EXPECT_TRUE(equal(n.query, q));
}

TEST(Normalize, PushesMatchesUpstreamAndReplays) {
    auto q = Q(R"({"collection":"bands","pipeline":[{"$unwind":"$albums"},{"$project":{"name":1,"album":"$albums"}},
        {"$match":{"$eq":["$name","ABBA"]}}]})");
    auto n = normalize(q, Mode::Ordered);
    EXPECT_FALSE(n.hit_ceiling);
    EXPECT_EQ(n.query.stages.front().kind, Stage::Kind::Match);
    auto again = normalize(n.query, Mode::Ordered);
    EXPECT_TRUE(again.trace.empty());
    auto replayed = replay(q, n.trace, Mode::Ordered);
    ASSERT_TRUE(replayed);
    EXPECT_TRUE(equal(*replayed, n.query));
    EXPECT_TRUE(check_equiv(q, n.query, {bands()}, Mode::Ordered).equal);
}

TEST(Normalize, SeededQueriesStaySound) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        GenParams p;
        p.seed = s;
        Query q = gen_query(p, core_families());
        auto n = normalize(q, Mode::Ordered);
        ASSERT_FALSE(n.hit_ceiling);
        std::vector<DatabaseInstance> inst;
        for (std::uint64_t k = 0; k < 3; ++k) {
            GenParams ip;
            ip.seed = s * 31 + k;
            inst.push_back(gen_instance(ip));
        }
        auto rep = check_equiv(q, n.query, inst, Mode::Ordered);
        EXPECT_TRUE(rep.equal) << print_query(q) << "\n=> " << print_query(n.query);
    }
}
