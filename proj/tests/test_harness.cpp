#include <gtest/gtest.h>

#include "mquery/harness.hpp"
#include "util.hpp"

using namespace mquery;
using testutil::Q;

TEST(Generator, Deterministic) {
    GenParams p;
    p.seed = 0;
    EXPECT_EQ(to_json(instance_to_value(gen_instance(p))), to_json(instance_to_value(gen_instance(p))));
    p.seed = 1;
    EXPECT_EQ(print_query(gen_query(p, core_families())), print_query(gen_query(p, core_families())));
}

TEST(Generator, DepthZeroIsFlat) {
    GenParams p;
    p.max_depth = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        p.seed = s;
        for (const auto& [name, docs] : gen_instance(p).collections)
            for (const auto& d : docs)
                for (const auto& [k, v] : d.as_object()) EXPECT_TRUE(v.is_literal()) << name << "." << k;
    }
}

TEST(Generator, InstancesLoadAndQueriesValidate) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        GenParams p;
        p.seed = s;
        std::vector<ParseIssue> issues;
        auto db = gen_instance(p);
        EXPECT_TRUE(load_instance(to_json(instance_to_value(db)), issues).has_value()) << issues_to_json(issues);
        auto q = gen_query(p, core_families());
        EXPECT_TRUE(validate(q).empty()) << print_query(q);
        EXPECT_TRUE(is_core(q));
    }
}

TEST(Generator, FamilyRestriction) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        GenParams p;
        p.seed = s;
        for (const auto& st : gen_query(p, {Family::Match}).stages) EXPECT_EQ(st.kind, Stage::Kind::Match);
    }
}

TEST(Equiv, SameQueryAndCommutingMatches) {
    auto a = Q(R"({"collection":"c0","pipeline":[{"$match":{"$exists":"$a"}},{"$match":{"$lte":["$b",1]}}]})");
    auto b = Q(R"({"collection":"c0","pipeline":[{"$match":{"$lte":["$b",1]}},{"$match":{"$exists":"$a"}}]})");
    std::vector<DatabaseInstance> inst;
    for (std::uint64_t s = 0; s < 100; ++s) {
        GenParams p;
        p.seed = s;
        inst.push_back(gen_instance(p));
    }
    EXPECT_TRUE(check_equiv(a, a, inst, Mode::Ordered).equal);
    EXPECT_TRUE(check_equiv(a, b, inst, Mode::Ordered).equal);
}

TEST(Equiv, BoundaryCounterexampleReplays) {
    auto a = Q(R"({"collection":"c","pipeline":[{"$match":{"$lte":["$a",1]}}]})");
    auto b = Q(R"({"collection":"c","pipeline":[{"$match":{"$lt":["$a",1]}}]})");
    auto db = testutil::DB(R"({"c":[{"_id":1,"a":0},{"_id":2,"a":1}]})");
    auto r = check_equiv(a, b, {db}, Mode::Ordered);
    ASSERT_FALSE(r.equal);
    EXPECT_EQ(to_json(r.witness), R"({"_id":2,"a":1})");
    EXPECT_EQ(r.left_count, 1u);
    EXPECT_EQ(r.right_count, 0u);
    auto back = report_from_value(testutil::J(to_json(report_to_value(r))));
    ASSERT_TRUE(back);
    auto again = replay_report(*back);
    EXPECT_FALSE(again.equal);
    EXPECT_EQ(to_json(report_to_value(again)), to_json(report_to_value(r)));
}

TEST(Equiv, BagEqualityIgnoresOrderButNotMultiplicity) {
    Collection a = testutil::C(R"([{"x":1},{"x":2},{"x":1}])");
    Collection b = testutil::C(R"([{"x":2},{"x":1},{"x":1}])");
    Collection c = testutil::C(R"([{"x":2},{"x":1},{"x":2}])");
    EXPECT_TRUE(bag_equal(a, b, Mode::Ordered));
    EXPECT_FALSE(bag_equal(a, c, Mode::Ordered));
}

TEST(Golden, CorpusPasses) {
    for (const auto& r : run_golden_corpus(MQUERY_CORPUS_DIR)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Oracle, AgreesWithEngineOnSmallInstances) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        GenParams p;
        p.seed = s;
        p.max_docs = 4;
        auto db = gen_instance(p);
        auto q = gen_query(p, all_families());
        EvalOptions o;
        auto engine = eval_query(db, q, o);
        auto oracle = oracle_eval_query(db, q, Mode::Ordered);
        EXPECT_TRUE(bag_equal(engine, oracle, Mode::Ordered)) << print_query(q);
    }
}

TEST(Fuzz, SerialAndParallelAgree) {
    auto rules = rules_for_family("match");
    auto a = fuzz_rules(0, 60, rules, Mode::Ordered, false);
    auto b = fuzz_rules(0, 60, rules, Mode::Ordered, true);
    EXPECT_EQ(to_json(fuzz_to_value(a)), to_json(fuzz_to_value(b)));
    EXPECT_TRUE(a.ok());
}

TEST(Fuzz, FamilySelection) {
    EXPECT_EQ(rules_for_family("all").size(), rule_catalog().size());
    for (const auto& id : rules_for_family("lookup")) EXPECT_EQ(find_rule(id)->family, "lookup");
}
