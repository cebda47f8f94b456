#include <gtest/gtest.h>

#include "mquery/dvalue.hpp"
#include "util.hpp"

using namespace mquery;
using testutil::J;

TEST(DValue, CrossKindOrder) {
    std::vector<DValue> v = {DValue(), DValue(false), DValue(3), DValue("a"), J(R"({"a":1})"), J("[1]")};
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        for (Mode m : {Mode::Ordered, Mode::Unordered}) EXPECT_EQ(natural_compare(v[i], v[i + 1], m), Ord::LT);
}

TEST(DValue, ModeEquality) {
    DValue a = J(R"({"x":1,"y":2})"), b = J(R"({"y":2,"x":1})");
    EXPECT_FALSE(mode_equal(a, b, Mode::Ordered));
    EXPECT_TRUE(mode_equal(a, b, Mode::Unordered));
    EXPECT_FALSE(identical(a, b));
}

TEST(DValue, ArraysCompareLexicographically) {
    EXPECT_EQ(natural_compare(J("[1,2]"), J("[1,3]"), Mode::Ordered), Ord::LT);
    EXPECT_EQ(natural_compare(J("[1]"), J("[1,0]"), Mode::Ordered), Ord::LT);
    EXPECT_EQ(natural_compare(J("[]"), J("[null]"), Mode::Ordered), Ord::LT);
}

TEST(DValue, NegativeZeroIsZero) { EXPECT_TRUE(identical(DValue(-0.0), DValue(0))); }

TEST(Path, ParseAndPrint) {
    Path p;
    ASSERT_TRUE(Path::parse("a.0.b", p));
    EXPECT_EQ(p.size(), 3u);
    EXPECT_FALSE(p.index_free());
    EXPECT_EQ(p.str(), "a.0.b");
    EXPECT_FALSE(Path::parse("a..b", p));
    EXPECT_EQ(Path::of("a.0.b").truncate_at_index(), Path::of("a"));
}

TEST(Path, Evaluation) {
    DValue o = J(R"({"a":{"b":[10,{"c":5}]}})");
    EXPECT_TRUE(identical(eval_path(o, Path::of("a.b.1.c")), DValue(5)));
    EXPECT_TRUE(eval_path(o, Path::of("a.b.c")).is_null());
    EXPECT_TRUE(eval_path(o, Path::of("a.b.7")).is_null());
    EXPECT_TRUE(identical(eval_path(o, Path()), o));
}

TEST(Path, Compatibility) {
    PathSet s = {Path::of("a.b"), Path::of("c")};
    EXPECT_FALSE(is_compatible(Path::of("a"), s));
    EXPECT_FALSE(is_compatible(Path::of("a.b.c"), s));
    EXPECT_TRUE(is_compatible(Path::of("a.d"), s));
    EXPECT_TRUE(in_extensions(Path::of("c.x"), s));
    EXPECT_FALSE(in_extensions(Path::of("a"), s));
}

TEST(Path, OverrideAndMerge) {
    DValue o = J(R"({"a":{"b":1,"c":2},"d":3})");
    EXPECT_EQ(to_json(override_path(o, Path::of("a.b"), DValue(9))), R"({"a":{"b":9,"c":2},"d":3})");
    EXPECT_EQ(to_json(merge_pair(o, Path::of("a.e"), DValue(4))), R"({"a":{"b":1,"c":2,"e":4},"d":3})");
    EXPECT_EQ(to_json(merge_or_override(o, Path::of("d"), J("[]"))), R"({"a":{"b":1,"c":2},"d":[]})");
    EXPECT_EQ(to_json(merge_pair(o, Path::of("x.y"), DValue())), to_json(o));
    EXPECT_THROW(override_path(o, Path::of("q"), DValue(1)), std::logic_error);
}

TEST(Json, RoundTripAndCanonicalOutput) {
    DValue v = J(R"({"b":[1,2.5,"s",null,true],"a":{"z":1,"y":2}})");
    EXPECT_EQ(to_json(v), R"({"b":[1,2.5,"s",null,true],"a":{"z":1,"y":2}})");
    EXPECT_EQ(to_json(v, Mode::Unordered), R"({"a":{"y":2,"z":1},"b":[1,2.5,"s",null,true]})");
    EXPECT_TRUE(identical(canonicalize(v), J(R"({"a":{"y":2,"z":1},"b":[1,2.5,"s",null,true]})")));
}

TEST(Json, RejectsDuplicateKeys) {
    DValue v;
    JsonError err;
    EXPECT_FALSE(parse_json(R"({"a":{"b":1,"b":2}})", v, err));
    EXPECT_EQ(err.pointer, "/a/b");
}

TEST(Json, DistinctKeys) {
    EXPECT_TRUE(distinct_keys(J(R"({"a":[{"b":1}],"c":2})")));
}
