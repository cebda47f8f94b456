#pragma once

#include <stdexcept>
#include <string>

#include "mquery/json_io.hpp"
#include "mquery/syntax.hpp"

namespace testutil {

inline mquery::DValue J(const std::string& text) {
    mquery::DValue v;
    mquery::JsonError err;
    if (!mquery::parse_json(text, v, err)) throw std::runtime_error("bad test JSON: " + err.message);
    return v;
}

inline mquery::Query Q(const std::string& text) {
    std::vector<mquery::ParseIssue> issues;
    auto q = mquery::parse_query(text, issues);
    if (!q) throw std::runtime_error("bad test query: " + mquery::issues_to_json(issues));
    return *q;
}

inline mquery::Collection C(const std::string& text) {
    auto v = J(text);
    return mquery::Collection(v.as_array().begin(), v.as_array().end());
}

inline mquery::DatabaseInstance DB(const std::string& text) {
    std::vector<mquery::ParseIssue> issues;
    auto db = mquery::load_instance(text, issues);
    if (!db) throw std::runtime_error("bad test instance: " + mquery::issues_to_json(issues));
    return *db;
}

inline std::string S(const mquery::Collection& c, mquery::Mode m = mquery::Mode::Ordered) {
    return mquery::to_json(mquery::DValue(mquery::Array(c.begin(), c.end())), m);
}

}  // namespace testutil
