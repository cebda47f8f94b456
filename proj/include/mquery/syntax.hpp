#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mquery/pipeline.hpp"

namespace mquery {

struct ParseIssue {
    enum class Kind : std::uint8_t { Syntax, Validation };
    std::string location;  // JSON pointer into the input
    std::string message;
    Kind kind = Kind::Syntax;
};

const char* issue_kind_name(ParseIssue::Kind k);
std::string issues_to_json(const std::vector<ParseIssue>& issues);

// Surface syntax: {"collection": C, "pipeline": [stage, ...]}.
std::optional<Query> parse_query(std::string_view text, std::vector<ParseIssue>& issues,
                                 const FunctionRegistry& reg = builtin_registry());
std::optional<Query> parse_query_value(const DValue& v, std::vector<ParseIssue>& issues,
                                       const FunctionRegistry& reg = builtin_registry());

std::optional<TermPtr> parse_term(const DValue& v, std::vector<ParseIssue>& issues,
                                  const FunctionRegistry& reg = builtin_registry());
std::optional<BoolPtr> parse_bool(const DValue& v, std::vector<ParseIssue>& issues,
                                  const FunctionRegistry& reg = builtin_registry());

// Checks the structural invariants of a query AST (also applied by the parser).
std::vector<ParseIssue> validate(const Query& q, const FunctionRegistry& reg = builtin_registry());

DValue query_to_value(const Query& q);
DValue term_to_value(const Term& t);
DValue bool_to_value(const BoolExpr& b);
std::string print_query(const Query& q, bool pretty = false);

// Instance file: {"name": [doc, ...], ...}. Every document needs a unique _id.
std::optional<DatabaseInstance> load_instance(std::string_view text, std::vector<ParseIssue>& issues);
DValue instance_to_value(const DatabaseInstance& db);

}  // namespace mquery
