#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mquery/dvalue.hpp"

namespace mquery {

// A path occurrence inside a term. The head is the current document, a bound
// variable, or (after grounding) a constant d-value; `rest` navigates from it.
struct PathRef {
    enum class Head : std::uint8_t { Root, Var, Const };
    Head head = Head::Root;
    std::string var;
    DValue constant;
    Path rest;

    static PathRef root(Path p) { return PathRef{Head::Root, {}, {}, std::move(p)}; }
    static PathRef variable(std::string x, Path p = {}) { return PathRef{Head::Var, std::move(x), {}, std::move(p)}; }
    static PathRef of_constant(DValue v) { return PathRef{Head::Const, {}, std::move(v), {}}; }

    bool is_root() const { return head == Head::Root; }
    bool is_var() const { return head == Head::Var; }
};

bool operator==(const PathRef& a, const PathRef& b);

struct Term;
struct BoolExpr;
using TermPtr = std::shared_ptr<const Term>;
using BoolPtr = std::shared_ptr<const BoolExpr>;

struct Term {
    enum class Kind : std::uint8_t { Literal, Path, Array, Object, Call, Cond, Map, Filter };
    Kind kind = Kind::Literal;
    DValue literal;                                       // Literal
    PathRef path;                                         // Path; Map/Filter input
    std::vector<TermPtr> items;                           // Array
    std::vector<std::pair<std::string, TermPtr>> fields;  // Object
    std::string name;                                     // Call: function; Map/Filter: variable
    TermPtr arg;                                          // Call argument; Cond then; Map body
    TermPtr alt;                                          // Cond else
    BoolPtr test;                                         // Cond test; Filter predicate
};

struct BoolExpr {
    enum class Kind : std::uint8_t { Exists, Eq, Lte, In, Not, And };
    Kind kind = Kind::Exists;
    PathRef path;    // Exists
    TermPtr lhs, rhs;  // Eq, Lte, In
    BoolPtr a, b;      // Not (a), And (a, b)
};

namespace build {
TermPtr lit(DValue v);
TermPtr path(PathRef p);
TermPtr path(std::string_view dotted);
TermPtr var(std::string x, std::string_view rest = {});
TermPtr array(std::vector<TermPtr> items);
TermPtr object(std::vector<std::pair<std::string, TermPtr>> fields);
TermPtr call(std::string fn, TermPtr arg);
TermPtr cond(BoolPtr test, TermPtr then, TermPtr otherwise);
TermPtr map(PathRef input, std::string x, TermPtr body);
TermPtr filter(PathRef input, std::string x, BoolPtr pred);

BoolPtr exists(PathRef p);
BoolPtr eq(TermPtr a, TermPtr b);
BoolPtr lte(TermPtr a, TermPtr b);
BoolPtr in(TermPtr a, TermPtr b);
BoolPtr not_(BoolPtr a);
BoolPtr and_(BoolPtr a, BoolPtr b);
// Sugar, expanded into the core connectives.
BoolPtr ne(TermPtr a, TermPtr b);
BoolPtr lt(TermPtr a, TermPtr b);
BoolPtr gt(TermPtr a, TermPtr b);
BoolPtr gte(TermPtr a, TermPtr b);
BoolPtr or_(BoolPtr a, BoolPtr b);
BoolPtr conj(const std::vector<BoolPtr>& parts);  // left-associated; parts non-empty
BoolPtr disj(const std::vector<BoolPtr>& parts);
}  // namespace build

bool equal(const Term& a, const Term& b);
bool equal(const BoolExpr& a, const BoolExpr& b);
inline bool equal(const TermPtr& a, const TermPtr& b) { return a == b || (a && b && equal(*a, *b)); }
inline bool equal(const BoolPtr& a, const BoolPtr& b) { return a == b || (a && b && equal(*a, *b)); }

// Conjuncts of nested And nodes, in left-to-right order.
std::vector<BoolPtr> conjuncts(const BoolPtr& b);

struct EvalContext {
    DValue root;
    std::vector<std::pair<std::string, DValue>> bindings;  // innermost last

    explicit EvalContext(DValue r) : root(std::move(r)) {}
    const DValue* lookup(const std::string& x) const;
};

class FunctionRegistry {
public:
    using Fn = std::function<DValue(const DValue&, Mode)>;
    void add(std::string name, Fn fn) { fns_[std::move(name)] = std::move(fn); }
    bool has(const std::string& name) const { return fns_.count(name) != 0; }
    DValue call(const std::string& name, const DValue& arg, Mode mode) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Fn> fns_;
};

const FunctionRegistry& builtin_registry();

DValue eval_ref(const EvalContext& ctx, const PathRef& p);
DValue eval_term(const EvalContext& ctx, const Term& t, const FunctionRegistry& reg, Mode mode);
bool satisfies(const EvalContext& ctx, const BoolExpr& b, const FunctionRegistry& reg, Mode mode);

// Inductive path sets of a term / Boolean expression. Paths relative to a
// map/filter variable are prefixed with the input path. Object constructor
// children are not prefixed with their key.
PathSet paths_of_term(const Term& t);
PathSet paths_of_bool(const BoolExpr& b);

// Conservative set of document paths an expression may read. Paths are cut at
// their first index; reads through a map/filter variable count as reads of the
// input path; object constructor children count both with and without their key.
PathSet read_set(const Term& t);
PathSet read_set(const BoolExpr& b);

// Free variables (not bound by an enclosing map/filter).
std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const BoolExpr& b);

// Replaces free occurrences of variables by constants.
using Substitution = std::map<std::string, DValue>;
TermPtr substitute(const TermPtr& t, const Substitution& s);
BoolPtr substitute(const BoolPtr& b, const Substitution& s);

// Replaces the leading segment `from` of document paths by `to`.
TermPtr rename_head(const TermPtr& t, const std::string& from, const std::string& to);
BoolPtr rename_head(const BoolPtr& b, const std::string& from, const std::string& to);

}  // namespace mquery
