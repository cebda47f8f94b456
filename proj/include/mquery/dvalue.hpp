#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mquery {

enum class Mode { Ordered, Unordered };

const char* mode_name(Mode m);

class DValue;
using Array = std::vector<DValue>;
using Member = std::pair<std::string, DValue>;
using Object = std::vector<Member>;

// A d-value: a literal (null, boolean, number, string), an array or an object.
// Immutable; copies share the underlying containers.
class DValue {
public:
    // Declaration order is the cross-type order: literals < objects < arrays.
    enum class Kind : std::uint8_t { Null, Bool, Number, String, Object, Array };

    DValue() = default;
    DValue(std::nullptr_t) {}
    DValue(bool b) : v_(b) {}
    DValue(double d) : v_(d == 0.0 ? 0.0 : d) {}
    DValue(int i) : v_(static_cast<double>(i)) {}
    DValue(std::int64_t i) : v_(static_cast<double>(i)) {}
    DValue(std::size_t i) : v_(static_cast<double>(i)) {}
    DValue(const char* s) : v_(std::string(s)) {}
    DValue(std::string s) : v_(std::move(s)) {}
    DValue(std::string_view s) : v_(std::string(s)) {}
    DValue(Array a) : v_(std::make_shared<const Array>(std::move(a))) {}
    DValue(Object o) : v_(std::make_shared<const Object>(std::move(o))) {}

    Kind kind() const { return static_cast<Kind>(v_.index()); }
    bool is_null() const { return kind() == Kind::Null; }
    bool is_bool() const { return kind() == Kind::Bool; }
    bool is_number() const { return kind() == Kind::Number; }
    bool is_string() const { return kind() == Kind::String; }
    bool is_object() const { return kind() == Kind::Object; }
    bool is_array() const { return kind() == Kind::Array; }
    bool is_literal() const { return kind() < Kind::Object; }

    bool as_bool() const { return std::get<bool>(v_); }
    double as_number() const { return std::get<double>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Array& as_array() const { return *std::get<std::shared_ptr<const Array>>(v_); }
    const Object& as_object() const { return *std::get<std::shared_ptr<const Object>>(v_); }

    // Value bound to `key` when this is an object defining it, else nullptr.
    const DValue* find(std::string_view key) const;

private:
    std::variant<std::monostate, bool, double, std::string, std::shared_ptr<const Object>,
                 std::shared_ptr<const Array>>
        v_;
};

// Structural identity: same kinds, same pair order, numerically equal numbers.
bool identical(const DValue& a, const DValue& b);

// Path segment: a key or a 0-based array index.
using Segment = std::variant<std::string, std::size_t>;

struct Path {
    std::vector<Segment> segs;

    Path() = default;
    explicit Path(std::vector<Segment> s) : segs(std::move(s)) {}

    // Dot notation; all-digit segments are indices. Returns false on empty segments.
    static bool parse(std::string_view text, Path& out);
    static Path of(std::string_view text);  // throws std::invalid_argument

    bool empty() const { return segs.empty(); }
    std::size_t size() const { return segs.size(); }
    bool index_free() const;
    bool is_prefix_of(const Path& other) const;  // non-strict
    Path concat(const Path& tail) const;
    Path prefix(std::size_t n) const;
    Path suffix(std::size_t from) const;
    // Longest prefix without index segments.
    Path truncate_at_index() const;
    std::string str() const;

    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;
};

using PathSet = std::set<Path>;

enum class Ord : int { LT = -1, EQ = 0, GT = 1 };

Ord natural_compare(const DValue& a, const DValue& b, Mode mode);
inline bool mode_equal(const DValue& a, const DValue& b, Mode mode) {
    return natural_compare(a, b, mode) == Ord::EQ;
}

struct NaturalLess {
    Mode mode = Mode::Ordered;
    bool operator()(const DValue& a, const DValue& b) const {
        return natural_compare(a, b, mode) == Ord::LT;
    }
};

// Total: any failing step yields null.
DValue eval_path(const DValue& v, const Path& p);
inline bool exists_path(const DValue& v, const Path& p) { return !eval_path(v, p).is_null(); }

DValue obj_for_path(const Path& p, DValue v);
DValue override_path(const DValue& o, const Path& p, DValue v);
DValue merge_pair(const DValue& o, const Path& p, DValue v);
DValue merge_or_override(const DValue& o, const Path& p, DValue v);

std::vector<Path> prefixes(const Path& p);
bool is_compatible(const Path& p, const PathSet& set);
bool in_extensions(const Path& p, const PathSet& set);  // some element of set is a prefix of p

// True when no key occurs twice in any object nested in v.
bool distinct_keys(const DValue& v);

// Recursively sorts object members by key; used for unordered-mode output.
DValue canonicalize(const DValue& v);

}  // namespace mquery
