#include "mquery/dvalue.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <unordered_set>

namespace mquery {

const char* mode_name(Mode m) { return m == Mode::Ordered ? "ordered" : "unordered"; }

const DValue* DValue::find(std::string_view key) const {
    if (!is_object()) return nullptr;
    for (const auto& [k, v] : as_object())
        if (k == key) return &v;
    return nullptr;
}

bool identical(const DValue& a, const DValue& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case DValue::Kind::Null: return true;
    case DValue::Kind::Bool: return a.as_bool() == b.as_bool();
    case DValue::Kind::Number: return a.as_number() == b.as_number();
    case DValue::Kind::String: return a.as_string() == b.as_string();
    case DValue::Kind::Array: {
        const auto& x = a.as_array();
        const auto& y = b.as_array();
        if (&x == &y) return true;
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!identical(x[i], y[i])) return false;
        return true;
    }
    case DValue::Kind::Object: {
        const auto& x = a.as_object();
        const auto& y = b.as_object();
        if (&x == &y) return true;
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].first != y[i].first || !identical(x[i].second, y[i].second)) return false;
        return true;
    }
    }
    return false;
}

// ---- paths ----

bool Path::parse(std::string_view text, Path& out) {
    out.segs.clear();
    if (text.empty()) return true;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = text.find('.', start);
        std::string_view seg = text.substr(start, dot == std::string_view::npos ? text.npos : dot - start);
        if (seg.empty()) return false;
        bool digits = std::all_of(seg.begin(), seg.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (digits) {
            std::size_t idx = 0;
            auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
            if (ec != std::errc() || ptr != seg.data() + seg.size()) return false;
            out.segs.emplace_back(idx);
        } else {
            out.segs.emplace_back(std::string(seg));
        }
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return true;
}

Path Path::of(std::string_view text) {
    Path p;
    if (!parse(text, p)) throw std::invalid_argument("malformed path: " + std::string(text));
    return p;
}

bool Path::index_free() const {
    return std::all_of(segs.begin(), segs.end(),
                       [](const Segment& s) { return std::holds_alternative<std::string>(s); });
}

bool Path::is_prefix_of(const Path& other) const {
    if (segs.size() > other.segs.size()) return false;
    return std::equal(segs.begin(), segs.end(), other.segs.begin());
}

Path Path::concat(const Path& tail) const {
    Path r = *this;
    r.segs.insert(r.segs.end(), tail.segs.begin(), tail.segs.end());
    return r;
}

Path Path::prefix(std::size_t n) const {
    return Path(std::vector<Segment>(segs.begin(), segs.begin() + std::min(n, segs.size())));
}

Path Path::suffix(std::size_t from) const {
    if (from >= segs.size()) return Path();
    return Path(std::vector<Segment>(segs.begin() + from, segs.end()));
}

Path Path::truncate_at_index() const {
    std::size_t n = 0;
    while (n < segs.size() && std::holds_alternative<std::string>(segs[n])) ++n;
    return prefix(n);
}

std::string Path::str() const {
    std::string out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (i) out += '.';
        if (auto* k = std::get_if<std::string>(&segs[i]))
            out += *k;
        else
            out += std::to_string(std::get<std::size_t>(segs[i]));
    }
    return out;
}

// ---- natural order ----

namespace {

int type_tag(const DValue& v) {
    if (v.is_object()) return 1;
    if (v.is_array()) return 2;
    return 0;
}

Ord from_int(int c) { return c < 0 ? Ord::LT : (c > 0 ? Ord::GT : Ord::EQ); }

Ord compare_pair(const Member& a, const Member& b, Mode mode);

Ord compare_members(const Object& x, const Object& y, Mode mode) {
    std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        Ord c = compare_pair(x[i], y[i], mode);
        if (c != Ord::EQ) return c;
    }
    return from_int(x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0));
}

Object sorted_members(const Object& o, Mode mode) {
    Object s = o;
    std::stable_sort(s.begin(), s.end(), [mode](const Member& a, const Member& b) {
        return compare_pair(a, b, mode) == Ord::LT;
    });
    return s;
}

Ord compare_pair(const Member& a, const Member& b, Mode mode) {
    int ta = type_tag(a.second), tb = type_tag(b.second);
    if (ta != tb) return from_int(ta - tb);
    int kc = a.first.compare(b.first);
    if (kc != 0) return from_int(kc);
    return natural_compare(a.second, b.second, mode);
}

}  // namespace

Ord natural_compare(const DValue& a, const DValue& b, Mode mode) {
    auto ka = a.kind(), kb = b.kind();
    if (ka != kb) return ka < kb ? Ord::LT : Ord::GT;
    switch (ka) {
    case DValue::Kind::Null: return Ord::EQ;
    case DValue::Kind::Bool: return from_int(int(a.as_bool()) - int(b.as_bool()));
    case DValue::Kind::Number: {
        double x = a.as_number(), y = b.as_number();
        return x < y ? Ord::LT : (x > y ? Ord::GT : Ord::EQ);
    }
    case DValue::Kind::String: return from_int(a.as_string().compare(b.as_string()));
    case DValue::Kind::Array: {
        const auto& x = a.as_array();
        const auto& y = b.as_array();
        if (&x == &y) return Ord::EQ;
        std::size_t n = std::min(x.size(), y.size());
        for (std::size_t i = 0; i < n; ++i) {
            Ord c = natural_compare(x[i], y[i], mode);
            if (c != Ord::EQ) return c;
        }
        return from_int(x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0));
    }
    case DValue::Kind::Object: {
        const auto& x = a.as_object();
        const auto& y = b.as_object();
        if (&x == &y) return Ord::EQ;
        if (mode == Mode::Ordered) return compare_members(x, y, mode);
        return compare_members(sorted_members(x, mode), sorted_members(y, mode), mode);
    }
    }
    return Ord::EQ;
}

// ---- evaluation and structural updates ----

DValue eval_path(const DValue& v, const Path& p) {
    const DValue* cur = &v;
    for (const auto& seg : p.segs) {
        if (auto* key = std::get_if<std::string>(&seg)) {
            cur = cur->find(*key);
            if (!cur) return DValue();
        } else {
            std::size_t i = std::get<std::size_t>(seg);
            if (!cur->is_array() || i >= cur->as_array().size()) return DValue();
            cur = &cur->as_array()[i];
        }
    }
    return *cur;
}

namespace {

void require_object_path(const Path& p, const char* op) {
    if (p.empty() || !p.index_free())
        throw std::invalid_argument(std::string(op) + ": path must be non-empty and index-free: " + p.str());
}

const std::string& key_at(const Path& p, std::size_t i) { return std::get<std::string>(p.segs[i]); }

DValue obj_from(const Path& p, std::size_t from, DValue v) {
    for (std::size_t i = p.size(); i-- > from;) v = DValue(Object{{key_at(p, i), std::move(v)}});
    return v;
}

DValue replace_at(const DValue& cur, const Path& p, std::size_t i, DValue v) {
    Object copy = cur.as_object();
    for (auto& m : copy) {
        if (m.first != key_at(p, i)) continue;
        m.second = (i + 1 == p.size()) ? std::move(v) : replace_at(m.second, p, i + 1, std::move(v));
        return DValue(std::move(copy));
    }
    throw std::logic_error("override_path: path does not exist");
}

DValue merge_at(const DValue& cur, const Path& p, std::size_t i, DValue v) {
    Object copy = cur.as_object();
    const std::string& key = key_at(p, i);
    for (auto& m : copy) {
        if (m.first != key) continue;
        if (m.second.is_null()) {
            m.second = obj_from(p, i + 1, std::move(v));
        } else if (i + 1 == p.size()) {
            throw std::logic_error("merge_pair: path already exists");
        } else if (m.second.is_object()) {
            m.second = merge_at(m.second, p, i + 1, std::move(v));
        } else {
            m.second = obj_from(p, i + 1, std::move(v));
        }
        return DValue(std::move(copy));
    }
    copy.emplace_back(key, obj_from(p, i + 1, std::move(v)));
    return DValue(std::move(copy));
}

}  // namespace

DValue obj_for_path(const Path& p, DValue v) {
    require_object_path(p, "obj_for_path");
    return obj_from(p, 0, std::move(v));
}

DValue override_path(const DValue& o, const Path& p, DValue v) {
    require_object_path(p, "override_path");
    if (!o.is_object() || !exists_path(o, p)) throw std::logic_error("override_path: path does not exist");
    return replace_at(o, p, 0, std::move(v));
}

DValue merge_pair(const DValue& o, const Path& p, DValue v) {
    require_object_path(p, "merge_pair");
    if (!o.is_object()) throw std::invalid_argument("merge_pair: not an object");
    if (v.is_null()) return o;
    return merge_at(o, p, 0, std::move(v));
}

DValue merge_or_override(const DValue& o, const Path& p, DValue v) {
    if (exists_path(o, p)) return override_path(o, p, std::move(v));
    return merge_pair(o, p, std::move(v));
}

std::vector<Path> prefixes(const Path& p) {
    std::vector<Path> out;
    for (std::size_t n = 0; n <= p.size(); ++n) out.push_back(p.prefix(n));
    return out;
}

bool in_extensions(const Path& p, const PathSet& set) {
    for (std::size_t n = 0; n <= p.size(); ++n)
        if (set.count(p.prefix(n))) return true;
    return false;
}

bool is_compatible(const Path& p, const PathSet& set) {
    if (in_extensions(p, set)) return false;
    auto it = set.lower_bound(p);
    return it == set.end() || !p.is_prefix_of(*it);
}

bool distinct_keys(const DValue& v) {
    if (v.is_array()) {
        for (const auto& e : v.as_array())
            if (!distinct_keys(e)) return false;
    } else if (v.is_object()) {
        std::unordered_set<std::string> seen;
        for (const auto& [k, e] : v.as_object())
            if (!seen.insert(k).second || !distinct_keys(e)) return false;
    }
    return true;
}

DValue canonicalize(const DValue& v) {
    if (v.is_array()) {
        Array out;
        out.reserve(v.as_array().size());
        for (const auto& e : v.as_array()) out.push_back(canonicalize(e));
        return DValue(std::move(out));
    }
    if (v.is_object()) {
        Object out;
        for (const auto& [k, e] : v.as_object()) out.emplace_back(k, canonicalize(e));
        std::stable_sort(out.begin(), out.end(), [](const Member& a, const Member& b) { return a.first < b.first; });
        return DValue(std::move(out));
    }
    return v;
}

}  // namespace mquery
