#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "mquery/expr.hpp"

namespace mquery {

namespace {

DValue num(double d) { return std::isfinite(d) ? DValue(d) : DValue(); }

std::optional<std::vector<double>> numbers(const DValue& v) {
    if (!v.is_array()) return std::nullopt;
    std::vector<double> out;
    for (const auto& e : v.as_array()) {
        if (!e.is_number()) return std::nullopt;
        out.push_back(e.as_number());
    }
    return out;
}

std::optional<std::pair<double, double>> two_numbers(const DValue& v) {
    auto ns = numbers(v);
    if (!ns || ns->size() != 2) return std::nullopt;
    return std::make_pair((*ns)[0], (*ns)[1]);
}

template <class F>
FunctionRegistry::Fn binary(F f) {
    return [f](const DValue& v, Mode) {
        auto p = two_numbers(v);
        return p ? num(f(p->first, p->second)) : DValue();
    };
}

template <class F>
FunctionRegistry::Fn text(F f) {
    return [f](const DValue& v, Mode) {
        if (!v.is_string()) return DValue();
        std::string s = v.as_string();
        for (auto& c : s) c = static_cast<char>(f(static_cast<unsigned char>(c)));
        return DValue(std::move(s));
    };
}

FunctionRegistry make_builtins() {
    FunctionRegistry r;
    r.add("size", [](const DValue& v, Mode) {
        return v.is_array() ? DValue(v.as_array().size()) : DValue();
    });
    r.add("sum", [](const DValue& v, Mode) {
        auto ns = numbers(v);
        if (!ns) return DValue();
        double s = 0;
        for (double d : *ns) s += d;
        return num(s);
    });
    r.add("avg", [](const DValue& v, Mode) {
        auto ns = numbers(v);
        if (!ns || ns->empty()) return DValue();
        double s = 0;
        for (double d : *ns) s += d;
        return num(s / static_cast<double>(ns->size()));
    });
    r.add("min", [](const DValue& v, Mode) {
        auto ns = numbers(v);
        if (!ns || ns->empty()) return DValue();
        return num(*std::min_element(ns->begin(), ns->end()));
    });
    r.add("max", [](const DValue& v, Mode) {
        auto ns = numbers(v);
        if (!ns || ns->empty()) return DValue();
        return num(*std::max_element(ns->begin(), ns->end()));
    });
    r.add("trunc", [](const DValue& v, Mode) {
        return v.is_number() ? num(std::trunc(v.as_number())) : DValue();
    });
    r.add("concat", [](const DValue& v, Mode) {
        if (!v.is_array()) return DValue();
        std::string out;
        for (const auto& e : v.as_array()) {
            if (!e.is_string()) return DValue();
            out += e.as_string();
        }
        return DValue(std::move(out));
    });
    r.add("toLower", text([](int c) { return std::tolower(c); }));
    r.add("toUpper", text([](int c) { return std::toupper(c); }));
    r.add("add", binary([](double a, double b) { return a + b; }));
    r.add("subtract", binary([](double a, double b) { return a - b; }));
    r.add("multiply", binary([](double a, double b) { return a * b; }));
    r.add("divide", binary([](double a, double b) { return a / b; }));
    // Union of the element arrays of an array of arrays, first occurrence kept.
    r.add("setUnion", [](const DValue& v, Mode mode) {
        if (!v.is_array()) return DValue();
        Array out;
        for (const auto& part : v.as_array()) {
            if (!part.is_array()) return DValue();
            for (const auto& e : part.as_array()) {
                bool seen = std::any_of(out.begin(), out.end(),
                                        [&](const DValue& x) { return mode_equal(x, e, mode); });
                if (!seen) out.push_back(e);
            }
        }
        return DValue(std::move(out));
    });
    return r;
}

}  // namespace

const FunctionRegistry& builtin_registry() {
    static const FunctionRegistry reg = make_builtins();
    return reg;
}

}  // namespace mquery
