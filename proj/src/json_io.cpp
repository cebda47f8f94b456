#include "mquery/json_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <json.hpp>

namespace mquery {

std::string json_pointer_escape(std::string_view token) {
    std::string out;
    for (char c : token) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

namespace {

using nlohmann::json;

class Builder : public nlohmann::json_sax<json> {
public:
    DValue result;
    JsonError error;
    bool failed = false;

    bool null() override { return put(DValue()); }
    bool boolean(bool v) override { return put(DValue(v)); }
    bool number_integer(number_integer_t v) override { return put(DValue(static_cast<double>(v))); }
    bool number_unsigned(number_unsigned_t v) override { return put(DValue(static_cast<double>(v))); }
    bool number_float(number_float_t v, const string_t&) override { return put(DValue(static_cast<double>(v))); }
    bool string(string_t& v) override { return put(DValue(std::move(v))); }
    bool binary(binary_t&) override { return fail("binary values are not supported"); }

    bool start_object(std::size_t) override {
        frames_.push_back(Frame{true, {}, {}, {}, {}});
        return true;
    }
    bool key(string_t& k) override {
        Frame& f = frames_.back();
        if (!f.keys.insert(k).second) {
            f.pending = k;
            return fail("duplicate key \"" + k + "\"");
        }
        f.pending = std::move(k);
        return true;
    }
    bool end_object() override {
        Frame f = std::move(frames_.back());
        frames_.pop_back();
        return put(DValue(std::move(f.obj)));
    }
    bool start_array(std::size_t) override {
        frames_.push_back(Frame{false, {}, {}, {}, {}});
        return true;
    }
    bool end_array() override {
        Frame f = std::move(frames_.back());
        frames_.pop_back();
        return put(DValue(std::move(f.arr)));
    }
    bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) override {
        if (!failed) {
            failed = true;
            error.pointer = pointer();
            error.message = "malformed JSON at byte " + std::to_string(pos) + ": " + ex.what();
        }
        return false;
    }

private:
    struct Frame {
        bool is_object;
        Object obj;
        Array arr;
        std::string pending;
        std::unordered_set<std::string> keys;
    };
    std::vector<Frame> frames_;

    std::string pointer() const {
        std::string out;
        for (const auto& f : frames_) {
            out += '/';
            out += f.is_object ? json_pointer_escape(f.pending) : std::to_string(f.arr.size());
        }
        return out;
    }

    bool fail(std::string msg) {
        failed = true;
        error.pointer = pointer();
        error.message = std::move(msg);
        return false;
    }

    bool put(DValue v) {
        if (frames_.empty()) {
            result = std::move(v);
            return true;
        }
        Frame& f = frames_.back();
        if (f.is_object)
            f.obj.emplace_back(std::move(f.pending), std::move(v));
        else
            f.arr.push_back(std::move(v));
        return true;
    }
};

void write_string(std::string& out, const std::string& s) {
    out += '"';
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        case '\b': out += "\\b"; break;
        case '\f': out += "\\f"; break;
        default:
            if (c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    out += '"';
}

void write_number(std::string& out, double d) {
    if (!std::isfinite(d)) {
        out += "null";
        return;
    }
    char buf[64];
    std::to_chars_result r;
    if (d == std::trunc(d) && std::fabs(d) < 1e15)
        r = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(d));
    else
        r = std::to_chars(buf, buf + sizeof buf, d);
    out.append(buf, r.ptr);
}

void newline(std::string& out, bool pretty, int depth) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void write(std::string& out, const DValue& v, bool pretty, int depth) {
    switch (v.kind()) {
    case DValue::Kind::Null: out += "null"; break;
    case DValue::Kind::Bool: out += v.as_bool() ? "true" : "false"; break;
    case DValue::Kind::Number: write_number(out, v.as_number()); break;
    case DValue::Kind::String: write_string(out, v.as_string()); break;
    case DValue::Kind::Array: {
        const auto& a = v.as_array();
        if (a.empty()) {
            out += "[]";
            break;
        }
        out += '[';
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) out += ',';
            newline(out, pretty, depth + 1);
            write(out, a[i], pretty, depth + 1);
        }
        newline(out, pretty, depth);
        out += ']';
        break;
    }
    case DValue::Kind::Object: {
        const auto& o = v.as_object();
        if (o.empty()) {
            out += "{}";
            break;
        }
        out += '{';
        for (std::size_t i = 0; i < o.size(); ++i) {
            if (i) out += ',';
            newline(out, pretty, depth + 1);
            write_string(out, o[i].first);
            out += pretty ? ": " : ":";
            write(out, o[i].second, pretty, depth + 1);
        }
        newline(out, pretty, depth);
        out += '}';
        break;
    }
    }
}

}  // namespace

bool parse_json(std::string_view text, DValue& out, JsonError& err) {
    Builder b;
    bool ok = json::sax_parse(text.begin(), text.end(), &b);
    if (!ok || b.failed) {
        err = b.error;
        if (err.message.empty()) err.message = "malformed JSON";
        return false;
    }
    out = std::move(b.result);
    return true;
}

std::string to_json(const DValue& v, Mode mode, bool pretty) {
    std::string out;
    write(out, mode == Mode::Unordered ? canonicalize(v) : v, pretty, 0);
    return out;
}

}  // namespace mquery
