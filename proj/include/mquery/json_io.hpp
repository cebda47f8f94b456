#pragma once

#include <string>
#include <string_view>

#include "mquery/dvalue.hpp"

namespace mquery {

struct JsonError {
    std::string pointer;  // JSON pointer of the offending element ("" for the document)
    std::string message;
};

// Parses JSON text into a d-value. Field order is preserved; numbers become doubles.
// Duplicate keys are rejected. Returns false and fills `err` on failure.
bool parse_json(std::string_view text, DValue& out, JsonError& err);

// Serializes a d-value. In unordered mode object members are emitted sorted by key.
std::string to_json(const DValue& v, Mode mode = Mode::Ordered, bool pretty = false);

std::string json_pointer_escape(std::string_view token);

}  // namespace mquery
