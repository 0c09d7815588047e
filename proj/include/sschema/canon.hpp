#pragma once

#include <string>
#include <string_view>

namespace sschema {

// JSON string escaping; UTF-8 bytes pass through untouched.
std::string json_escape(std::string_view s);

// Renders a score with exactly four decimal places, round-half-even.
// Throws SerializationError on non-finite input.
std::string format_fixed4(double v);

}  // namespace sschema
