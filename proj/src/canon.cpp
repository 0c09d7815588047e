#include "sschema/canon.hpp"

#include <cmath>
#include <cstdio>

#include "sschema/errors.hpp"

namespace sschema {

std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
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
    return out;
}

std::string format_fixed4(double v) {
    if (!std::isfinite(v)) {
        throw SerializationError("non-finite score cannot be serialized");
    }
    // llrint under the default rounding mode gives round-half-even.
    long long scaled = std::llrint(v * 10000.0);
    bool neg = scaled < 0;
    unsigned long long m = neg ? static_cast<unsigned long long>(-scaled)
                               : static_cast<unsigned long long>(scaled);
    std::string out = neg ? "-" : "";
    out += std::to_string(m / 10000);
    out += '.';
    unsigned long long frac = m % 10000;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04llu", frac);
    out += buf;
    return out;
}

}  // namespace sschema
