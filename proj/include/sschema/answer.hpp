#pragma once

#include <string>

namespace sschema {

// Structured MLLM output. Parsing never throws: format breaches set
// is_failure and keep whatever fields were extracted for audit.
struct ParsedAnswer {
    std::string description;
    std::string category;
    std::string tool;
    bool is_failure = false;
    friend bool operator==(const ParsedAnswer&, const ParsedAnswer&) = default;
};

}  // namespace sschema
