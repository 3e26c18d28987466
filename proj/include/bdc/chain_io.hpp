#pragma once

#include "bdc/chain.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace bdc {

// Raised on any malformed chain-spec document: unknown family tag, missing or
// unknown field, out-of-range parameter. The message names the offending part.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses a chain-spec document. Unknown fields are rejected.
ChainSpec parse_spec(const nlohmann::json& document);
ChainSpec parse_spec_text(const std::string& text);
ChainSpec load_spec_file(const std::string& path);

// Canonical serialization; parse_spec(serialize_spec(s)) reproduces s.
// Exact values are written as "a/b" strings, float table rows as numbers.
nlohmann::ordered_json serialize_spec(const ChainSpec& spec);

bool operator==(const ChainSpec& a, const ChainSpec& b);

}  // namespace bdc
