#pragma once

#include <string>

#include <json.hpp>

namespace lorma {

/// Parses the TOML subset used by experiment configs into a JSON value:
/// [table] and [[array-of-table]] headers (dotted paths allowed), bare keys,
/// strings, integers, floats, booleans and flat arrays, with # comments.
/// Throws ParseError with a 1-based line/column on malformed input.
nlohmann::json parse_toml(const std::string& text);

}  // namespace lorma
