#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace bhp::cli {

/// Parses the TOML subset used by experiment configs into JSON: tables
/// ([a] and [a.b]), bare or quoted keys, basic and literal strings,
/// integers, floats (inf/nan included), booleans, arrays (possibly spanning
/// lines) and inline tables. Anything else is a configuration error with
/// the offending line number.
nlohmann::json parse_toml(std::string_view text);

}  // namespace bhp::cli
