#pragma once

#include <string>

#include "ivinv/invert_exact.hpp"
#include "json.hpp"

namespace ivinv {

/// Extended reals as JSON: finite numbers stay numbers, infinities become "-inf"/"inf".
nlohmann::json extended_to_json(double x);
double extended_from_json(const nlohmann::json& j);

nlohmann::json set_to_json(const IntervalUnion& set);
/// Throws ConfigError when the intervals violate the union invariants.
IntervalUnion set_from_json(const nlohmann::json& j);

/// {method, alpha, exact, reliable, intervals, empty, diagnostics, notes}.
nlohmann::json result_to_json(const InversionResult& r);
InversionResult result_from_json(const nlohmann::json& j);

/// Compact notation: empty set as the null sign, unions of closed intervals with
/// signed infinities, e.g. "[-1.23, 4.56] ∪ [7.89, +∞]".
std::string format_set(const IntervalUnion& set, int precision = 4);

}  // namespace ivinv
