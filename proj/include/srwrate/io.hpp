#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "srwrate/measures.hpp"

namespace srwrate {

using Json = nlohmann::ordered_json;

/// "%.17g": enough digits for an exact double round trip.
std::string format_double(double x);

/// Serialize like Json::dump, but every floating-point number is written with
/// format_double so outputs are byte-stable across library versions.
std::string dump_json(const Json& j, int indent = -1);

/// {"dim": D, "points": [[...], ...], "weights": [...]}
Json measure_to_json(const DiscreteMeasure& mu);

/// Validates shape, finiteness and the measure invariants.
DiscreteMeasure measure_from_json(const Json& j);

DiscreteMeasure load_measure(const std::filesystem::path& path);
void save_measure(const DiscreteMeasure& mu, const std::filesystem::path& path);

}  // namespace srwrate
