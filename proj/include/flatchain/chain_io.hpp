#pragma once

// JSON chain files.  Coordinates and real coefficients are written as
// shortest round-trip decimal strings; readers accept strings or numbers.

#include <string>

#include <json.hpp>

#include "flatchain/chains.hpp"

namespace flatchain {

nlohmann::json spaceToJson(const NormedSpace& space);
NormedSpace spaceFromJson(const nlohmann::json& j);
nlohmann::json groupToJson(const CoefficientGroup& group);
CoefficientGroup groupFromJson(const nlohmann::json& j);

nlohmann::json chainToJson(const PolyChain& chain);
/// Throws FormatError; invariant violations name the summand index.
PolyChain chainFromJson(const nlohmann::json& j);

PolyChain readChain(const std::string& path);
void writeChain(const PolyChain& chain, const std::string& path);

/// Shortest decimal string that parses back to exactly `x`.
std::string formatDouble(double x);
double parseNumber(const nlohmann::json& j);

} // namespace flatchain
