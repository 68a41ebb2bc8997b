#ifndef RABBIT_SERIALIZE_HPP
#define RABBIT_SERIALIZE_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "rabbit/schema.hpp"

namespace rabbit {

/// Result encoding: ONE containers encode their value, OPT encode the value
/// or null, SEQ encode an array. Records become objects in declared field
/// order; entity refs become an object of their attributes plus "_id".
nlohmann::ordered_json valueToJson(const Database& db, const Value& value);

/// Compact single-line form of the above.
std::string valueToJsonText(const Database& db, const Value& value);

} // namespace rabbit

#endif
