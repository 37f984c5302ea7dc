#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "adbn/model/ctbn.hpp"

namespace adbn::model {

// JSON domain documents; see docs/domain-format.md for the schema.
// Throws ParseError (malformed JSON), SchemaError (unknown keys, missing or
// extra CIM configurations, bad references) or ValidationError (invalid
// intensity matrices, distributions or CPT rows).
Domain load_domain(std::string_view text);
Domain load_domain_file(const std::filesystem::path& path);

// Inverse of load_domain: load_domain(save_domain(d)) == d.
std::string save_domain(const Domain& domain);

}  // namespace adbn::model
