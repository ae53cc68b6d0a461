#pragma once

#include <json.hpp>

#include "frag6/models.hpp"

namespace frag6::models::detail {

// Shared between the manifest writer and the oracle table exporter so both
// emit identical case records.
nlohmann::ordered_json case_record(const TestCase& c);

}  // namespace frag6::models::detail
