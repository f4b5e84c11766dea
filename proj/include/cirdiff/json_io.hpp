#pragma once

#include <json.hpp>

#include "cirdiff/core_model.hpp"

namespace cirdiff {

/// {"x": {"k","sigma","theta","x0"}, "y": {"k","sigma","theta","y0"}}
nlohmann::ordered_json model_to_json(const DiffModel& m);

/// Inverse of model_to_json; throws validation on missing or non-numeric fields.
DiffModel model_from_json(const nlohmann::json& j);

}  // namespace cirdiff
