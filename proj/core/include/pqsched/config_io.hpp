#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pqsched/model.hpp"

namespace pqsched {

// JSON layout of a SystemConfig:
//   { "lambda": 1.0, "prevalences": [...], "service_rates": [...],
//     "costs": [{"coeff": c, "power": p}, ...],
//     "confusion": [[...], ...]   (row-major; a flat K*K array is also accepted),
//     "horizon": 1.0,
//     "arrival_dist": {"family": "exponential"},
//     "service_dist": {"family": "lognormal", "cv": 0.5} }

nlohmann::json to_json(const Distribution& dist);
Distribution distribution_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConfusionMatrix& q);
ConfusionMatrix confusion_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SystemConfig& config);
SystemConfig config_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

SystemConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const SystemConfig& config);

}  // namespace pqsched
