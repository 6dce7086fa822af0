#pragma once

#include "rfsad/estimation.hpp"

#include <json.hpp>

#include <filesystem>

namespace rfsad {

inline constexpr int kModelFileVersion = 1;

[[nodiscard]] nlohmann::json model_to_json(const ModelParams& model);
[[nodiscard]] ModelParams model_from_json(const nlohmann::json& doc);

void write_model(const ModelParams& model, const std::filesystem::path& path);
[[nodiscard]] ModelParams read_model(const std::filesystem::path& path);

} // namespace rfsad
