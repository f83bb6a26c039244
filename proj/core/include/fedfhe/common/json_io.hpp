#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace fedfhe {

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);
// Throws decode_failure unless j carries {"format": kind, "version": version}.
void check_format(const nlohmann::json& j, const std::string& kind, int version);

}  // namespace fedfhe
