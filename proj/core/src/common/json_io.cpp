#include "fedfhe/common/json_io.hpp"

#include <fstream>

#include "fedfhe/common/error.hpp"

namespace fedfhe {

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::decode_failure, path + ": " + e.what());
  }
}

void check_format(const nlohmann::json& j, const std::string& kind, int version) {
  require(j.is_object() && j.value("format", "") == kind && j.value("version", 0) == version,
          ErrorCode::decode_failure, "not a version " + std::to_string(version) + " " + kind + " document");
}

}  // namespace fedfhe
