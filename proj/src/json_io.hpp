#pragma once

// shared by run_io.cpp and verify.cpp: deterministic JSON emission with all
// floats at 17 significant digits, plus small file helpers

#include <json.hpp>

#include <filesystem>
#include <string>

namespace polygrow::detail {

std::string dump17(const nlohmann::ordered_json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::ordered_json read_json_file(const std::filesystem::path& path);

}  // namespace polygrow::detail
