#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace lexkit {

// Object-per-line JSON files. ordered_json keeps field order stable so emitted
// artifacts are byte-reproducible.
using Json = nlohmann::ordered_json;

std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace lexkit
