#pragma once

#include <string>
#include <string_view>

namespace lexkit {

// SHA-256 hex digest of a byte string.
std::string sha256_hex(std::string_view data);

// SHA-256 hex digest of a file's contents.
std::string sha256_file(const std::string& path);

}  // namespace lexkit
