#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace linefix {

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);
std::uint64_t fnv1a64(std::string_view data);

}  // namespace linefix
