#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace linefix {

// UTF-8 <-> code point conversion. Decoding rejects overlong forms,
// surrogates and truncated sequences with DataError.
std::u32string utf8_to_u32(std::string_view text);
std::string u32_to_utf8(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);
bool is_valid_utf8(std::string_view text);

bool is_space(char32_t cp);

// Splits on runs of whitespace; no empty pieces.
std::vector<std::string_view> split_words(std::string_view text);
std::vector<std::u32string_view> split_words(std::u32string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace linefix
