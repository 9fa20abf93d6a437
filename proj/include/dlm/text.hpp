#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dlm {

// Words are handled as UTF-8 on the outside and as code points wherever
// letters are counted, so that n-grams never split a multi-byte letter.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(char32_t c);

/// Lowercases ASCII and the Latin-1 / Latin Extended-A letters.
std::string to_lower(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

} // namespace dlm
