#include "dlm/text.hpp"

#include "dlm/error.hpp"

namespace dlm {

std::u32string utf8_decode(std::string_view s)
{
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const auto b = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b < 0x80) {
            cp = b;
            len = 1;
        } else if ((b & 0xE0) == 0xC0) {
            cp = b & 0x1F;
            len = 2;
        } else if ((b & 0xF0) == 0xE0) {
            cp = b & 0x0F;
            len = 3;
        } else if ((b & 0xF8) == 0xF0) {
            cp = b & 0x07;
            len = 4;
        } else {
            throw ArgumentError("invalid UTF-8 lead byte in '" + std::string(s) + "'");
        }
        if (i + len > s.size())
            throw ArgumentError("truncated UTF-8 sequence in '" + std::string(s) + "'");
        for (std::size_t k = 1; k < len; ++k) {
            const auto c = static_cast<unsigned char>(s[i + k]);
            if ((c & 0xC0) != 0x80)
                throw ArgumentError("invalid UTF-8 continuation byte in '" + std::string(s) + "'");
            cp = (cp << 6) | (c & 0x3F);
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(char32_t c)
{
    std::string out;
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
    return out;
}

std::string utf8_encode(std::u32string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (char32_t c : s)
        out += utf8_encode(c);
    return out;
}

std::string to_lower(std::string_view s)
{
    std::u32string cps = utf8_decode(s);
    for (char32_t& c : cps) {
        if (c >= U'A' && c <= U'Z')
            c += 32;
        else if (c >= 0xC0 && c <= 0xDE && c != 0xD7)
            c += 32;
        else if (c == 0x178)
            c = 0xFF;
        // Latin Extended-A pairs: upper case is even up to U+0137 and in
        // U+014A..U+0177, odd in U+0139..U+0148 and U+0179..U+017E.
        else if (c >= 0x100 && c <= 0x137 && c != 0x130 && c % 2 == 0)
            c += 1;
        else if (c >= 0x139 && c <= 0x148 && c % 2 == 1)
            c += 1;
        else if (c >= 0x14A && c <= 0x177 && c % 2 == 0)
            c += 1;
        else if (c >= 0x179 && c <= 0x17E && c % 2 == 1)
            c += 1;
    }
    return utf8_encode(cps);
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace dlm
