#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cyclefeed/errors.hpp"

// Minimal Unicode support: strict UTF-8 transcoding plus the character
// classes the text pipeline needs. All sequence operations in this library
// are defined over Unicode scalar values, never over raw bytes.

namespace cyclefeed {

inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    const auto bad = [&] { throw input_error("invalid UTF-8 at byte " + std::to_string(i)); };
    while (i < s.size()) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        int len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            bad();
        }
        if (i + len > s.size()) bad();
        for (int j = 1; j < len; ++j) {
            const unsigned char bj = static_cast<unsigned char>(s[i + j]);
            if ((bj & 0xC0) != 0x80) bad();
            cp = (cp << 6) | (bj & 0x3F);
        }
        // reject overlong forms, surrogates and out-of-range values
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMin[len]) bad();
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) bad();
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) append_utf8(out, cp);
    return out;
}

// Simple case folding for the scripts this project meets in practice:
// ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic base blocks.
// Everything else passes through unchanged.
inline char32_t to_lower(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
    if (cp == 0x0179 || cp == 0x017B || cp == 0x017D) return cp + 1;
    if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    return cp;
}

inline bool is_whitespace(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case 0x0B: case 0x0C:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Punctuation: Unicode general categories P* over the Basic Latin, Latin-1
// and General Punctuation blocks, plus the CJK stops, which covers the
// quote and section characters common in German text. A closed set so the
// normalizer is testable.
inline bool is_punctuation(char32_t cp) {
    switch (cp) {
        case U'!': case U'"': case U'#': case U'%': case U'&': case U'\'':
        case U'(': case U')': case U'*': case U',': case U'-': case U'.':
        case U'/': case U':': case U';': case U'?': case U'@': case U'[':
        case U'\\': case U']': case U'_': case U'{': case U'}':
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB:
        case 0xBF: case 0x3001: case 0x3002:
            return true;
        default:
            return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E);
    }
}

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Unit-cost edit distance over scalar values.
inline int levenshtein(std::u32string_view a, std::u32string_view b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int> row(m + 1);
    for (size_t j = 0; j <= m; ++j) row[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            const int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[m];
}

}  // namespace cyclefeed
