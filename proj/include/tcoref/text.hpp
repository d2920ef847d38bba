#ifndef TCOREF_TEXT_HPP
#define TCOREF_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tcoref {

// Decodes the UTF-8 code point starting at s[pos]. Invalid bytes decode as
// themselves (latin-1 fallback) so malformed blog text never throws.
inline char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* advance = nullptr) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    unsigned char b0 = byte(pos);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0 && pos + 3 < s.size()) {
        cp = ((b0 & 0x07u) << 18) | ((byte(pos + 1) & 0x3Fu) << 12) |
             ((byte(pos + 2) & 0x3Fu) << 6) | (byte(pos + 3) & 0x3Fu);
        len = 4;
    } else if (b0 >= 0xE0 && pos + 2 < s.size()) {
        cp = ((b0 & 0x0Fu) << 12) | ((byte(pos + 1) & 0x3Fu) << 6) | (byte(pos + 2) & 0x3Fu);
        len = 3;
    } else if (b0 >= 0xC0 && pos + 1 < s.size()) {
        cp = ((b0 & 0x1Fu) << 6) | (byte(pos + 1) & 0x3Fu);
        len = 2;
    }
    if (advance) *advance = len;
    return cp;
}

inline void encode_utf8(char32_t cp, std::string& out) {
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

// Uppercase per Unicode simple case mapping for the scripts that show up in
// blog text: basic latin, latin-1, latin extended-A, greek, cyrillic.
inline bool is_upper_codepoint(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return true;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2) == 0;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2) == 1;
    if (cp >= 0x14A && cp <= 0x177) return (cp % 2) == 0;
    if (cp == 0x178) return true;
    if (cp >= 0x179 && cp <= 0x17D) return (cp % 2) == 1;
    if (cp >= 0x386 && cp <= 0x3AB) return cp != 0x387 && (cp < 0x3AC);
    if (cp >= 0x391 && cp <= 0x3A9) return cp != 0x3A2;
    if (cp >= 0x400 && cp <= 0x42F) return true;
    return false;
}

inline char32_t fold_codepoint(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        return (cp % 2) == 0 ? cp + 1 : cp;
    }
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
        return (cp % 2) == 1 ? cp + 1 : cp;
    }
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

inline std::string fold_case(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t adv = 1;
        char32_t cp = decode_utf8(s, i, &adv);
        encode_utf8(fold_codepoint(cp), out);
        i += adv;
    }
    return out;
}

inline bool starts_with_uppercase(std::string_view token) {
    if (token.empty()) return false;
    return is_upper_codepoint(decode_utf8(token, 0));
}

inline std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0, i = 0;
    while (i < s.size()) {
        std::size_t adv = 1;
        decode_utf8(s, i, &adv);
        i += adv;
        ++n;
    }
    return n;
}

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Plain whitespace split; used by the language gate, which counts raw tokens.
inline std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

inline bool is_word_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c >= 0x80;
}

// Strips surrounding punctuation from a whitespace token ("Kinect," -> "Kinect").
// Interior punctuation such as apostrophes and dots is kept.
inline std::string_view strip_punct(std::string_view token) {
    std::size_t b = 0, e = token.size();
    while (b < e && !is_word_char(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && !is_word_char(static_cast<unsigned char>(token[e - 1]))) --e;
    return token.substr(b, e - b);
}

// Token stream for term extraction: whitespace split, punctuation stripped,
// empty tokens dropped. Token offsets downstream index into this sequence.
inline std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (std::string_view raw : split_whitespace(text)) {
        std::string_view w = strip_punct(raw);
        if (!w.empty()) out.emplace_back(w);
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace tcoref

#endif  // TCOREF_TEXT_HPP
