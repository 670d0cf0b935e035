#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace songbias::text {

// Decodes one UTF-8 codepoint starting at pos; advances pos past it.
// Invalid bytes decode as U+FFFD and advance by one byte.
inline char32_t decode_utf8(std::string_view s, std::size_t& pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    auto cont = [&](std::size_t i) {
        return i < s.size() && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
        char32_t cp = (b0 & 0x1Fu) << 6 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu);
        pos += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
        char32_t cp = (b0 & 0x0Fu) << 12 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu);
        pos += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
        char32_t cp = (b0 & 0x07u) << 18 | (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 12 |
                      (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[pos + 3]) & 0x3Fu);
        pos += 4;
        return cp;
    }
    ++pos;
    return 0xFFFD;
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

// Unicode whitespace (the set honored by word counting).
inline bool is_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case 0x0B: case 0x0C:
        case 0x85:    // NEL
        case 0xA0:    // NBSP
        case 0x1680:  // ogham space
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

inline bool is_ascii_alnum(char32_t cp) {
    return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

inline char32_t ascii_lower(char32_t cp) {
    return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
}

// Word count per the corpus filter: tokens separated by Unicode whitespace,
// nothing stripped.
inline std::size_t count_whitespace_tokens(std::string_view s) {
    std::size_t n = 0, pos = 0;
    bool in_token = false;
    while (pos < s.size()) {
        const char32_t cp = decode_utf8(s, pos);
        if (is_space(cp)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

// The shared tokenizer used by shingling, embedding training and the lexicon
// scorer: lowercased words split on whitespace and punctuation. ASCII
// alphanumerics and any codepoint >= U+0080 count as word characters, so
// "don't" tokenizes as {don, t}.
inline std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const char32_t cp = decode_utf8(s, pos);
        if (is_ascii_alnum(cp) || (cp >= 0x80 && !is_space(cp))) {
            append_utf8(cur, ascii_lower(cp));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Lines with at least one non-whitespace character, in order.
inline std::vector<std::string_view> non_empty_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string_view line = s.substr(start, end - start);
        std::size_t p = 0;
        bool blank = true;
        while (p < line.size()) {
            if (!is_space(decode_utf8(line, p))) {
                blank = false;
                break;
            }
        }
        if (!blank) out.push_back(line);
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\n') {
            flush(i);
            start = i + 1;
        }
    }
    if (start < s.size()) flush(s.size());
    return out;
}

// Folds common Latin diacritics to ASCII. Returns the replacement string, or
// nullptr when the codepoint has no mapping.
inline const char* fold_diacritic(char32_t cp) {
    switch (cp) {
        case 0xC0: case 0xC1: case 0xC2: case 0xC3: case 0xC4: case 0xC5: return "a";
        case 0xC6: return "ae";
        case 0xC7: return "c";
        case 0xC8: case 0xC9: case 0xCA: case 0xCB: return "e";
        case 0xCC: case 0xCD: case 0xCE: case 0xCF: return "i";
        case 0xD0: return "d";
        case 0xD1: return "n";
        case 0xD2: case 0xD3: case 0xD4: case 0xD5: case 0xD6: case 0xD8: return "o";
        case 0xD9: case 0xDA: case 0xDB: case 0xDC: return "u";
        case 0xDD: return "y";
        case 0xDE: return "th";
        case 0xDF: return "ss";
        case 0xE0: case 0xE1: case 0xE2: case 0xE3: case 0xE4: case 0xE5: return "a";
        case 0xE6: return "ae";
        case 0xE7: return "c";
        case 0xE8: case 0xE9: case 0xEA: case 0xEB: return "e";
        case 0xEC: case 0xED: case 0xEE: case 0xEF: return "i";
        case 0xF0: return "d";
        case 0xF1: return "n";
        case 0xF2: case 0xF3: case 0xF4: case 0xF5: case 0xF6: case 0xF8: return "o";
        case 0xF9: case 0xFA: case 0xFB: case 0xFC: return "u";
        case 0xFD: case 0xFF: return "y";
        case 0x152: return "oe";
        case 0x153: return "oe";
        case 0x160: return "s";
        case 0x161: return "s";
        case 0x178: return "y";
        case 0x17D: return "z";
        case 0x17E: return "z";
        default:
            // Latin Extended-A letters mostly strip to their base letter.
            if (cp >= 0x100 && cp <= 0x105) return "a";
            if (cp >= 0x106 && cp <= 0x10D) return "c";
            if (cp >= 0x10E && cp <= 0x111) return "d";
            if (cp >= 0x112 && cp <= 0x11B) return "e";
            if (cp >= 0x11C && cp <= 0x123) return "g";
            if (cp >= 0x124 && cp <= 0x127) return "h";
            if (cp >= 0x128 && cp <= 0x131) return "i";
            if (cp >= 0x132 && cp <= 0x133) return "ij";
            if (cp >= 0x134 && cp <= 0x135) return "j";
            if (cp >= 0x136 && cp <= 0x138) return "k";
            if (cp >= 0x139 && cp <= 0x142) return "l";
            if (cp >= 0x143 && cp <= 0x14B) return "n";
            if (cp >= 0x14C && cp <= 0x151) return "o";
            if (cp >= 0x154 && cp <= 0x159) return "r";
            if (cp >= 0x15A && cp <= 0x161) return "s";
            if (cp >= 0x162 && cp <= 0x167) return "t";
            if (cp >= 0x168 && cp <= 0x173) return "u";
            if (cp >= 0x174 && cp <= 0x175) return "w";
            if (cp >= 0x176 && cp <= 0x177) return "y";
            if (cp >= 0x179 && cp <= 0x17E) return "z";
            return nullptr;
    }
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : c);
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (static_cast<unsigned char>(s[b]) <= ' ')) ++b;
    while (e > b && (static_cast<unsigned char>(s[e - 1]) <= ' ')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace songbias::text
