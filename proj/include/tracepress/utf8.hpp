#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tracepress {

// Minimal UTF-8 decode/encode. Invalid bytes are passed through one at a
// time as their byte value, so malformed input never throws.
inline std::vector<uint32_t> utf8_decode(const std::string &s) {
    std::vector<uint32_t> out;
    out.reserve(s.size());
    size_t i = 0;
    const size_t n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        uint32_t cp = b0;
        size_t len = 1;
        if (b0 < 0x80) {
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        }
        if (len > 1) {
            if (i + len > n) {
                out.push_back(b0);
                ++i;
                continue;
            }
            bool valid = true;
            uint32_t acc = cp;
            for (size_t k = 1; k < len; ++k) {
                const auto bk = static_cast<unsigned char>(s[i + k]);
                if ((bk & 0xC0) != 0x80) {
                    valid = false;
                    break;
                }
                acc = (acc << 6) | (bk & 0x3F);
            }
            if (!valid) {
                out.push_back(b0);
                ++i;
                continue;
            }
            cp = acc;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void utf8_append(std::string &s, uint32_t cp) {
    if (cp < 0x80) {
        s.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        s.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace tracepress
