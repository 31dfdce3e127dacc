#pragma once

#include <openssl/sha.h>

#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace concap {

// Lowercase, collapse internal whitespace runs to one space, trim.
inline std::string normalize_text(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

// Word tokens of normalized text: maximal runs of [a-z0-9'].
inline std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : normalize_text(s)) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'') {
            cur.push_back(c);
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

using Digest = std::array<unsigned char, SHA256_DIGEST_LENGTH>;

inline Digest sha256(std::string_view data) {
    Digest d{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), d.data());
    return d;
}

inline std::string to_hex(const unsigned char* p, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(2 * n, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = digits[p[i] >> 4];
        out[2 * i + 1] = digits[p[i] & 0xf];
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    auto d = sha256(data);
    return to_hex(d.data(), d.size());
}

inline std::string hex64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 7; i >= 0; --i, v >>= 8) b[i] = static_cast<unsigned char>(v & 0xff);
    return to_hex(b, 8);
}

// First 8 digest bytes, big-endian.
inline std::uint64_t hash64(std::string_view data) {
    auto d = sha256(data);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
    return v;
}

// Field separator for hashed composite keys.
inline constexpr char kUnitSep = '\x1f';

template <typename... Parts>
std::string join_key(const Parts&... parts) {
    std::string out;
    bool first = true;
    ((out += (first ? "" : std::string(1, kUnitSep)), out += std::string_view(parts), first = false), ...);
    return out;
}

// Maps a 64-bit draw onto [0, n) without modulo bias at this precision.
inline std::size_t scale_draw(std::uint64_t draw, std::size_t n) {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(draw) * n) >> 64);
}

// draw / 2^64, in [0, 1).
inline double unit_from_u64(std::uint64_t draw) {
    return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

}  // namespace concap
