#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

#include "bsce/error.hpp"

// Little-endian primitives for the dataset and checkpoint file formats.

namespace bsce::binio {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff),
                       static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff),
                       static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    write_u32(os, static_cast<std::uint32_t>(v & 0xffffffffull));
    write_u32(os, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& os, float v) {
    write_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline void write_f64(std::ostream& os, double v) {
    write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw CorruptDataError("unexpected end of file");
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& is) {
    const std::uint64_t lo = read_u32(is);
    const std::uint64_t hi = read_u32(is);
    return lo | (hi << 32);
}

inline float read_f32(std::istream& is) {
    return std::bit_cast<float>(read_u32(is));
}

inline double read_f64(std::istream& is) {
    return std::bit_cast<double>(read_u64(is));
}

inline void write_magic(std::ostream& os, std::string_view magic) {
    os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

// Throws VersionError when the leading bytes differ from `magic`, and
// CorruptDataError when the file ends before the magic does.
inline void expect_magic(std::istream& is, std::string_view magic) {
    std::string got(magic.size(), '\0');
    is.read(got.data(), static_cast<std::streamsize>(magic.size()));
    if (!is) throw CorruptDataError("unexpected end of file reading header");
    if (got != magic)
        throw VersionError("unrecognized file magic (expected " +
                           std::string(magic) + ")");
}

// After all expected content, any trailing byte means a damaged file.
inline void expect_eof(std::istream& is) {
    if (is.peek() != std::istream::traits_type::eof())
        throw CorruptDataError("trailing bytes after expected content");
}

}  // namespace bsce::binio
