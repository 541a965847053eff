#pragma once

// Little-endian primitive encoding shared by the TEMB and TSCR formats.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <type_traits>

namespace aligner::detail {

template <typename T>
    requires std::is_unsigned_v<T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    }
    out.write(bytes.data(), bytes.size());
}

inline void put_f32(std::ostream& out, float value) {
    put_le(out, std::bit_cast<std::uint32_t>(value));
}

// Returns false on short read.
template <typename T>
    requires std::is_unsigned_v<T>
bool get_le(std::istream& in, T& value) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
    value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= static_cast<T>(static_cast<T>(bytes[i]) << (8 * i));
    }
    return true;
}

inline float f32_from_le(const unsigned char* p) {
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) |
                         (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

} // namespace aligner::detail
