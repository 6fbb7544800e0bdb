// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_MORTON_HPP
#define PCMC_MORTON_HPP

#include <array>
#include <cstdint>

namespace pcmc {

// Integer voxel coordinate. Each axis holds at most 21 bits so that the
// interleaved code fits in 63 bits.
struct VoxelIndex {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t z = 0;

    friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

namespace detail {

constexpr std::uint64_t spread_bits(std::uint64_t v) {
    v &= 0x1fffffULL;
    v = (v | (v << 32)) & 0x1f00000000ffffULL;
    v = (v | (v << 16)) & 0x1f0000ff0000ffULL;
    v = (v | (v << 8)) & 0x100f00f00f00f00fULL;
    v = (v | (v << 4)) & 0x10c30c30c30c30c3ULL;
    v = (v | (v << 2)) & 0x1249249249249249ULL;
    return v;
}

constexpr std::uint32_t compact_bits(std::uint64_t v) {
    v &= 0x1249249249249249ULL;
    v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ULL;
    v = (v ^ (v >> 4)) & 0x100f00f00f00f00fULL;
    v = (v ^ (v >> 8)) & 0x1f0000ff0000ffULL;
    v = (v ^ (v >> 16)) & 0x1f00000000ffffULL;
    v = (v ^ (v >> 32)) & 0x1fffffULL;
    return static_cast<std::uint32_t>(v);
}

}  // namespace detail

// x occupies bit 0 of every triple, y bit 1, z bit 2. The low three bits of a
// code are therefore the child octant index used by the octree serializer.
constexpr std::uint64_t morton_encode(const VoxelIndex& v) {
    return detail::spread_bits(v.x) | (detail::spread_bits(v.y) << 1) |
           (detail::spread_bits(v.z) << 2);
}

constexpr VoxelIndex morton_decode(std::uint64_t code) {
    return {detail::compact_bits(code), detail::compact_bits(code >> 1),
            detail::compact_bits(code >> 2)};
}

}  // namespace pcmc

#endif  // PCMC_MORTON_HPP
