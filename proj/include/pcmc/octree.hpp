// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_OCTREE_HPP
#define PCMC_OCTREE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pcmc/error.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc {

// One occupancy byte per internal node, depth-first. Bit b of a node byte is
// set iff child b is occupied, where b is the child's Morton octant
// (bit 0 -> x, bit 1 -> y, bit 2 -> z).
struct Octree {
    int depth = 0;
    std::vector<std::uint8_t> bytes;
};

namespace detail {

inline void emit_octree_node(std::span<const std::uint64_t> codes, int level, int depth,
                             std::vector<std::uint8_t>& out) {
    const int shift = 3 * (depth - 1 - level);
    std::uint8_t mask = 0;
    for (auto c : codes) mask |= static_cast<std::uint8_t>(1u << ((c >> shift) & 7u));
    out.push_back(mask);
    if (level + 1 == depth) return;

    // Codes are sorted, so each child's codes form a contiguous run.
    std::size_t begin = 0;
    while (begin < codes.size()) {
        const auto child = (codes[begin] >> shift) & 7u;
        std::size_t end = begin + 1;
        while (end < codes.size() && ((codes[end] >> shift) & 7u) == child) ++end;
        emit_octree_node(codes.subspan(begin, end - begin), level + 1, depth, out);
        begin = end;
    }
}

inline void parse_octree_node(std::span<const std::uint8_t> bytes, std::size_t& offset, int level,
                              int depth, std::uint64_t prefix, std::vector<std::uint64_t>& out) {
    if (offset >= bytes.size()) {
        throw StreamError(ErrorCode::MalformedStream, "octree stream truncated", offset);
    }
    const std::uint8_t mask = bytes[offset];
    if (mask == 0) {
        throw StreamError(ErrorCode::MalformedStream, "internal octree node without children",
                          offset);
    }
    ++offset;
    for (std::uint64_t child = 0; child < 8; ++child) {
        if (!(mask & (1u << child))) continue;
        const std::uint64_t code = (prefix << 3) | child;
        if (level + 1 == depth) {
            out.push_back(code);
        } else {
            parse_octree_node(bytes, offset, level + 1, depth, code, out);
        }
    }
}

}  // namespace detail

inline Octree build_octree(const VoxelSet& set) {
    if (set.empty()) throw Error(ErrorCode::EmptyInput, "cannot build an octree of an empty set");
    Octree tree{set.grid.depth, {}};
    detail::emit_octree_node(set.codes, 0, set.grid.depth, tree.bytes);
    return tree;
}

inline Octree build_octree(const VoxelFrame& frame) { return build_octree(frame.geometry()); }

inline VoxelSet decode_octree_set(std::span<const std::uint8_t> bytes, const VoxelGrid& grid) {
    VoxelSet out{grid, {}};
    std::size_t offset = 0;
    detail::parse_octree_node(bytes, offset, 0, grid.depth, 0, out.codes);
    if (offset != bytes.size()) {
        throw StreamError(ErrorCode::MalformedStream, "surplus bytes after octree", offset);
    }
    return out;
}

// Geometry-only frame; colors are left at zero.
inline VoxelFrame decode_octree(const Octree& tree, const VoxelGrid& grid) {
    if (tree.depth != grid.depth) {
        throw Error(ErrorCode::GridMismatch, "octree depth differs from grid depth");
    }
    return VoxelFrame(decode_octree_set(tree.bytes, grid));
}

}  // namespace pcmc

#endif  // PCMC_OCTREE_HPP
