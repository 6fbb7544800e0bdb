// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_CODEC_GEOMETRY_CODING_HPP
#define PCMC_CODEC_GEOMETRY_CODING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pcmc/bitstream.hpp"
#include "pcmc/error.hpp"
#include "pcmc/octree.hpp"
#include "pcmc/rlgr.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::codec {

// Geometry payload: [mode u8] then
//   mode 0: nothing (empty set),
//   mode 1: [u32 node count][octree bytes],
//   mode 2: [u32 node count][RLGR payload of the octree bits, MSB first].
// The encoder picks whichever of modes 1 and 2 is shorter.
enum class GeometryMode : std::uint8_t { Empty = 0, RawOctree = 1, RlgrOctree = 2 };

inline std::vector<std::uint8_t> encode_voxel_set(const VoxelSet& set) {
    std::vector<std::uint8_t> out;
    if (set.empty()) {
        out.push_back(static_cast<std::uint8_t>(GeometryMode::Empty));
        return out;
    }
    const auto tree = build_octree(set);
    std::vector<std::int32_t> bits;
    bits.reserve(tree.bytes.size() * 8);
    for (auto b : tree.bytes) {
        for (int k = 7; k >= 0; --k) bits.push_back((b >> k) & 1);
    }
    const auto coded = rlgr::encode_payload(bits);
    const bool use_rlgr = coded.size() < tree.bytes.size();
    out.push_back(static_cast<std::uint8_t>(use_rlgr ? GeometryMode::RlgrOctree : GeometryMode::RawOctree));
    put_u32(out, static_cast<std::uint32_t>(tree.bytes.size()));
    if (use_rlgr) out.insert(out.end(), coded.begin(), coded.end());
    else out.insert(out.end(), tree.bytes.begin(), tree.bytes.end());
    return out;
}

inline VoxelSet decode_voxel_set(std::span<const std::uint8_t> payload, const VoxelGrid& grid) {
    ByteReader br(payload);
    const auto mode = br.u8();
    if (mode == static_cast<std::uint8_t>(GeometryMode::Empty)) {
        if (br.remaining()) throw StreamError(ErrorCode::MalformedStream, "data after empty geometry flag", br.position());
        return VoxelSet{grid, {}};
    }
    const std::uint32_t nodes = br.u32();
    std::vector<std::uint8_t> bytes;
    if (mode == static_cast<std::uint8_t>(GeometryMode::RawOctree)) {
        const auto raw = br.take(nodes);
        bytes.assign(raw.begin(), raw.end());
        if (br.remaining()) throw StreamError(ErrorCode::MalformedStream, "surplus geometry bytes", br.position());
    } else if (mode == static_cast<std::uint8_t>(GeometryMode::RlgrOctree)) {
        const auto bits = rlgr::decode_payload(payload.subspan(br.position()));
        if (bits.size() != static_cast<std::size_t>(nodes) * 8) {
            throw StreamError(ErrorCode::MalformedStream, "octree bit count mismatch", br.position());
        }
        bytes.assign(nodes, 0);
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] != 0 && bits[i] != 1) throw StreamError(ErrorCode::MalformedStream, "non-binary octree bit", i);
            if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        }
    } else {
        throw StreamError(ErrorCode::MalformedStream, "unknown geometry mode", 0);
    }
    return decode_octree_set(bytes, grid);
}

// Intra geometry: the octree of the frame itself.
inline std::vector<std::uint8_t> encode_geometry_I(const VoxelSet& target) {
    if (target.empty()) throw Error(ErrorCode::EmptyInput, "cannot code an empty frame");
    return encode_voxel_set(target);
}

inline VoxelSet decode_geometry_I(std::span<const std::uint8_t> payload, const VoxelGrid& grid) {
    return decode_voxel_set(payload, grid);
}

// Predicted geometry: the octree of (warped XOR target).
inline std::vector<std::uint8_t> encode_geometry_P(const VoxelSet& warped, const VoxelSet& target) {
    return encode_voxel_set(xor_voxel_sets(warped, target));
}

inline VoxelSet decode_geometry_P(const VoxelSet& warped, std::span<const std::uint8_t> payload) {
    return apply_xor(warped, decode_voxel_set(payload, warped.grid));
}

}  // namespace pcmc::codec

#endif  // PCMC_CODEC_GEOMETRY_CODING_HPP
