// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_VOXEL_HPP
#define PCMC_VOXEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcmc/error.hpp"
#include "pcmc/morton.hpp"

namespace pcmc {

using Vec3 = Eigen::Vector3d;
using Rgb = std::array<int, 3>;

// Pre-voxelization point cloud in source units.
struct RawPointCloud {
    std::vector<Vec3> points;
    std::vector<Rgb> colors;

    std::size_t size() const { return points.size(); }

    void validate() const {
        if (points.size() != colors.size()) {
            throw Error(ErrorCode::InvalidArgument, "point and color counts differ");
        }
        for (std::size_t i = 0; i < colors.size(); ++i) {
            for (int c : colors[i]) {
                if (c < 0 || c > 255) {
                    throw Error(ErrorCode::OutOfRange,
                                "color component outside [0,255] at point " + std::to_string(i));
                }
            }
        }
    }
};

struct VoxelGrid {
    static constexpr int kMaxDepth = 21;

    Vec3 origin = Vec3::Zero();
    double stepsize = 1.0;
    int depth = 1;

    VoxelGrid() = default;
    VoxelGrid(const Vec3& origin_, double stepsize_, int depth_)
        : origin(origin_), stepsize(stepsize_), depth(depth_) {
        validate();
    }

    void validate() const {
        if (!(stepsize > 0.0) || !std::isfinite(stepsize)) {
            throw Error(ErrorCode::InvalidArgument, "grid stepsize must be positive");
        }
        if (depth < 1 || depth > kMaxDepth) {
            throw Error(ErrorCode::InvalidArgument,
                        "grid depth must lie in [1, 21], got " + std::to_string(depth));
        }
    }

    std::uint32_t extent() const { return std::uint32_t{1} << depth; }

    bool contains(const VoxelIndex& v) const {
        return v.x < extent() && v.y < extent() && v.z < extent();
    }

    friend bool operator==(const VoxelGrid& a, const VoxelGrid& b) {
        return a.origin == b.origin && a.stepsize == b.stepsize && a.depth == b.depth;
    }
};

// Occupied-voxel set kept as sorted, unique Morton codes.
struct VoxelSet {
    VoxelGrid grid;
    std::vector<std::uint64_t> codes;

    std::size_t size() const { return codes.size(); }
    bool empty() const { return codes.empty(); }

    static VoxelSet from_indices(const VoxelGrid& grid, const std::vector<VoxelIndex>& voxels) {
        VoxelSet out{grid, {}};
        out.codes.reserve(voxels.size());
        for (const auto& v : voxels) {
            if (!grid.contains(v)) {
                throw Error(ErrorCode::OutOfRange, "voxel index outside grid");
            }
            out.codes.push_back(morton_encode(v));
        }
        std::sort(out.codes.begin(), out.codes.end());
        out.codes.erase(std::unique(out.codes.begin(), out.codes.end()), out.codes.end());
        return out;
    }

    std::vector<VoxelIndex> indices() const {
        std::vector<VoxelIndex> out;
        out.reserve(codes.size());
        for (auto c : codes) out.push_back(morton_decode(c));
        return out;
    }

    friend bool operator==(const VoxelSet& a, const VoxelSet& b) {
        return a.grid == b.grid && a.codes == b.codes;
    }
};

inline Vec3 voxel_center(const VoxelIndex& v) {
    return {v.x + 0.5, v.y + 0.5, v.z + 0.5};
}

// Occupied voxels of one frame in canonical Morton order, with position and
// color signals indexed by vertex. Positions are voxel centers in grid units.
class VoxelFrame {
public:
    VoxelFrame() = default;

    // `colors` may be empty (geometry-only frame) or have one row per voxel.
    VoxelFrame(VoxelSet geometry, Eigen::MatrixX3d colors = {})
        : set_(std::move(geometry)), colors_(std::move(colors)) {
        if (colors_.rows() == 0) {
            colors_ = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(set_.size()), 3);
        }
        if (static_cast<std::size_t>(colors_.rows()) != set_.size()) {
            throw Error(ErrorCode::DimensionMismatch, "color rows do not match voxel count");
        }
        positions_.resize(static_cast<Eigen::Index>(set_.size()), 3);
        voxels_.reserve(set_.size());
        for (std::size_t n = 0; n < set_.size(); ++n) {
            auto v = morton_decode(set_.codes[n]);
            voxels_.push_back(v);
            positions_.row(static_cast<Eigen::Index>(n)) = voxel_center(v).transpose();
        }
    }

    const VoxelGrid& grid() const { return set_.grid; }
    const VoxelSet& geometry() const { return set_; }
    const std::vector<VoxelIndex>& voxels() const { return voxels_; }
    const std::vector<std::uint64_t>& codes() const { return set_.codes; }
    const Eigen::MatrixX3d& positions() const { return positions_; }
    const Eigen::MatrixX3d& colors() const { return colors_; }

    std::size_t size() const { return set_.size(); }
    bool empty() const { return set_.empty(); }

    VoxelFrame with_colors(Eigen::MatrixX3d colors) const {
        return VoxelFrame(set_, std::move(colors));
    }

private:
    VoxelSet set_;
    std::vector<VoxelIndex> voxels_;
    Eigen::MatrixX3d positions_;
    Eigen::MatrixX3d colors_;
};

// Maps raw points to leaf voxels; each occupied voxel takes the mean color of
// the points that fell into it.
inline VoxelFrame voxelize(const RawPointCloud& cloud, const VoxelGrid& grid) {
    cloud.validate();
    grid.validate();
    const double extent = static_cast<double>(grid.extent());

    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    keyed.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3 rel = (cloud.points[i] - grid.origin) / grid.stepsize;
        std::array<std::uint32_t, 3> idx{};
        for (int a = 0; a < 3; ++a) {
            const double f = std::floor(rel[a]);
            if (!std::isfinite(f) || f < 0.0 || f >= extent) {
                throw Error(ErrorCode::OutOfRange,
                            "point " + std::to_string(i) + " lies outside the grid bounding cube");
            }
            idx[a] = static_cast<std::uint32_t>(f);
        }
        keyed.emplace_back(morton_encode({idx[0], idx[1], idx[2]}), i);
    }
    std::sort(keyed.begin(), keyed.end());

    VoxelSet set{grid, {}};
    std::vector<std::array<double, 3>> sums;
    std::vector<std::size_t> counts;
    for (const auto& [code, i] : keyed) {
        if (set.codes.empty() || set.codes.back() != code) {
            set.codes.push_back(code);
            sums.push_back({0.0, 0.0, 0.0});
            counts.push_back(0);
        }
        for (int c = 0; c < 3; ++c) sums.back()[c] += cloud.colors[i][c];
        ++counts.back();
    }

    Eigen::MatrixX3d colors(static_cast<Eigen::Index>(set.size()), 3);
    for (std::size_t n = 0; n < set.size(); ++n) {
        for (int c = 0; c < 3; ++c) {
            colors(static_cast<Eigen::Index>(n), c) = sums[n][c] / static_cast<double>(counts[n]);
        }
    }
    return VoxelFrame(std::move(set), std::move(colors));
}

inline void require_same_grid(const VoxelGrid& a, const VoxelGrid& b) {
    if (!(a == b)) throw Error(ErrorCode::GridMismatch, "voxel sets live on different grids");
}

// Symmetric difference of two sorted code lists.
inline VoxelSet xor_voxel_sets(const VoxelSet& a, const VoxelSet& b) {
    require_same_grid(a.grid, b.grid);
    VoxelSet out{a.grid, {}};
    std::set_symmetric_difference(a.codes.begin(), a.codes.end(), b.codes.begin(), b.codes.end(),
                                  std::back_inserter(out.codes));
    return out;
}

inline VoxelSet xor_voxel_sets(const VoxelFrame& a, const VoxelFrame& b) {
    return xor_voxel_sets(a.geometry(), b.geometry());
}

// Toggling is its own inverse, so applying a diff is another symmetric difference.
inline VoxelSet apply_xor(const VoxelSet& base, const VoxelSet& diff) {
    return xor_voxel_sets(base, diff);
}

}  // namespace pcmc

#endif  // PCMC_VOXEL_HPP
