// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_CODEC_PREDICTION_HPP
#define PCMC_CODEC_PREDICTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pcmc/error.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/spatial_index.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::codec {

// Reference frame displaced by decoded motion. Points stay indexed like the
// reference vertices; `occupied` is their re-voxelized footprint.
struct WarpedFrame {
    Eigen::MatrixX3d points;  // grid units
    Eigen::MatrixX3d colors;
    VoxelSet occupied;
    std::size_t clamped = 0;  // points moved outside the grid and pulled back
};

inline WarpedFrame warp_frame(const VoxelFrame& reference, const motion::MotionField& motion) {
    if (motion.size() != reference.size()) {
        throw Error(ErrorCode::DimensionMismatch, "motion field length differs from reference size");
    }
    WarpedFrame out;
    out.points = reference.positions() + motion.rows();
    out.colors = reference.colors();
    out.occupied.grid = reference.grid();
    const double hi = static_cast<double>(reference.grid().extent()) - 1.0;
    std::vector<VoxelIndex> cells;
    cells.reserve(reference.size());
    for (Eigen::Index m = 0; m < out.points.rows(); ++m) {
        std::uint32_t idx[3];
        bool clamped = false;
        for (int a = 0; a < 3; ++a) {
            double f = std::floor(out.points(m, a));
            if (!(f >= 0.0 && f <= hi)) {
                f = std::isnan(f) ? 0.0 : std::clamp(f, 0.0, hi);
                clamped = true;
            }
            idx[a] = static_cast<std::uint32_t>(f);
        }
        if (clamped) {
            ++out.clamped;
            for (int a = 0; a < 3; ++a) out.points(m, a) = idx[a] + 0.5;
        }
        cells.push_back({idx[0], idx[1], idx[2]});
    }
    out.occupied = VoxelSet::from_indices(reference.grid(), cells);
    return out;
}

// Mean color of the `nn` nearest source points for every query position.
inline Eigen::MatrixX3d nearest_neighbor_colors(const Eigen::MatrixX3d& source_points,
                                                const Eigen::MatrixX3d& source_colors,
                                                const Eigen::MatrixX3d& queries, std::size_t nn) {
    if (source_points.rows() == 0) throw Error(ErrorCode::EmptyInput, "no source points for color prediction");
    if (nn < 1) throw Error(ErrorCode::InvalidArgument, "neighbor count must be at least 1");
    SpatialIndex index(source_points, 1.0);
    Eigen::MatrixX3d out(queries.rows(), 3);
    for (Eigen::Index n = 0; n < queries.rows(); ++n) {
        const auto hits = index.knn(queries.row(n).transpose(), nn);
        Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
        for (const auto& h : hits) acc += source_colors.row(static_cast<Eigen::Index>(h.index));
        out.row(n) = acc / static_cast<double>(hits.size());
    }
    return out;
}

inline Eigen::MatrixX3d predict_color(const WarpedFrame& warped, const VoxelFrame& target, std::size_t nn = 3) {
    return nearest_neighbor_colors(warped.points, warped.colors, target.positions(), nn);
}

// 20 log10(|c| / |c - prediction|) over all channels, capped at `cap` dB.
inline double prediction_snr_db(const Eigen::MatrixX3d& actual, const Eigen::MatrixX3d& predicted, double cap = 99.0) {
    const double err = (actual - predicted).norm();
    const double sig = actual.norm();
    if (err == 0.0) return cap;
    return std::min(cap, 20.0 * std::log10(sig / err));
}

}  // namespace pcmc::codec

#endif  // PCMC_CODEC_PREDICTION_HPP
