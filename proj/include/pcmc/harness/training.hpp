// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_HARNESS_TRAINING_HPP
#define PCMC_HARNESS_TRAINING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/morton.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/sgw.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::harness {

struct TrainingConfig {
    std::size_t transforms = 4;
    double max_rotation_deg = 4.0;
    double max_translation = 2.0;  // voxels, per axis
    std::size_t max_pairs = 4000;
    double relative_epsilon = 1e-3;  // ridge relative to the mean descriptor-difference variance
    std::uint64_t seed = 7;
};

// Moves a frame rigidly about its centroid and re-voxelizes it. Returns the
// moved frame and, for every source vertex, the target vertex it lands in
// (or SIZE_MAX when it left the grid).
inline std::pair<VoxelFrame, std::vector<std::size_t>> rigid_revoxelize(const VoxelFrame& frame,
                                                                        const Eigen::Matrix3d& R,
                                                                        const Eigen::Vector3d& t) {
    const Eigen::RowVector3d centroid = frame.positions().colwise().mean();
    const double hi = static_cast<double>(frame.grid().extent());
    RawPointCloud cloud;
    std::vector<Eigen::Vector3d> moved;
    std::vector<std::size_t> kept;
    for (std::size_t m = 0; m < frame.size(); ++m) {
        const auto row = static_cast<Eigen::Index>(m);
        const Eigen::Vector3d p = R * (frame.positions().row(row) - centroid).transpose() + centroid.transpose() + t;
        if ((p.array() < 0.0).any() || (p.array() >= hi).any()) continue;
        const Eigen::RowVector3d c = frame.colors().row(row);
        cloud.points.push_back(frame.grid().origin + frame.grid().stepsize * p);
        cloud.colors.push_back({static_cast<int>(std::lround(std::clamp(c[0], 0.0, 255.0))),
                                static_cast<int>(std::lround(std::clamp(c[1], 0.0, 255.0))),
                                static_cast<int>(std::lround(std::clamp(c[2], 0.0, 255.0)))});
        moved.push_back(p);
        kept.push_back(m);
    }
    if (cloud.points.empty()) throw Error(ErrorCode::EmptyInput, "rigid transform moved every voxel off the grid");
    VoxelFrame out = voxelize(cloud, frame.grid());
    std::vector<std::size_t> landing(frame.size(), SIZE_MAX);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const VoxelIndex v{static_cast<std::uint32_t>(moved[k].x()), static_cast<std::uint32_t>(moved[k].y()),
                           static_cast<std::uint32_t>(moved[k].z())};
        const auto it = std::lower_bound(out.codes().begin(), out.codes().end(), morton_encode(v));
        landing[kept[k]] = static_cast<std::size_t>(it - out.codes().begin());
    }
    return {std::move(out), std::move(landing)};
}

// Precision model from descriptor pairs of a frame and rigidly moved copies
// of it, where the true correspondence is known.
inline motion::PrecisionModel train_precision_rigid(const VoxelFrame& frame, const motion::MotionConfig& config,
                                                    const TrainingConfig& training = {}) {
    if (frame.empty()) throw Error(ErrorCode::EmptyInput, "cannot train on an empty frame");
    std::mt19937_64 rng(training.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const auto graph = build_knn_graph(frame, config.k_neighbors);
    const auto ref_desc = sgw::compute_all_descriptors(frame, graph, config.wavelet);

    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    const std::size_t per_transform = std::max<std::size_t>(1, training.max_pairs / std::max<std::size_t>(1, training.transforms));
    for (std::size_t k = 0; k < training.transforms; ++k) {
        const Eigen::Vector3d axis = Eigen::Vector3d(nd(rng), nd(rng), nd(rng)).normalized();
        const double angle = unit(rng) * training.max_rotation_deg * std::numbers::pi / 180.0;
        const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
        const Eigen::Vector3d t(unit(rng) * training.max_translation, unit(rng) * training.max_translation,
                                unit(rng) * training.max_translation);
        const auto [moved, landing] = rigid_revoxelize(frame, R, t);
        const auto moved_graph = build_knn_graph(moved, config.k_neighbors);
        const auto moved_desc = sgw::compute_all_descriptors(moved, moved_graph, config.wavelet);

        std::vector<std::size_t> order;
        for (std::size_t m = 0; m < frame.size(); ++m) {
            if (landing[m] != SIZE_MAX) order.push_back(m);
        }
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(std::min(order.size(), per_transform));
        for (auto m : order) pairs.emplace_back(ref_desc[m].values, moved_desc[landing[m]].values);
    }

    double variance = 0.0;
    for (const auto& [a, b] : pairs) variance += (a - b).squaredNorm();
    variance /= static_cast<double>(pairs.size() * static_cast<std::size_t>(pairs.front().first.size()));
    const double epsilon = training.relative_epsilon * std::max(variance, 1e-12);
    return motion::train_precision(pairs, epsilon,
                                   "rigid-self:" + std::to_string(frame.size()) + ":" + std::to_string(training.seed));
}

}  // namespace pcmc::harness

#endif  // PCMC_HARNESS_TRAINING_HPP
