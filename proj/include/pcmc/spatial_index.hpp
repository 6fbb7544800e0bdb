// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_SPATIAL_INDEX_HPP
#define PCMC_SPATIAL_INDEX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace pcmc {

struct Neighbor {
    std::size_t index;
    double dist2;

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};

// Exact k-nearest-neighbor search over a uniform bucket grid. Results are
// ordered by (squared distance, point index), which makes ties deterministic.
class SpatialIndex {
public:
    SpatialIndex(const Eigen::MatrixX3d& points, double cell = 1.0)
        : points_(points), cell_(cell) {
        for (Eigen::Index i = 0; i < points_.rows(); ++i) {
            buckets_[key(cell_of(points_.row(i)))].push_back(static_cast<std::size_t>(i));
        }
    }

    std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }

    // `exclude` skips one point index (used for self-neighbors).
    std::vector<Neighbor> knn(const Eigen::Vector3d& q, std::size_t k,
                              std::size_t exclude = std::numeric_limits<std::size_t>::max()) const {
        std::vector<Neighbor> best;
        const std::size_t available = size() - (exclude < size() ? 1 : 0);
        k = std::min(k, available);
        if (k == 0) return best;

        const auto c = cell_of(q.transpose());
        std::size_t scanned = 0;
        for (long r = 0;; ++r) {
            for (long dx = -r; dx <= r; ++dx) {
                for (long dy = -r; dy <= r; ++dy) {
                    for (long dz = -r; dz <= r; ++dz) {
                        if (std::max({std::labs(dx), std::labs(dy), std::labs(dz)}) != r) continue;
                        auto it = buckets_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
                        if (it == buckets_.end()) continue;
                        for (auto j : it->second) {
                            if (j == exclude) continue;
                            ++scanned;
                            best.push_back({j, (points_.row(static_cast<Eigen::Index>(j)).transpose() - q)
                                                   .squaredNorm()});
                        }
                    }
                }
            }
            if (best.size() >= k) {
                std::nth_element(best.begin(), best.begin() + static_cast<long>(k - 1), best.end());
                best.resize(std::max<std::size_t>(k, 0));
                // Every point within distance r*cell has been visited.
                const double covered = static_cast<double>(r) * cell_;
                const double kth = std::max_element(best.begin(), best.end())->dist2;
                if (kth <= covered * covered || scanned == available) break;
            } else if (scanned == available) {
                break;
            }
        }
        std::sort(best.begin(), best.end());
        return best;
    }

private:
    using Cell = std::array<long, 3>;

    Cell cell_of(const Eigen::RowVector3d& p) const {
        return {static_cast<long>(std::floor(p[0] / cell_)), static_cast<long>(std::floor(p[1] / cell_)),
                static_cast<long>(std::floor(p[2] / cell_))};
    }

    static std::uint64_t key(const Cell& c) {
        auto u = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1fffffULL; };
        return u(c[0]) | (u(c[1]) << 21) | (u(c[2]) << 42);
    }

    Eigen::MatrixX3d points_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace pcmc

#endif  // PCMC_SPATIAL_INDEX_HPP
