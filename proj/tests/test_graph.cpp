// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "pcmc/graph.hpp"

using namespace pcmc;

namespace {

VoxelGrid grid_of(int depth) { return VoxelGrid(Vec3::Zero(), 1.0, depth); }

VoxelFrame random_frame(std::mt19937_64& rng, std::size_t count, int depth) {
    std::uniform_int_distribution<std::uint32_t> u(0, (1u << depth) - 1);
    std::vector<VoxelIndex> v;
    std::set<std::uint64_t> seen;
    while (v.size() < count) {
        const VoxelIndex x{u(rng), u(rng), u(rng)};
        if (seen.insert(morton_encode(x)).second) v.push_back(x);
    }
    return VoxelFrame(VoxelSet::from_indices(grid_of(depth), v));
}

// O(N^2) k-NN with (distance, index) ordering and union symmetrization.
std::set<std::pair<std::size_t, std::size_t>> brute_knn(const Eigen::MatrixX3d& P, std::size_t k) {
    std::set<std::pair<std::size_t, std::size_t>> edges;
    const auto n = static_cast<std::size_t>(P.rows());
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) d.emplace_back((P.row(static_cast<Eigen::Index>(i)) - P.row(static_cast<Eigen::Index>(j))).squaredNorm(), j);
        }
        std::sort(d.begin(), d.end());
        for (std::size_t r = 0; r < std::min(k, d.size()); ++r) edges.insert({std::min(i, d[r].second), std::max(i, d[r].second)});
    }
    return edges;
}

std::size_t union_find_components(const VoxelGraph& g) {
    std::vector<std::size_t> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& e : g.edges()) parent[find(e.i)] = find(e.j);
    std::set<std::size_t> roots;
    for (std::size_t v = 0; v < g.size(); ++v) roots.insert(find(v));
    return roots.size();
}

Eigen::MatrixX3d random_points(std::mt19937_64& rng, int n, double extent) {
    std::uniform_real_distribution<double> u(0.0, extent);
    Eigen::MatrixX3d P(n, 3);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a) P(i, a) = u(rng);
    return P;
}

}  // namespace

TEST(Knn, TwoVoxelsOneEdge) {
    const VoxelFrame f(VoxelSet::from_indices(grid_of(2), {{0, 0, 0}, {1, 0, 0}}));
    const auto g = build_knn_graph(f);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 1.0);
}

TEST(Knn, FullBlockCenterHas26Neighbors) {
    std::vector<VoxelIndex> v;
    for (std::uint32_t x = 0; x < 3; ++x)
        for (std::uint32_t y = 0; y < 3; ++y)
            for (std::uint32_t z = 0; z < 3; ++z) v.push_back({x, y, z});
    const VoxelFrame f(VoxelSet::from_indices(grid_of(2), v));
    const auto g = build_knn_graph(f, 26);
    const auto center = static_cast<std::size_t>(
        std::lower_bound(f.codes().begin(), f.codes().end(), morton_encode({1, 1, 1})) - f.codes().begin());
    EXPECT_EQ(g.neighbors(center).size(), 26u);
}

TEST(Knn, SingleVertexHasNoEdges) {
    const VoxelFrame f(VoxelSet::from_indices(grid_of(2), {{1, 1, 1}}));
    const auto g = build_knn_graph(f);
    EXPECT_EQ(g.size(), 1u);
    EXPECT_TRUE(g.edges().empty());
}

TEST(Knn, MatchesBruteForce) {
    std::mt19937_64 rng(31);
    for (std::size_t k : {1u, 6u, 26u}) {
        const auto f = random_frame(rng, 200, 4);
        const auto g = build_knn_graph(f, k);
        const auto oracle = brute_knn(f.positions(), k);
        ASSERT_EQ(g.edges().size(), oracle.size()) << "k=" << k;
        for (const auto& e : g.edges()) {
            EXPECT_TRUE(oracle.count({e.i, e.j}));
            const double d = (f.positions().row(static_cast<Eigen::Index>(e.i)) - f.positions().row(static_cast<Eigen::Index>(e.j))).norm();
            EXPECT_NEAR(e.weight, 1.0 / d, 1e-15);
        }
    }
}

TEST(Knn, Deterministic) {
    std::mt19937_64 rng(2);
    const auto f = random_frame(rng, 300, 5);
    EXPECT_EQ(build_knn_graph(f).edges(), build_knn_graph(f).edges());
}

TEST(Laplacian, Examples) {
    const VoxelGraph two(2, {{0, 1, 1.0}});
    Eigen::Matrix2d expect;
    expect << 1, -1, -1, 1;
    EXPECT_EQ(Eigen::MatrixXd(laplacian(two)), Eigen::MatrixXd(expect));
    EXPECT_EQ(Eigen::MatrixXd(laplacian(VoxelGraph(4, {}))), Eigen::MatrixXd::Zero(4, 4));

    std::mt19937_64 rng(3);
    const auto g = build_knn_graph(random_frame(rng, 150, 4), 8);
    const Eigen::MatrixXd L(laplacian(g));
    EXPECT_LT((L * Eigen::VectorXd::Ones(150)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((L - L.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    for (const auto& e : g.edges()) EXPECT_EQ(L(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)), -e.weight);
    const Eigen::VectorXd x = Eigen::VectorXd::Random(150);
    EXPECT_LT((g.apply_laplacian(x) - L * x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Graph, RejectsBadEdges) {
    EXPECT_THROW(VoxelGraph(2, {{1, 0, 1.0}}), Error);
    EXPECT_THROW(VoxelGraph(2, {{0, 1, 0.0}}), Error);
    EXPECT_THROW(VoxelGraph(2, {{0, 1, 1.0}, {0, 1, 2.0}}), Error);
    EXPECT_THROW(VoxelGraph(2, {{0, 2, 1.0}}), Error);
}

TEST(Spectrum, TwoNode) {
    const auto s = eigendecompose(VoxelGraph(2, {{0, 1, 1.0}}));
    EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-15);
    EXPECT_NEAR(s.eigenvalues[1], 2.0, 1e-14);
}

// P3 with unit weights: characteristic polynomial x (x - 1) (x - 3).
TEST(Spectrum, PathThree) {
    const auto s = eigendecompose(VoxelGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-14);
    EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-14);
    EXPECT_NEAR(s.eigenvalues[2], 3.0, 1e-14);
    for (int l = 0; l < 3; ++l) {
        const double x = s.eigenvalues[l];
        EXPECT_NEAR(x * (x - 1) * (x - 3), 0.0, 1e-12);
    }
}

TEST(Spectrum, InvariantsOnRandomGraphs) {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 200);
        const auto g = build_knn_graph(random_points(rng, n, 6.0 + trial), 1 + rng() % 10);
        const auto s = eigendecompose(g);
        const Eigen::MatrixXd L(laplacian(g));
        const double lnorm = L.norm();
        EXPECT_LT((L * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(), 1e-8 * lnorm);
        EXPECT_LT((s.eigenvectors.transpose() * s.eigenvectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_GE(s.eigenvalues.minCoeff(), -1e-10);
        EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
        EXPECT_EQ(s.zero_count(), union_find_components(g));
        for (int l = 0; l < n; ++l) {
            const auto col = s.eigenvectors.col(l);
            for (int r = 0; r < n; ++r) {
                if (std::abs(col[r]) > 1e-10) {
                    EXPECT_GT(col[r], 0.0);
                    break;
                }
            }
        }
    }
}

TEST(Spectrum, Capacity) {
    EXPECT_THROW(eigendecompose(VoxelGraph(10, {}), 5), Error);
    const auto s = eigendecompose(VoxelGraph(4, {}));
    EXPECT_EQ(s.zero_count(), 4u);
}

TEST(Gft, Examples) {
    const auto s = eigendecompose(VoxelGraph(2, {{0, 1, 1.0}}));
    const Eigen::VectorXd F = gft(s, Eigen::Vector2d(1, 1));
    EXPECT_NEAR(F[0], std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(F[1], 0.0, 1e-14);
    EXPECT_THROW(gft(s, Eigen::Vector3d(1, 1, 1)), Error);
    EXPECT_THROW(inverse_gft(s, Eigen::Vector3d(1, 1, 1)), Error);

    std::mt19937_64 rng(5);
    const int n = 80;
    const auto g = build_knn_graph(random_points(rng, n, 3.0), 10);
    const auto sp = eigendecompose(g);
    ASSERT_EQ(sp.zero_count(), 1u);
    for (int l : {0, 3, n - 1}) {
        const Eigen::VectorXd e = gft(sp, sp.eigenvectors.col(l));
        EXPECT_LT((e - Eigen::VectorXd::Unit(n, l)).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_LT((inverse_gft(sp, Eigen::VectorXd::Unit(n, 0)).array() - 1.0 / std::sqrt(n)).abs().maxCoeff(), 1e-10);
    EXPECT_EQ(inverse_gft(sp, Eigen::VectorXd::Zero(n)), Eigen::MatrixXd::Zero(n, 1));
    const Eigen::VectorXd c = gft(sp, Eigen::VectorXd::Constant(n, 3.0));
    EXPECT_LT(c.tail(n - 1).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Gft, ParsevalAndRoundTrip) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 10 + static_cast<int>(rng() % 300);
        const auto sp = eigendecompose(build_knn_graph(random_points(rng, n, 5.0), 6));
        const Eigen::VectorXd f = Eigen::VectorXd::Random(n) * 100.0;
        const Eigen::VectorXd F = gft(sp, f);
        EXPECT_NEAR(F.norm(), f.norm(), 1e-8);
        EXPECT_LT((inverse_gft(sp, F) - f).cwiseAbs().maxCoeff(), 1e-8);
    }
}
