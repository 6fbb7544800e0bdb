// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "pcmc/sgw.hpp"

using namespace pcmc;
using namespace pcmc::sgw;

namespace {

VoxelGrid grid_of(int depth) { return VoxelGrid(Vec3::Zero(), 1.0, depth); }

VoxelFrame random_frame(std::mt19937_64& rng, std::size_t count, int depth) {
    std::uniform_int_distribution<std::uint32_t> u(0, (1u << depth) - 1);
    std::uniform_real_distribution<double> c(0.0, 255.0);
    std::vector<VoxelIndex> v;
    std::set<std::uint64_t> seen;
    while (v.size() < count) {
        const VoxelIndex x{u(rng), u(rng), u(rng)};
        if (seen.insert(morton_encode(x)).second) v.push_back(x);
    }
    auto set = VoxelSet::from_indices(grid_of(depth), v);
    Eigen::MatrixX3d colors(static_cast<Eigen::Index>(count), 3);
    for (auto& x : colors.reshaped()) x = c(rng);
    return VoxelFrame(std::move(set), colors);
}

VoxelGraph random_graph(std::mt19937_64& rng, int n, std::size_t k) {
    std::uniform_real_distribution<double> u(0.0, 1.5 * std::cbrt(static_cast<double>(n)));
    Eigen::MatrixX3d P(n, 3);
    for (auto& x : P.reshaped()) x = u(rng);
    return build_knn_graph(P, k);
}

// Worst |chebyshev - exact| / ||f|| over all bands for one signal.
double chebyshev_error(const VoxelGraph& g, const WaveletConfig& cfg, const Eigen::VectorXd& f) {
    const auto spectrum = eigendecompose(g);
    const FilterBank bank(cfg, estimate_lambda_max(g));
    const Eigen::MatrixXd approx = sgw_transform(g, cfg, f);
    const Eigen::MatrixXd exact = sgw_transform_exact(spectrum, bank, f);
    return (approx - exact).cwiseAbs().maxCoeff() / f.norm();
}

}  // namespace

TEST(Kernel, BandPassShape) {
    EXPECT_EQ(band_pass(0.0), 0.0);
    EXPECT_DOUBLE_EQ(band_pass(0.5), 0.25);
    EXPECT_DOUBLE_EQ(band_pass(1.0), 1.0);
    EXPECT_DOUBLE_EQ(band_pass(2.0), 1.0);
    EXPECT_DOUBLE_EQ(band_pass(4.0), 0.25);
    // C1 joins at the knots.
    const double h = 1e-6;
    for (double x : {1.0, 2.0}) {
        EXPECT_NEAR((band_pass(x + h) - band_pass(x)) / h, (band_pass(x) - band_pass(x - h)) / h, 1e-4);
    }
    double peak = 0.0;
    for (double x = 1.0; x <= 2.0; x += 1e-5) peak = std::max(peak, band_pass(x));
    EXPECT_NEAR(band_pass_peak(), peak, 1e-9);
}

TEST(Kernel, ScalesMonotone) {
    const FilterBank bank(WaveletConfig{}, 12.0);
    ASSERT_EQ(bank.scales().size(), 4u);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_GT(bank.scales()[i], bank.scales()[i - 1]);
    EXPECT_NEAR(bank.scales().front(), 1.0 / 12.0, 1e-15);
    EXPECT_NEAR(bank.kernel(0, 0.0), band_pass_peak(), 1e-15);
    for (std::size_t b = 1; b < bank.bands(); ++b) EXPECT_EQ(bank.kernel(b, 0.0), 0.0);
}

TEST(Config, Validation) {
    WaveletConfig c;
    c.chebyshev_degree = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.num_scales = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.lowpass_factor = 1.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Octant, IndicatorRules) {
    const VoxelFrame f(VoxelSet::from_indices(grid_of(3), {{2, 2, 2}, {3, 3, 3}, {1, 3, 2}, {1, 1, 1}}));
    const auto i = static_cast<std::size_t>(
        std::lower_bound(f.codes().begin(), f.codes().end(), morton_encode({2, 2, 2})) - f.codes().begin());
    const auto j = static_cast<std::size_t>(
        std::lower_bound(f.codes().begin(), f.codes().end(), morton_encode({3, 3, 3})) - f.codes().begin());
    EXPECT_EQ(octant_indicator(f, i, 1)[static_cast<Eigen::Index>(j)], 1.0);
    EXPECT_EQ(octant_indicator(f, i, 1)[static_cast<Eigen::Index>(i)], 1.0);
    EXPECT_THROW(octant_indicator(f, 9, 1), Error);
    EXPECT_THROW(octant_indicator(f, 0, 9), Error);
}

TEST(Octant, Partition) {
    std::mt19937_64 rng(1);
    const auto f = random_frame(rng, 120, 3);
    for (std::size_t i = 0; i < f.size(); i += 7) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.size()));
        for (int k = 1; k <= 8; ++k) sum += octant_indicator(f, i, k);
        EXPECT_EQ(sum, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(f.size())));
    }
}

TEST(LambdaMax, BoundsTrueValue) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = random_graph(rng, 20 + static_cast<int>(rng() % 300), 4 + rng() % 23);
        const double truth = eigendecompose(g).lambda_max();
        const double est = estimate_lambda_max(g);
        EXPECT_GE(est, truth * (1.0 - 1e-9));
        EXPECT_LE(est, truth * 1.0101);
    }
    EXPECT_EQ(estimate_lambda_max(VoxelGraph(3, {})), 0.0);
}

TEST(Transform, ZeroSignalAndEdgeless) {
    std::mt19937_64 rng(3);
    const auto g = random_graph(rng, 40, 6);
    EXPECT_EQ(sgw_transform(g, {}, Eigen::VectorXd::Zero(40)), Eigen::MatrixXd::Zero(40, 5));

    const VoxelGraph empty(5, {});
    const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    const Eigen::MatrixXd out = sgw_transform(empty, {}, f);
    EXPECT_LT((out.col(0) - band_pass_peak() * f).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(out.rightCols(4), Eigen::MatrixXd::Zero(5, 4));
    EXPECT_THROW(sgw_transform(empty, {}, Eigen::VectorXd::Zero(4)), Error);
}

TEST(Transform, FiftyVertexGraphDegreeThirty) {
    std::mt19937_64 rng(4);
    const auto g = random_graph(rng, 50, 26);
    const Eigen::VectorXd f = Eigen::VectorXd::Random(50);
    EXPECT_LE(chebyshev_error(g, {}, f), 1e-3);
}

TEST(Transform, TwentyRandomGraphs) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 181);
        const std::size_t k = std::array<std::size_t, 3>{6, 12, 26}[trial % 3];
        const auto g = random_graph(rng, n, k);
        const Eigen::VectorXd f = Eigen::VectorXd::Random(n);
        EXPECT_LE(chebyshev_error(g, {}, f), 1e-3) << "n=" << n << " k=" << k;
    }
}

// The band-pass kernel is only C1 at its knots, so the error shrinks
// algebraically with degree; it must still shrink.
TEST(Transform, TightensWithDegree) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = random_graph(rng, 60 + 30 * trial, 12);
        const Eigen::VectorXd f = Eigen::VectorXd::Random(g.size());
        WaveletConfig c30, c60;
        c60.chebyshev_degree = 60;
        EXPECT_LT(chebyshev_error(g, c60, f), 0.5 * chebyshev_error(g, c30, f));
    }
}

TEST(Transform, RecurrenceMatchesPolynomialOnSpectrum) {
    std::mt19937_64 rng(7);
    const auto g = random_graph(rng, 90, 12);
    const auto sp = eigendecompose(g);
    const FilterBank bank({}, estimate_lambda_max(g));
    const Eigen::VectorXd f = Eigen::VectorXd::Random(90);
    const Eigen::MatrixXd approx = sgw_transform(g, {}, f);
    const double a = bank.lambda_max() / 2.0;
    for (std::size_t b = 0; b < bank.bands(); ++b) {
        const auto c = bank.chebyshev_coefficients(b);
        Eigen::VectorXd p(90);
        for (int l = 0; l < 90; ++l) {
            const double y = (sp.eigenvalues[l] - a) / a;
            double t0 = 1.0, t1 = y, acc = 0.5 * c[0] + c[1] * y;
            for (std::size_t k = 2; k < c.size(); ++k) {
                const double t2 = 2.0 * y * t1 - t0;
                acc += c[k] * t2;
                t0 = t1;
                t1 = t2;
            }
            p[l] = acc;
        }
        const Eigen::VectorXd oracle = sp.eigenvectors * (p.asDiagonal() * (sp.eigenvectors.transpose() * f));
        EXPECT_LT((approx.col(static_cast<Eigen::Index>(b)) - oracle).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Transform, PermutationEquivariant) {
    std::mt19937_64 rng(8);
    const int n = 40;
    const auto g = random_graph(rng, n, 8);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) edges.push_back({std::min(perm[e.i], perm[e.j]), std::max(perm[e.i], perm[e.j]), e.weight});
    const VoxelGraph h(n, edges);
    const Eigen::VectorXd f = Eigen::VectorXd::Random(n);
    Eigen::VectorXd fp(n);
    for (int i = 0; i < n; ++i) fp[static_cast<Eigen::Index>(perm[i])] = f[i];
    const Eigen::MatrixXd a = sgw_transform(g, {}, f), b = sgw_transform(h, {}, fp);
    for (int i = 0; i < n; ++i) EXPECT_LT((a.row(i) - b.row(static_cast<Eigen::Index>(perm[i]))).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Descriptor, LengthAndIndexing) {
    EXPECT_EQ(FeatureDescriptor::length(5), 240u);
    EXPECT_EQ(FeatureDescriptor::index(1, 0, 0, 5), 0u);
    EXPECT_EQ(FeatureDescriptor::index(1, 0, 4, 5), 4u);
    EXPECT_EQ(FeatureDescriptor::index(1, 1, 0, 5), 5u);
    EXPECT_EQ(FeatureDescriptor::index(2, 0, 0, 5), 30u);
    EXPECT_EQ(FeatureDescriptor::index(8, 5, 4, 5), 239u);
}

TEST(Descriptor, MatchesMaskedSpectralOracle) {
    std::mt19937_64 rng(9);
    const auto f = random_frame(rng, 80, 3);
    const auto g = build_knn_graph(f);
    const auto sp = eigendecompose(g);
    const FilterBank bank({}, estimate_lambda_max(g));
    const auto signals = frame_signals(f);
    for (std::size_t i : {0u, 17u, 79u}) {
        const auto d = compute_descriptor(f, g, {}, i);
        ASSERT_EQ(d.values.size(), 240);
        for (int k = 1; k <= 8; ++k) {
            const Eigen::VectorXd o = octant_indicator(f, i, k);
            for (int s = 0; s < 6; ++s) {
                const Eigen::VectorXd masked = signals.col(s).cwiseProduct(o);
                const Eigen::MatrixXd exact = sgw_transform_exact(sp, bank, masked);
                for (std::size_t b = 0; b < 5; ++b) {
                    const double got = d.values[static_cast<Eigen::Index>(FeatureDescriptor::index(k, s, b, 5))];
                    EXPECT_NEAR(got, exact(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)),
                                1e-3 * std::max(masked.norm(), 1e-12));
                }
            }
        }
    }
}

TEST(Descriptor, BatchEqualsSingle) {
    std::mt19937_64 rng(10);
    const auto f = random_frame(rng, 100, 4);
    const auto g = build_knn_graph(f);
    const auto all = compute_all_descriptors(f, g, {}, 37);
    ASSERT_EQ(all.size(), 100u);
    for (std::size_t i = 0; i < 100; ++i) {
        EXPECT_LT((all[i].values - compute_descriptor(f, g, {}, i).values).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Descriptor, SingleVertex) {
    const VoxelFrame f(VoxelSet::from_indices(grid_of(3), {{2, 3, 4}}), Eigen::RowVector3d(10, 20, 30));
    const auto g = build_knn_graph(f);
    const auto all = compute_all_descriptors(f, g, {});
    ASSERT_EQ(all.size(), 1u);
    const auto& d = all[0].values;
    const double signals[6] = {2.5, 3.5, 4.5, 10, 20, 30};
    for (int k = 1; k <= 8; ++k)
        for (int s = 0; s < 6; ++s)
            for (std::size_t b = 0; b < 5; ++b) {
                const double want = (k == 1 && b == 0) ? band_pass_peak() * signals[s] : 0.0;
                EXPECT_NEAR(d[static_cast<Eigen::Index>(FeatureDescriptor::index(k, s, b, 5))], want, 1e-12);
            }
}

TEST(Descriptor, LinearInColor) {
    std::mt19937_64 rng(11);
    const auto f = random_frame(rng, 60, 3);
    const auto g = build_knn_graph(f);
    const auto scaled = f.with_colors(2.5 * f.colors());
    const auto a = compute_all_descriptors(f, g, {}), b = compute_all_descriptors(scaled, g, {});
    for (std::size_t i = 0; i < f.size(); ++i)
        for (int k = 1; k <= 8; ++k)
            for (int s = 0; s < 6; ++s)
                for (std::size_t band = 0; band < 5; ++band) {
                    const auto idx = static_cast<Eigen::Index>(FeatureDescriptor::index(k, s, band, 5));
                    const double factor = s >= 3 ? 2.5 : 1.0;
                    EXPECT_NEAR(b[i].values[idx], factor * a[i].values[idx], 1e-9 * (1.0 + std::abs(a[i].values[idx])));
                }
}

// Two far-apart clusters form separate components; recoloring one leaves
// the other's descriptors untouched.
TEST(Descriptor, ComponentLocality) {
    std::vector<VoxelIndex> v;
    for (std::uint32_t x = 0; x < 3; ++x)
        for (std::uint32_t y = 0; y < 3; ++y) {
            v.push_back({x, y, 0});
            v.push_back({x + 20, y + 20, 20});
        }
    const auto set = VoxelSet::from_indices(grid_of(5), v);
    const VoxelFrame f(set, Eigen::MatrixX3d::Constant(18, 3, 100.0));
    const auto g = build_knn_graph(f, 8);
    ASSERT_EQ(eigendecompose(g).zero_count(), 2u);
    Eigen::MatrixX3d recolored = f.colors();
    for (std::size_t n = 0; n < f.size(); ++n) {
        if (f.voxels()[n].x >= 20) recolored.row(static_cast<Eigen::Index>(n)).setConstant(7.0);
    }
    const auto a = compute_all_descriptors(f, g, {}), b = compute_all_descriptors(f.with_colors(recolored), g, {});
    for (std::size_t n = 0; n < f.size(); ++n) {
        if (f.voxels()[n].x < 20) {
            EXPECT_LT((a[n].values - b[n].values).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}
