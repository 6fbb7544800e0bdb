// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "pcmc/harness/evaluation.hpp"
#include "pcmc/harness/synthetic.hpp"
#include "pcmc/harness/training.hpp"
#include "pcmc/motion.hpp"

using namespace pcmc;
using namespace pcmc::motion;

namespace {

VoxelGraph random_graph(std::mt19937_64& rng, int n, std::size_t k, Eigen::MatrixX3d* positions = nullptr) {
    std::uniform_real_distribution<double> u(0.0, 1.5 * std::cbrt(static_cast<double>(n)));
    Eigen::MatrixX3d P(n, 3);
    for (auto& x : P.reshaped()) x = u(rng);
    if (positions) *positions = P;
    return build_knn_graph(P, k);
}

Eigen::Matrix3d random_psd(std::mt19937_64& rng, bool full_rank) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::Matrix3d A;
    for (auto& x : A.reshaped()) x = nd(rng);
    if (!full_rank) A.col(2).setZero();
    return A * A.transpose() + (full_rank ? 0.1 : 0.0) * Eigen::Matrix3d::Identity();
}

FeatureDescriptor desc(const Eigen::VectorXd& v) { return {v}; }

// Dense assembly of (Q + mu I3 (x) L) v = Q v_t in the stacked layout.
Eigen::VectorXd dense_oracle(const VoxelGraph& g, const SparseCorrespondences& s, double mu) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(g));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * n);
    for (int a = 0; a < 3; ++a) A.block(a * n, a * n, n, n) = mu * L;
    for (const auto& p : s.pairs) {
        const Eigen::Matrix3d Q = p.M.inverse();
        const auto m = static_cast<Eigen::Index>(p.m);
        const Eigen::Vector3d q = Q * p.motion;
        for (int a = 0; a < 3; ++a) {
            b[a * n + m] += q[a];
            for (int c = 0; c < 3; ++c) A(a * n + m, c * n + m) += Q(a, c);
        }
    }
    return A.fullPivLu().solve(b);
}

SparseCorrespondences random_anchors(std::mt19937_64& rng, std::size_t n, std::size_t count, bool full_rank = true) {
    std::normal_distribution<double> nd(0.0, 2.0);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    SparseCorrespondences s;
    for (std::size_t k = 0; k < count; ++k) {
        Correspondence c;
        c.m = idx[k];
        c.n = k;
        c.motion = Eigen::Vector3d(nd(rng), nd(rng), nd(rng));
        c.M = random_psd(rng, full_rank);
        s.pairs.push_back(c);
    }
    return s;
}

}  // namespace

TEST(MatchScore, Examples) {
    const auto P = PrecisionModel::identity(5);
    Eigen::VectorXd a = Eigen::VectorXd::Random(5), b = a;
    EXPECT_EQ(match_score(a, a, P), 0.0);
    b[0] += 3.0;
    b[1] -= 4.0;
    EXPECT_NEAR(match_score(a, b, P), 25.0, 1e-12);
    EXPECT_THROW(match_score(a, Eigen::VectorXd::Zero(4), P), Error);
}

TEST(MatchScore, QuadraticFormOracle) {
    std::mt19937_64 rng(1);
    const int d = 12;
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int k = 0; k < 60; ++k) pairs.emplace_back(Eigen::VectorXd::Random(d), Eigen::VectorXd::Random(d));
    const auto model = train_precision(pairs, 0.01);
    for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd a = Eigen::VectorXd::Random(d), b = Eigen::VectorXd::Random(d);
        double naive = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) naive += (a[i] - b[i]) * model.P(i, j) * (a[j] - b[j]);
        EXPECT_NEAR(match_score(a, b, model), naive, 1e-10 * std::abs(naive));
        EXPECT_NEAR(match_score(a, b, model), match_score(b, a, model), 1e-10 * std::abs(naive));
    }
}

TEST(TrainPrecision, Examples) {
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> same;
    for (int k = 0; k < 4; ++k) {
        const Eigen::VectorXd v = Eigen::VectorXd::Random(3);
        same.emplace_back(v, v);
    }
    EXPECT_LT((train_precision(same, 1.0).P - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-15);

    // Differences of +-2: variance 4.
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> scalar;
    for (int k = 0; k < 100000; ++k) scalar.emplace_back(Eigen::VectorXd::Constant(1, k % 2 ? 2.0 : -2.0), Eigen::VectorXd::Zero(1));
    EXPECT_NEAR(train_precision(scalar, 1e-4).P(0, 0), 0.25, 1e-3);

    EXPECT_THROW(train_precision({same[0]}, 1.0), Error);
    EXPECT_THROW(train_precision(same, 0.0), Error);
}

TEST(TrainPrecision, MatchesIndependentInversion) {
    std::mt19937_64 rng(2);
    harness::SyntheticSpec spec;
    spec.frames = 1;
    spec.depth = 5;
    spec.size = 5.0;
    const auto frame = harness::generate_synthetic(spec).frames[0];
    harness::TrainingConfig tc;
    tc.transforms = 2;
    tc.max_pairs = 600;
    const auto model = harness::train_precision_rigid(frame, {}, tc);
    model.validate();
    EXPECT_EQ(model.dim(), 240u);
    EXPECT_GT(model.epsilon, 0.0);
    EXPECT_LT((model.P - model.P.transpose()).cwiseAbs().maxCoeff(), 1e-10 * model.P.cwiseAbs().maxCoeff());

    const int d = 20;
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd mix(d, d);
    for (auto& x : mix.reshaped()) x = nd(rng);
    for (int k = 0; k < 500; ++k) {
        Eigen::VectorXd z(d);
        for (auto& x : z) x = nd(rng);
        pairs.emplace_back(mix * z, Eigen::VectorXd::Zero(d));
    }
    const double eps = 1e-3;
    const auto trained = train_precision(pairs, eps);
    // Long-double Gauss-Jordan inverse of the regularized sample covariance.
    using LD = long double;
    std::vector<std::vector<LD>> cov(d, std::vector<LD>(2 * d, 0.0L));
    std::vector<LD> mean(d, 0.0L);
    for (const auto& [a, b] : pairs)
        for (int i = 0; i < d; ++i) mean[i] += static_cast<LD>(a[i] - b[i]) / pairs.size();
    for (const auto& [a, b] : pairs)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                cov[i][j] += (static_cast<LD>(a[i] - b[i]) - mean[i]) * (static_cast<LD>(a[j] - b[j]) - mean[j]) / (pairs.size() - 1);
    for (int i = 0; i < d; ++i) {
        cov[i][i] += eps;
        cov[i][d + i] = 1.0L;
    }
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::abs(cov[r][c]) > std::abs(cov[piv][c])) piv = r;
        std::swap(cov[c], cov[piv]);
        const LD p = cov[c][c];
        for (auto& x : cov[c]) x /= p;
        for (int r = 0; r < d; ++r) {
            if (r == c) continue;
            const LD f = cov[r][c];
            for (int k = 0; k < 2 * d; ++k) cov[r][k] -= f * cov[c][k];
        }
    }
    double worst = 0.0, scale = trained.P.cwiseAbs().maxCoeff();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) worst = std::max(worst, std::abs(trained.P(i, j) - static_cast<double>(cov[i][d + j])));
    EXPECT_LT(worst / scale, 1e-6);
}

TEST(PrecisionFile, RoundTripAndErrors) {
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int k = 0; k < 30; ++k) pairs.emplace_back(Eigen::VectorXd::Random(6), Eigen::VectorXd::Random(6));
    const auto m = train_precision(pairs, 0.1, "unit");
    const auto path = std::filesystem::temp_directory_path() / "pcmc_precision_test.bin";
    save_precision(m, path.string());
    const auto back = load_precision(path.string());
    EXPECT_EQ(back.P, m.P);
    EXPECT_EQ(back.training_id, "unit");
    EXPECT_EQ(back.epsilon, 0.1);
    std::filesystem::resize_file(path, 40);
    EXPECT_THROW(load_precision(path.string()), Error);
    std::filesystem::remove(path);
    EXPECT_THROW(load_precision(path.string()), Error);
}

TEST(BestMatch, Examples) {
    const auto P = PrecisionModel::identity(4);
    std::vector<FeatureDescriptor> ref{desc(Eigen::Vector4d(1, 2, 3, 4)), desc(Eigen::Vector4d(0, 0, 0, 0)),
                                       desc(Eigen::Vector4d(5, 5, 5, 5))};
    const auto m = best_match(desc(Eigen::Vector4d(0, 0, 0, 0)), ref, P);
    EXPECT_EQ(m.m, 1u);
    EXPECT_EQ(m.score, 0.0);
    EXPECT_EQ(best_match(desc(Eigen::Vector4d(9, 9, 9, 9)), {ref[0]}, P).m, 0u);
    // Ties go to the smaller index.
    std::vector<FeatureDescriptor> tie{desc(Eigen::Vector4d(1, 0, 0, 0)), desc(Eigen::Vector4d(-1, 0, 0, 0))};
    EXPECT_EQ(best_match(desc(Eigen::Vector4d::Zero()), tie, P).m, 0u);
    EXPECT_THROW(best_match(ref[0], {}, P), Error);
}

TEST(BestMatch, BlockedEqualsExhaustive) {
    std::mt19937_64 rng(3);
    const int d = 16;
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int k = 0; k < 80; ++k) pairs.emplace_back(Eigen::VectorXd::Random(d), Eigen::VectorXd::Random(d));
    const auto model = train_precision(pairs, 0.05);
    std::vector<FeatureDescriptor> ref, tgt;
    for (int i = 0; i < 100; ++i) {
        ref.push_back(desc(Eigen::VectorXd::Random(d)));
        tgt.push_back(desc(Eigen::VectorXd::Random(d)));
    }
    const auto fast = best_matches(WhitenedDescriptors(tgt, model), WhitenedDescriptors(ref, model), 32);
    for (std::size_t n = 0; n < 100; ++n) {
        const auto slow = best_match(tgt[n], ref, model);
        EXPECT_EQ(fast[n].m, slow.m);
        EXPECT_NEAR(fast[n].score, slow.score, 1e-9 * slow.score);
    }
}

TEST(SelectSparse, Thresholds) {
    harness::SyntheticSpec spec;
    spec.frames = 1;
    spec.depth = 5;
    spec.size = 5.0;
    const auto f = harness::generate_synthetic(spec).frames[0];
    std::vector<Match> matches;
    for (std::size_t n = 0; n < f.size(); ++n) matches.push_back({n, 1.0 + static_cast<double>(n % 5)});
    EXPECT_TRUE(select_sparse(f, f, matches, 20, 0.0).pairs.empty());
    const auto all = select_sparse(f, f, matches, f.size(), std::numeric_limits<double>::infinity());
    EXPECT_EQ(all.pairs.size(), f.size());
    const auto some = select_sparse(f, f, matches, 30, 3.5);
    EXPECT_LE(some.pairs.size(), 30u);
    std::set<std::size_t> targets;
    for (const auto& p : some.pairs) {
        EXPECT_LT(p.score, 3.5);
        EXPECT_TRUE(targets.insert(p.n).second);
    }
}

TEST(SelectSparse, ScanScaleFrame) {
    harness::SyntheticSpec spec;
    spec.frames = 1;
    spec.size = 26.0;
    const auto f = harness::generate_synthetic(spec).frames[0];
    ASSERT_GT(f.size(), 7000u);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Match> matches;
    for (std::size_t n = 0; n < f.size(); ++n) matches.push_back({n, u(rng)});
    const auto s = select_sparse(f, f, matches, 500, 0.25);
    EXPECT_LE(s.pairs.size(), 500u);
    EXPECT_LT(static_cast<double>(s.pairs.size()), 0.1 * static_cast<double>(f.size()));
}

TEST(Kmeans, FarthestPointSeeding) {
    Eigen::MatrixX3d P(6, 3);
    P << 0, 0, 0, 0.1, 0, 0, 0, 0.1, 0, 10, 10, 10, 10.1, 10, 10, 10, 10.1, 10;
    const auto label = kmeans(P, 2);
    EXPECT_EQ(label[0], label[1]);
    EXPECT_EQ(label[0], label[2]);
    EXPECT_EQ(label[3], label[4]);
    EXPECT_NE(label[0], label[3]);
}

TEST(OffsetCovariance, Examples) {
    Eigen::MatrixX3d P(3, 3);
    P << 0, 0, 0, 1, 0, 0, -1, 0, 0;
    const VoxelGraph g(3, {{0, 1, 1.0}, {0, 2, 1.0}});
    const std::vector<double> scores{0.5, 1.5, 1.5};
    const auto M = estimate_offset_covariance(g, P, 0, 0.5, [&](std::size_t m) { return scores[m]; });
    EXPECT_LT((M - Eigen::Vector3d(1, 0, 0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-15);

    std::size_t skipped = 0;
    const auto Z = estimate_offset_covariance(g, P, 0, 0.5, [](std::size_t) { return 0.5; }, &skipped);
    EXPECT_EQ(Z, Eigen::Matrix3d::Zero());
    EXPECT_EQ(skipped, 2u);
}

TEST(OffsetCovariance, DirectSummationOracle) {
    std::mt19937_64 rng(5);
    Eigen::MatrixX3d P;
    const auto g = random_graph(rng, 60, 5, &P);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> scores(60);
    for (auto& s : scores) s = u(rng);
    for (std::size_t mn = 0; mn < 60; mn += 11) {
        std::set<std::size_t> hood;
        for (const auto& e : g.edges()) {
            if (e.i == mn) hood.insert(e.j);
            if (e.j == mn) hood.insert(e.i);
        }
        std::set<std::size_t> two = hood;
        for (auto h : hood)
            for (const auto& e : g.edges()) {
                if (e.i == h) two.insert(e.j);
                if (e.j == h) two.insert(e.i);
            }
        two.erase(mn);
        Eigen::Matrix3d want = Eigen::Matrix3d::Zero();
        for (auto m : two) {
            const double ex = scores[m] - scores[mn];
            if (ex <= 1e-9) continue;
            const Eigen::Vector3d dp = (P.row(static_cast<Eigen::Index>(m)) - P.row(static_cast<Eigen::Index>(mn))).transpose();
            want += dp * dp.transpose() / ex;
        }
        want /= static_cast<double>(two.size());
        const auto got = estimate_offset_covariance(g, P, mn, scores[mn], [&](std::size_t m) { return scores[m]; });
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + want.cwiseAbs().maxCoeff()));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(got);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(PseudoInverse, SingularAndRegular) {
    const Eigen::Matrix3d D = Eigen::Vector3d(2, 0, 0).asDiagonal();
    EXPECT_LT((pseudo_inverse(D) - Eigen::Matrix3d(Eigen::Vector3d(0.5, 0, 0).asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(pseudo_inverse(Eigen::Matrix3d::Zero()), Eigen::Matrix3d::Zero());
    std::mt19937_64 rng(6);
    const auto M = random_psd(rng, true);
    EXPECT_LT((pseudo_inverse(M) * M - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Interpolate, ConstantFieldIsExact) {
    std::mt19937_64 rng(7);
    const auto g = random_graph(rng, 150, 8);
    ASSERT_EQ(eigendecompose(g).zero_count(), 1u);
    auto s = random_anchors(rng, 150, 12);
    const Eigen::Vector3d c(1.5, -2.0, 0.25);
    for (auto& p : s.pairs) p.motion = c;
    InterpolationDiagnostics d;
    const auto v = interpolate_motion(g, s, 1.0, &d);
    for (std::size_t m = 0; m < 150; ++m) EXPECT_LT((v.at(m) - c).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(d.relative_residual, 1e-8);
}

TEST(Interpolate, EmptySparseGivesZero) {
    std::mt19937_64 rng(8);
    const auto g = random_graph(rng, 50, 6);
    InterpolationDiagnostics d;
    const auto v = interpolate_motion(g, {}, 1.0, &d);
    EXPECT_EQ(v.stacked, Eigen::VectorXd::Zero(150));
    EXPECT_EQ(d.unanchored_components, d.components);
    EXPECT_THROW(interpolate_motion(g, {}, 0.0), Error);
}

TEST(Interpolate, MatchesDenseSolve) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = random_graph(rng, 30, 6);
        if (eigendecompose(g).zero_count() != 1) continue;
        const auto s = random_anchors(rng, 30, 5);
        const double mu = std::array<double, 3>{0.1, 1.0, 10.0}[trial % 3];
        InterpolationDiagnostics d;
        const auto v = interpolate_motion(g, s, mu, &d);
        const Eigen::VectorXd want = dense_oracle(g, s, mu);
        EXPECT_LE((v.stacked - want).norm(), 1e-6 * want.norm());
        EXPECT_LE(d.relative_residual, 1e-8);
    }
}

TEST(Interpolate, UniqueMinimizer) {
    std::mt19937_64 rng(10);
    const auto g = random_graph(rng, 80, 8);
    const auto s = random_anchors(rng, 80, 10);
    const auto v = interpolate_motion(g, s, 0.7);
    const double best = interpolation_objective(g, s, 0.7, v);
    std::normal_distribution<double> nd(0.0, 0.05);
    for (int t = 0; t < 100; ++t) {
        MotionField p = v;
        for (auto& x : p.stacked) x += nd(rng);
        EXPECT_LE(best, interpolation_objective(g, s, 0.7, p));
    }
}

TEST(Interpolate, SmoothingMonotoneInMu) {
    std::mt19937_64 rng(11);
    const auto g = random_graph(rng, 100, 8);
    const auto s = random_anchors(rng, 100, 15);
    double prev = std::numeric_limits<double>::infinity();
    for (double mu : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double e = dirichlet_energy(g, interpolate_motion(g, s, mu));
        EXPECT_LE(e, prev * (1.0 + 1e-9));
        prev = e;
    }
}

TEST(Interpolate, RankDeficientAnchorsAndUnanchoredComponent) {
    // Two disjoint 3x3 grids; only the first carries anchors.
    std::vector<Eigen::RowVector3d> pts;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            pts.emplace_back(x, y, 0);
            pts.emplace_back(x + 30, y, 0);
        }
    Eigen::MatrixX3d P(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) P.row(static_cast<Eigen::Index>(i)) = pts[i];
    const auto g = build_knn_graph(P, 4);
    SparseCorrespondences s;
    for (std::size_t i = 0; i < 6; i += 2) {
        Correspondence c;
        c.m = i;
        c.motion = Eigen::Vector3d(1, 1, 1);
        c.M = Eigen::Vector3d(1, 1, 0).asDiagonal();
        s.pairs.push_back(c);
    }
    InterpolationDiagnostics d;
    const auto v = interpolate_motion(g, s, 1.0, &d);
    EXPECT_EQ(d.components, 2u);
    EXPECT_EQ(d.unanchored_components, 1u);
    EXPECT_TRUE(v.finite());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i % 2) EXPECT_EQ(v.at(i), Eigen::Vector3d::Zero());
        else EXPECT_LT((v.at(i).head<2>() - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(MotionField, Layout) {
    Eigen::MatrixX3d rows(2, 3);
    rows << 1, 2, 3, 4, 5, 6;
    const auto f = MotionField::from_rows(rows);
    EXPECT_EQ(f.stacked, (Eigen::VectorXd(6) << 1, 4, 2, 5, 3, 6).finished());
    EXPECT_EQ(f.at(1), Eigen::Vector3d(4, 5, 6));
    EXPECT_EQ(f.rows(), rows);
}

TEST(EstimateMotion, SmallTranslation) {
    harness::SyntheticSpec spec;
    spec.frames = 2;
    spec.depth = 6;
    spec.size = 6.0;
    spec.color_noise = 10.0;
    const auto seq = harness::generate_synthetic(spec);
    MotionConfig cfg;
    cfg.mu = 3e4;
    const auto model = harness::train_precision_rigid(seq.frames[0], cfg);
    const auto g = build_knn_graph(seq.frames[0]);
    const auto est = estimate_motion(seq.frames[0], g, seq.frames[1], model, cfg);
    EXPECT_GT(est.diagnostics.anchors, 0u);
    EXPECT_LE(est.diagnostics.anchors, cfg.clusters);
    for (const auto& p : est.correspondences.pairs) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(p.M);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
        EXPECT_LT(p.score, std::nextafter(est.diagnostics.tau, INFINITY) + 1e-12);
    }
    const double epe = harness::mean_endpoint_error(est.field, seq.ground_truth[0]);
    const double zero = harness::mean_endpoint_error(MotionField::zero(seq.frames[0].size()), seq.ground_truth[0]);
    EXPECT_LT(epe, 1.0);
    EXPECT_LT(epe, 0.5 * zero);
}
