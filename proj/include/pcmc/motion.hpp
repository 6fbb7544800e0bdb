// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_MOTION_HPP
#define PCMC_MOTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/sgw.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::motion {

using sgw::FeatureDescriptor;

// Learned precision matrix of descriptor differences.
struct PrecisionModel {
    Eigen::MatrixXd P;
    std::string training_id;
    double epsilon = 0.0;

    std::size_t dim() const { return static_cast<std::size_t>(P.rows()); }

    static PrecisionModel identity(std::size_t dim) {
        return {Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)),
                "identity", 0.0};
    }

    void validate() const {
        if (P.rows() != P.cols() || P.rows() == 0) {
            throw Error(ErrorCode::DimensionMismatch, "precision matrix must be square and non-empty");
        }
        if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff())) {
            throw Error(ErrorCode::InvalidArgument, "precision matrix is not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues()[0] > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "precision matrix is not positive definite");
        }
    }
};

// Binary layout (little-endian): "PCMCPREC", u32 version = 1, u32 dim,
// f64 epsilon, u32 id length, id bytes, dim*dim f64 row-major.
inline void save_precision(const PrecisionModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
    const char magic[8] = {'P', 'C', 'M', 'C', 'P', 'R', 'E', 'C'};
    const std::uint32_t version = 1, dim = static_cast<std::uint32_t>(model.dim()),
                        id_len = static_cast<std::uint32_t>(model.training_id.size());
    put(magic, 8);
    put(&version, 4);
    put(&dim, 4);
    put(&model.epsilon, 8);
    put(&id_len, 4);
    put(model.training_id.data(), id_len);
    for (Eigen::Index r = 0; r < model.P.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.P.cols(); ++c) {
            const double v = model.P(r, c);
            put(&v, 8);
        }
    }
}

inline PrecisionModel load_precision(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    auto get = [&](void* p, std::size_t n) {
        if (!in.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) {
            throw Error(ErrorCode::Truncated, "precision model file truncated");
        }
    };
    char magic[8];
    get(magic, 8);
    if (std::memcmp(magic, "PCMCPREC", 8) != 0) throw Error(ErrorCode::HeaderCorrupt, "bad precision model magic");
    std::uint32_t version = 0, dim = 0, id_len = 0;
    get(&version, 4);
    if (version != 1) throw Error(ErrorCode::VersionMismatch, "unsupported precision model version");
    PrecisionModel model;
    get(&dim, 4);
    get(&model.epsilon, 8);
    get(&id_len, 4);
    model.training_id.resize(id_len);
    get(model.training_id.data(), id_len);
    model.P.resize(dim, dim);
    for (std::uint32_t r = 0; r < dim; ++r) {
        for (std::uint32_t c = 0; c < dim; ++c) get(&model.P(r, c), 8);
    }
    model.validate();
    return model;
}

inline double match_score(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const PrecisionModel& model) {
    if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != model.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "descriptor and precision dimensions differ");
    }
    const Eigen::VectorXd d = a - b;
    return std::max(0.0, d.dot(model.P * d));
}

inline double match_score(const FeatureDescriptor& a, const FeatureDescriptor& b, const PrecisionModel& model) {
    return match_score(a.values, b.values, model);
}

// P = (Cov(a - b) + eps I)^-1 from descriptor pairs known to correspond.
inline PrecisionModel train_precision(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
                                      double epsilon, std::string training_id = "") {
    if (pairs.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two training pairs");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "regularization epsilon must be positive");
    const Eigen::Index dim = pairs.front().first.size();
    Eigen::MatrixXd diffs(dim, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (pairs[k].first.size() != dim || pairs[k].second.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "training descriptors differ in length");
        }
        diffs.col(static_cast<Eigen::Index>(k)) = pairs[k].first - pairs[k].second;
    }
    const Eigen::VectorXd mean = diffs.rowwise().mean();
    diffs.colwise() -= mean;
    Eigen::MatrixXd cov = diffs * diffs.transpose() / static_cast<double>(pairs.size() - 1);
    cov.diagonal().array() += epsilon;

    Eigen::MatrixXd P = cov.ldlt().solve(Eigen::MatrixXd::Identity(dim, dim));
    P = 0.5 * (P + P.transpose()).eval();
    return {std::move(P), std::move(training_id), epsilon};
}

struct Match {
    std::size_t m = 0;
    double score = 0.0;
};

// Descriptors mapped through the Cholesky factor of P, so that
// sigma(a, b) is the squared Euclidean distance of the whitened vectors.
class WhitenedDescriptors {
public:
    WhitenedDescriptors(const std::vector<FeatureDescriptor>& descriptors, const PrecisionModel& model) {
        const auto dim = static_cast<Eigen::Index>(model.dim());
        Eigen::LLT<Eigen::MatrixXd> llt(model.P);
        if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "precision matrix not PD");
        const Eigen::MatrixXd Lt = llt.matrixU();
        Y_.resize(dim, static_cast<Eigen::Index>(descriptors.size()));
        for (std::size_t i = 0; i < descriptors.size(); ++i) {
            if (descriptors[i].values.size() != dim) {
                throw Error(ErrorCode::DimensionMismatch, "descriptor length differs from model dimension");
            }
            Y_.col(static_cast<Eigen::Index>(i)) = Lt * descriptors[i].values;
        }
        norms_ = Y_.colwise().squaredNorm().transpose();
    }

    std::size_t size() const { return static_cast<std::size_t>(Y_.cols()); }
    const Eigen::MatrixXd& vectors() const { return Y_; }
    const Eigen::VectorXd& squared_norms() const { return norms_; }

    double score(std::size_t m, const WhitenedDescriptors& other, std::size_t n) const {
        return (Y_.col(static_cast<Eigen::Index>(m)) - other.Y_.col(static_cast<Eigen::Index>(n))).squaredNorm();
    }

private:
    Eigen::MatrixXd Y_;
    Eigen::VectorXd norms_;
};

// Best reference vertex for one target descriptor; exhaustive, ties go to the
// smaller reference index.
inline Match best_match(const FeatureDescriptor& target, const std::vector<FeatureDescriptor>& reference,
                        const PrecisionModel& model) {
    if (reference.empty()) throw Error(ErrorCode::EmptyInput, "reference descriptor set is empty");
    Match best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t m = 0; m < reference.size(); ++m) {
        const double s = match_score(reference[m], target, model);
        if (s < best.score) best = {m, s};
    }
    return best;
}

// Best matches for all target vertices. Candidate distances come from one
// GEMM per block; the winning score is recomputed directly.
inline std::vector<Match> best_matches(const WhitenedDescriptors& target, const WhitenedDescriptors& reference,
                                       std::size_t block = 512) {
    if (reference.size() == 0) throw Error(ErrorCode::EmptyInput, "reference descriptor set is empty");
    std::vector<Match> out(target.size());
    const auto& R = reference.vectors();
    for (std::size_t start = 0; start < target.size(); start += block) {
        const auto count = static_cast<Eigen::Index>(std::min(block, target.size() - start));
        const Eigen::MatrixXd cross =
            R.transpose() * target.vectors().middleCols(static_cast<Eigen::Index>(start), count);
        for (Eigen::Index c = 0; c < count; ++c) {
            const std::size_t n = start + static_cast<std::size_t>(c);
            const double tn = target.squared_norms()[static_cast<Eigen::Index>(n)];
            Match best{0, std::numeric_limits<double>::infinity()};
            for (Eigen::Index m = 0; m < R.cols(); ++m) {
                const double s = reference.squared_norms()[m] + tn - 2.0 * cross(m, c);
                if (s < best.score) best = {static_cast<std::size_t>(m), s};
            }
            best.score = reference.score(best.m, target, n);
            out[n] = best;
        }
    }
    return out;
}

// Lloyd's algorithm on 3D points, seeded by farthest-point sampling from
// point 0. Ties in assignment go to the lower cluster index.
inline std::vector<std::size_t> kmeans(const Eigen::MatrixX3d& points, std::size_t k, int max_iterations = 20) {
    const auto n = static_cast<std::size_t>(points.rows());
    std::vector<std::size_t> label(n, 0);
    if (n == 0) return label;
    k = std::clamp<std::size_t>(k, 1, n);

    Eigen::MatrixX3d centers(static_cast<Eigen::Index>(k), 3);
    centers.row(0) = points.row(0);
    Eigen::VectorXd dist = (points.rowwise() - points.row(0)).rowwise().squaredNorm();
    for (std::size_t c = 1; c < k; ++c) {
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        centers.row(static_cast<Eigen::Index>(c)) = points.row(far);
        dist = dist.cwiseMin((points.rowwise() - points.row(far)).rowwise().squaredNorm());
    }

    for (int it = 0; it < max_iterations; ++it) {
        bool changed = it == 0;
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            (centers.rowwise() - points.row(static_cast<Eigen::Index>(i))).rowwise().squaredNorm().minCoeff(&best);
            if (label[i] != static_cast<std::size_t>(best)) {
                label[i] = static_cast<std::size_t>(best);
                changed = true;
            }
        }
        if (!changed) break;
        Eigen::MatrixX3d sums = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(k), 3);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(label[i])) += points.row(static_cast<Eigen::Index>(i));
            ++counts[label[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c]) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        }
    }
    return label;
}

struct Correspondence {
    std::size_t m = 0;  // reference vertex
    std::size_t n = 0;  // target vertex
    double score = 0.0;
    Eigen::Vector3d motion = Eigen::Vector3d::Zero();  // p_target(n) - p_reference(m)
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();       // offset covariance
};

struct SparseCorrespondences {
    std::vector<Correspondence> pairs;
};

// One representative per K-means cluster of the target positions: the member
// with the lowest best-match score, kept only if that score is below tau.
// When two representatives share a reference vertex, the lower score wins.
inline SparseCorrespondences select_sparse(const VoxelFrame& reference, const VoxelFrame& target,
                                           const std::vector<Match>& matches, std::size_t clusters,
                                           double tau, int kmeans_iterations = 20) {
    if (clusters < 1) throw Error(ErrorCode::InvalidArgument, "cluster count must be at least 1");
    if (matches.size() != target.size()) throw Error(ErrorCode::DimensionMismatch, "one match per target vertex required");
    SparseCorrespondences out;
    if (target.empty()) return out;
    const auto label = kmeans(target.positions(), clusters, kmeans_iterations);
    const std::size_t k = *std::max_element(label.begin(), label.end()) + 1;
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> rep(k, none);
    for (std::size_t n = 0; n < target.size(); ++n) {
        auto& r = rep[label[n]];
        if (r == none || matches[n].score < matches[r].score) r = n;
    }
    std::vector<std::size_t> owner(reference.size(), none);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t n = rep[c];
        if (n == none || !(matches[n].score < tau)) continue;
        auto& o = owner[matches[n].m];
        if (o == none || matches[n].score < matches[o].score || (matches[n].score == matches[o].score && n < o)) o = n;
    }
    for (std::size_t m = 0; m < reference.size(); ++m) {
        if (owner[m] == none) continue;
        const std::size_t n = owner[m];
        Correspondence c;
        c.m = m;
        c.n = n;
        c.score = matches[n].score;
        c.motion = (target.positions().row(static_cast<Eigen::Index>(n)) -
                    reference.positions().row(static_cast<Eigen::Index>(m)))
                       .transpose();
        out.pairs.push_back(c);
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    return out;
}

// Vertices reachable in one or two hops from v, excluding v, ascending.
inline std::vector<std::size_t> two_hop_neighborhood(const VoxelGraph& graph, std::size_t v) {
    std::vector<std::size_t> out;
    for (const auto& [u, w] : graph.neighbors(v)) {
        out.push_back(u);
        for (const auto& [x, w2] : graph.neighbors(u)) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove(out.begin(), out.end(), v), out.end());
    return out;
}

inline constexpr double kScoreExcessFloor = 1e-9;

// M_n = (1/|N2|) sum over m in N2(m_n) of dp dp^T / (sigma(m,n) - sigma(m_n,n)),
// skipping terms whose score excess is at most 1e-9. `score_of(m)` returns
// sigma(m, n). `skipped`, when given, accumulates the number of skipped terms.
template <class ScoreFn>
Eigen::Matrix3d estimate_offset_covariance(const VoxelGraph& graph, const Eigen::MatrixX3d& positions,
                                           std::size_t m_n, double best_score, ScoreFn&& score_of,
                                           std::size_t* skipped = nullptr) {
    const auto hood = two_hop_neighborhood(graph, m_n);
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    if (hood.empty()) return M;
    const Eigen::Vector3d origin = positions.row(static_cast<Eigen::Index>(m_n)).transpose();
    for (auto m : hood) {
        const double excess = score_of(m) - best_score;
        if (!(excess > kScoreExcessFloor)) {
            if (skipped) ++*skipped;
            continue;
        }
        const Eigen::Vector3d dp = positions.row(static_cast<Eigen::Index>(m)).transpose() - origin;
        M += dp * dp.transpose() / excess;
    }
    return M / static_cast<double>(hood.size());
}

// Eigen pseudo-inverse, discarding eigenvalues at or below 1e-8 * trace.
inline Eigen::Matrix3d pseudo_inverse(const Eigen::Matrix3d& M) {
    const double floor = 1e-8 * M.trace();
    if (!(M.trace() > 0.0)) return Eigen::Matrix3d::Zero();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
    Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) {
        const double ev = es.eigenvalues()[k];
        if (ev > floor) out += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / ev;
    }
    return out;
}

// Dense per-vertex displacement on the reference graph, stored as the
// stacked 3N vector [x_0..x_{N-1}, y_0.., z_0..].
struct MotionField {
    Eigen::VectorXd stacked;

    static MotionField zero(std::size_t n) { return {Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(n))}; }

    static MotionField from_rows(const Eigen::MatrixX3d& rows) {
        MotionField f;
        f.stacked.resize(3 * rows.rows());
        for (int a = 0; a < 3; ++a) f.stacked.segment(a * rows.rows(), rows.rows()) = rows.col(a);
        return f;
    }

    std::size_t size() const { return static_cast<std::size_t>(stacked.size() / 3); }

    Eigen::Vector3d at(std::size_t m) const {
        const auto n = static_cast<Eigen::Index>(size()), i = static_cast<Eigen::Index>(m);
        return {stacked[i], stacked[n + i], stacked[2 * n + i]};
    }

    // N x 3, one displacement per row.
    Eigen::MatrixX3d rows() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::MatrixX3d out(n, 3);
        for (int a = 0; a < 3; ++a) out.col(a) = stacked.segment(a * n, n);
        return out;
    }

    bool finite() const { return stacked.allFinite(); }
};

struct InterpolationDiagnostics {
    std::size_t components = 0;
    std::size_t unanchored_components = 0;
    double relative_residual = 0.0;
};

// Solves (Q + mu * sum_i S_i^T L S_i) v = Q v_t. Components without an anchor
// carrying a nonzero precision block are left at zero motion.
inline MotionField interpolate_motion(const VoxelGraph& graph, const SparseCorrespondences& sparse, double mu,
                                      InterpolationDiagnostics* diagnostics = nullptr) {
    if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
    const std::size_t n = graph.size();
    MotionField field = MotionField::zero(n);
    InterpolationDiagnostics diag;

    std::size_t ncomp = 0;
    const auto comp = connected_components(graph, &ncomp);
    diag.components = ncomp;

    std::vector<Eigen::Matrix3d> Q(n, Eigen::Matrix3d::Zero());
    std::vector<Eigen::Vector3d> vt(n, Eigen::Vector3d::Zero());
    std::vector<char> anchored(ncomp, 0);
    for (const auto& p : sparse.pairs) {
        if (p.m >= n) throw Error(ErrorCode::OutOfRange, "correspondence references a missing vertex");
        Q[p.m] = pseudo_inverse(p.M);
        vt[p.m] = p.motion;
        if (Q[p.m].trace() > 0.0) anchored[comp[p.m]] = 1;
    }

    // Local numbering of vertices on anchored components.
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> local(n, none);
    std::vector<std::size_t> global;
    for (std::size_t v = 0; v < n; ++v) {
        if (anchored[comp[v]]) {
            local[v] = global.size();
            global.push_back(v);
        }
    }
    for (char a : anchored) diag.unanchored_components += a ? 0 : 1;
    if (global.empty()) {
        if (diagnostics) *diagnostics = diag;
        return field;
    }

    const auto k = static_cast<Eigen::Index>(global.size());
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * k);
    double diag_max = 0.0;
    for (std::size_t li = 0; li < global.size(); ++li) {
        const std::size_t v = global[li];
        const auto r = static_cast<Eigen::Index>(li);
        diag_max = std::max(diag_max, mu * graph.degree()[v]);
        for (int a = 0; a < 3; ++a) {
            t.emplace_back(a * k + r, a * k + r, mu * graph.degree()[v]);
            for (const auto& [u, w] : graph.neighbors(v)) {
                t.emplace_back(a * k + r, a * k + static_cast<Eigen::Index>(local[u]), -mu * w);
            }
            for (int b = 0; b < 3; ++b) {
                if (Q[v](a, b) != 0.0) t.emplace_back(a * k + r, b * k + r, Q[v](a, b));
            }
        }
        const Eigen::Vector3d q = Q[v] * vt[v];
        for (int a = 0; a < 3; ++a) rhs[a * k + r] = q[a];
        diag_max = std::max(diag_max, Q[v].diagonal().maxCoeff());
    }
    Eigen::SparseMatrix<double> A(3 * k, 3 * k);
    A.setFromTriplets(t.begin(), t.end());

    // A vanishing ridge keeps the factorization defined when the anchors of a
    // component only constrain some directions.
    Eigen::SparseMatrix<double> ridge(3 * k, 3 * k);
    ridge.setIdentity();
    const Eigen::SparseMatrix<double> Ar = A + (1e-12 * std::max(diag_max, 1.0)) * ridge;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Ar);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "motion system factorization failed");
    Eigen::VectorXd x = solver.solve(rhs);
    // One refinement step against the unregularized system.
    x += solver.solve(rhs - A * x);

    const double rhs_norm = rhs.norm();
    diag.relative_residual = rhs_norm > 0.0 ? (A * x - rhs).norm() / rhs_norm : (A * x).norm();
    const auto N = static_cast<Eigen::Index>(n);
    for (std::size_t li = 0; li < global.size(); ++li) {
        const auto g = static_cast<Eigen::Index>(global[li]), r = static_cast<Eigen::Index>(li);
        for (int a = 0; a < 3; ++a) field.stacked[a * N + g] = x[a * k + r];
    }
    if (diagnostics) *diagnostics = diag;
    return field;
}

// Objective of the interpolation problem, used by tests and diagnostics.
inline double interpolation_objective(const VoxelGraph& graph, const SparseCorrespondences& sparse, double mu,
                                      const MotionField& v) {
    const auto rows = v.rows();
    double fit = 0.0;
    for (const auto& p : sparse.pairs) {
        const Eigen::Vector3d d = v.at(p.m) - p.motion;
        fit += d.dot(pseudo_inverse(p.M) * d);
    }
    double smooth = 0.0;
    for (const auto& e : graph.edges()) {
        smooth += e.weight * (rows.row(static_cast<Eigen::Index>(e.i)) - rows.row(static_cast<Eigen::Index>(e.j))).squaredNorm();
    }
    return fit + mu * smooth;
}

// Sum over coordinates of (S_i v)^T L (S_i v).
inline double dirichlet_energy(const VoxelGraph& graph, const MotionField& v) {
    const auto rows = v.rows();
    double e = 0.0;
    for (const auto& ed : graph.edges()) {
        e += ed.weight * (rows.row(static_cast<Eigen::Index>(ed.i)) - rows.row(static_cast<Eigen::Index>(ed.j))).squaredNorm();
    }
    return e;
}

struct MotionConfig {
    std::size_t k_neighbors = 26;
    sgw::WaveletConfig wavelet;
    std::size_t clusters = 500;
    double threshold_percentile = 25.0;
    double mu = 1.0;
    int kmeans_iterations = 20;
};

struct MotionDiagnostics {
    std::size_t anchors = 0;
    std::size_t skipped_terms = 0;
    double tau = 0.0;
    InterpolationDiagnostics interpolation;
};

struct MotionEstimate {
    MotionField field;
    SparseCorrespondences correspondences;
    std::vector<Match> matches;
    MotionDiagnostics diagnostics;
};

// Linear-interpolated percentile of a sample, p in [0, 100].
inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// Full estimator from reference frame t to target frame t+1. The reference
// graph is passed in because the codec already holds it.
inline MotionEstimate estimate_motion(const VoxelFrame& reference, const VoxelGraph& reference_graph,
                                      const VoxelFrame& target, const PrecisionModel& model,
                                      const MotionConfig& config) {
    MotionEstimate est;
    const auto target_graph = build_knn_graph(target, config.k_neighbors);
    const auto ref_desc = sgw::compute_all_descriptors(reference, reference_graph, config.wavelet);
    const auto tgt_desc = sgw::compute_all_descriptors(target, target_graph, config.wavelet);
    const WhitenedDescriptors ref_w(ref_desc, model), tgt_w(tgt_desc, model);
    est.matches = best_matches(tgt_w, ref_w);

    std::vector<double> scores;
    scores.reserve(est.matches.size());
    for (const auto& m : est.matches) scores.push_back(m.score);
    est.diagnostics.tau = percentile(scores, config.threshold_percentile);
    // Strict comparison against tau would reject everything on exact data.
    const double tau = std::nextafter(est.diagnostics.tau, std::numeric_limits<double>::infinity());

    est.correspondences = select_sparse(reference, target, est.matches, config.clusters, tau, config.kmeans_iterations);
    for (auto& p : est.correspondences.pairs) {
        p.M = estimate_offset_covariance(reference_graph, reference.positions(), p.m, p.score,
                                         [&](std::size_t m) { return ref_w.score(m, tgt_w, p.n); },
                                         &est.diagnostics.skipped_terms);
    }
    est.diagnostics.anchors = est.correspondences.pairs.size();
    est.field = interpolate_motion(reference_graph, est.correspondences, config.mu, &est.diagnostics.interpolation);
    return est;
}

}  // namespace pcmc::motion

#endif  // PCMC_MOTION_HPP
