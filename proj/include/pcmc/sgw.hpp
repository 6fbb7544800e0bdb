// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_SGW_HPP
#define PCMC_SGW_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::sgw {

// Cubic-spline band-pass generating kernel: x^2 below 1, 4/x^2 above 2, and
// the C1 cubic joining them. g(0) = 0.
inline double band_pass(double x) {
    if (x < 1.0) return x * x;
    if (x >= 2.0) return 4.0 / (x * x);
    return -5.0 + x * (11.0 + x * (-6.0 + x));
}

// Maximum of band_pass on [1, 2], attained where 3x^2 - 12x + 11 = 0.
inline double band_pass_peak() {
    const double x = 2.0 - 1.0 / std::numbers::sqrt3;
    return band_pass(x);
}

struct WaveletConfig {
    int num_scales = 4;
    int chebyshev_degree = 30;
    // lambda_min = lambda_max / lowpass_factor sets both the widest wavelet
    // scale (2 / lambda_min) and the low-pass cutoff.
    double lowpass_factor = 2.0;

    void validate() const {
        if (num_scales < 1) throw Error(ErrorCode::InvalidArgument, "need at least one wavelet scale");
        if (chebyshev_degree < 1) throw Error(ErrorCode::InvalidArgument, "Chebyshev degree must be >= 1");
        if (!(lowpass_factor > 1.0)) throw Error(ErrorCode::InvalidArgument, "lowpass factor must exceed 1");
    }

    std::size_t bands() const { return static_cast<std::size_t>(num_scales) + 1; }
};

// Filter bank realized on one graph: band 0 is the scaling (low-pass) kernel,
// bands 1..S are wavelets at increasing scale.
class FilterBank {
public:
    static constexpr int kQuadratureNodes = 1000;

    FilterBank(const WaveletConfig& config, double lambda_max)
        : config_(config), lambda_max_(lambda_max) {
        config_.validate();
        const double lmax = lambda_max_ > 0.0 ? lambda_max_ : 1.0;
        const double lmin = lmax / config_.lowpass_factor;
        const double smin = 1.0 / lmax, smax = 2.0 / lmin;
        const int S = config_.num_scales;
        for (int j = 0; j < S; ++j) {
            const double t = S == 1 ? 0.0 : static_cast<double>(j) / (S - 1);
            scales_.push_back(std::exp(std::log(smin) + t * (std::log(smax) - std::log(smin))));
        }
        gamma_ = band_pass_peak();
        lowpass_cutoff_ = 0.6 * lmin;
    }

    const WaveletConfig& config() const { return config_; }
    double lambda_max() const { return lambda_max_; }
    const std::vector<double>& scales() const { return scales_; }
    std::size_t bands() const { return scales_.size() + 1; }

    double kernel(std::size_t band, double lambda) const {
        if (band == 0) {
            const double r = lambda / lowpass_cutoff_;
            return gamma_ * std::exp(-(r * r) * (r * r));
        }
        return band_pass(scales_[band - 1] * lambda);
    }

    // Truncated Chebyshev series coefficients of a band kernel on
    // [0, lambda_max], by Gauss-Chebyshev quadrature.
    std::vector<double> chebyshev_coefficients(std::size_t band) const {
        const int m = config_.chebyshev_degree;
        const int M = std::max(m + 1, kQuadratureNodes);
        const double half = lambda_max_ / 2.0;
        std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
        for (int k = 0; k <= m; ++k) {
            double sum = 0.0;
            for (int i = 1; i <= M; ++i) {
                const double theta = std::numbers::pi * (i - 0.5) / M;
                sum += kernel(band, half * std::cos(theta) + half) * std::cos(k * theta);
            }
            c[static_cast<std::size_t>(k)] = 2.0 / M * sum;
        }
        return c;
    }

private:
    WaveletConfig config_;
    double lambda_max_;
    std::vector<double> scales_;
    double gamma_ = 1.0;
    double lowpass_cutoff_ = 1.0;
};

// Largest Ritz value of a 50-step Lanczos iteration from a fixed start
// vector (full reorthogonalization), inflated by 1% and capped by the
// 2 * max-degree bound, which is also the fallback.
inline double estimate_lambda_max(const VoxelGraph& graph) {
    const auto n = static_cast<Eigen::Index>(graph.size());
    double dmax = 0.0;
    for (double d : graph.degree()) dmax = std::max(dmax, d);
    const double bound = 2.0 * dmax;
    if (n == 0 || dmax == 0.0) return 0.0;

    constexpr Eigen::Index kSteps = 50;
    const Eigen::Index steps = std::min(kSteps, n);
    Eigen::MatrixXd Q(n, steps);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(steps), beta = Eigen::VectorXd::Zero(steps);
    Eigen::VectorXd v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index i = 0; i < n; ++i) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        v[i] = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    }
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < steps; ++j) {
        const double norm = v.norm();
        if (!(norm > 1e-12 * std::max(1.0, dmax)) || !std::isfinite(norm)) break;
        Q.col(j) = v / norm;
        if (j > 0) beta[j - 1] = norm;
        Eigen::VectorXd w = graph.apply_laplacian(Q.col(j));
        alpha[j] = Q.col(j).dot(w);
        ++used;
        for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * w);
        v = std::move(w);
    }
    if (used == 0) return bound;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    const double ritz = es.eigenvalues().maxCoeff();
    if (!std::isfinite(ritz) || ritz <= 0.0) return bound;
    return std::min(1.01 * ritz, bound);
}

// Applies every band kernel to the columns of `f` using the shifted
// Chebyshev recurrence; L is touched only through sparse products.
// Returns one matrix per band, shaped like `f`.
inline std::vector<Eigen::MatrixXd> apply_filter_bank(const Eigen::SparseMatrix<double>& L,
                                                      const FilterBank& bank,
                                                      const Eigen::MatrixXd& f) {
    std::vector<Eigen::MatrixXd> out(bank.bands());
    if (bank.lambda_max() <= 0.0) {
        // L = 0: every kernel reduces to its value at zero.
        for (std::size_t b = 0; b < bank.bands(); ++b) out[b] = bank.kernel(b, 0.0) * f;
        return out;
    }
    std::vector<std::vector<double>> coeffs;
    for (std::size_t b = 0; b < bank.bands(); ++b) coeffs.push_back(bank.chebyshev_coefficients(b));

    // Row-major operands keep each sparse row's gather contiguous.
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::SparseMatrix<double, Eigen::RowMajor> Lr = L;
    const double a = bank.lambda_max() / 2.0;
    RowMatrix t_prev = f;
    RowMatrix t_cur(f.rows(), f.cols());
    t_cur.noalias() = Lr * t_prev;
    t_cur = t_cur / a - t_prev;
    std::vector<RowMatrix> acc(bank.bands());
    for (std::size_t b = 0; b < bank.bands(); ++b) {
        acc[b] = 0.5 * coeffs[b][0] * t_prev + coeffs[b][1] * t_cur;
    }
    RowMatrix t_next(f.rows(), f.cols());
    const int m = bank.config().chebyshev_degree;
    for (int k = 2; k <= m; ++k) {
        t_next.noalias() = Lr * t_cur;
        t_next = (2.0 / a) * t_next - 2.0 * t_cur - t_prev;
        for (std::size_t b = 0; b < bank.bands(); ++b) acc[b] += coeffs[b][static_cast<std::size_t>(k)] * t_next;
        std::swap(t_prev, t_cur);
        std::swap(t_cur, t_next);
    }
    for (std::size_t b = 0; b < bank.bands(); ++b) out[b] = acc[b];
    return out;
}

// Per-vertex, per-band coefficients of one signal: column 0 is the scaling
// band, column s the s-th wavelet scale.
inline Eigen::MatrixXd sgw_transform(const VoxelGraph& graph, const WaveletConfig& config,
                                     const Eigen::VectorXd& f) {
    if (static_cast<std::size_t>(f.size()) != graph.size()) {
        throw Error(ErrorCode::DimensionMismatch, "signal length does not match graph size");
    }
    FilterBank bank(config, estimate_lambda_max(graph));
    auto bands = apply_filter_bank(laplacian(graph), bank, f);
    Eigen::MatrixXd out(f.size(), static_cast<Eigen::Index>(bank.bands()));
    for (std::size_t b = 0; b < bands.size(); ++b) out.col(static_cast<Eigen::Index>(b)) = bands[b];
    return out;
}

// Same quantity from a full eigendecomposition, used as a reference.
inline Eigen::MatrixXd sgw_transform_exact(const Spectrum& spectrum, const FilterBank& bank,
                                           const Eigen::VectorXd& f) {
    const Eigen::VectorXd F = gft(spectrum, f);
    Eigen::MatrixXd out(f.size(), static_cast<Eigen::Index>(bank.bands()));
    for (std::size_t b = 0; b < bank.bands(); ++b) {
        Eigen::VectorXd G = F;
        for (Eigen::Index l = 0; l < G.size(); ++l) G[l] *= bank.kernel(b, spectrum.eigenvalues[l]);
        out.col(static_cast<Eigen::Index>(b)) = inverse_gft(spectrum, G);
    }
    return out;
}

// Octant of j relative to i, 1..8. Axis a contributes bit a when j is
// strictly below i on that axis, so equal coordinates fall in octant 1.
inline int octant_of(const Eigen::RowVector3d& center, const Eigen::RowVector3d& p) {
    int code = 0;
    for (int a = 0; a < 3; ++a) {
        if (p[a] < center[a]) code |= 1 << a;
    }
    return code + 1;
}

inline Eigen::VectorXd octant_indicator(const VoxelFrame& frame, std::size_t i, int k) {
    if (i >= frame.size()) throw Error(ErrorCode::OutOfRange, "vertex index out of range");
    if (k < 1 || k > 8) throw Error(ErrorCode::OutOfRange, "octant must lie in 1..8");
    const auto& P = frame.positions();
    Eigen::VectorXd o(P.rows());
    const Eigen::RowVector3d c = P.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < P.rows(); ++j) o[j] = octant_of(c, P.row(j)) == k ? 1.0 : 0.0;
    return o;
}

inline constexpr int kNumOctants = 8;
inline constexpr int kNumSignals = 6;  // x, y, z, r, g, b

// Octant x signal x band coefficients of one vertex, flattened in that
// nesting order.
struct FeatureDescriptor {
    Eigen::VectorXd values;

    static std::size_t length(std::size_t bands) { return kNumOctants * kNumSignals * bands; }

    static std::size_t index(int octant, int signal, std::size_t band, std::size_t bands) {
        return (static_cast<std::size_t>(octant - 1) * kNumSignals + static_cast<std::size_t>(signal)) *
                   bands +
               band;
    }
};

// Vertex signals as columns: x, y, z (grid units) then r, g, b.
inline Eigen::MatrixXd frame_signals(const VoxelFrame& frame) {
    Eigen::MatrixXd s(static_cast<Eigen::Index>(frame.size()), kNumSignals);
    s.leftCols(3) = frame.positions();
    s.rightCols(3) = frame.colors();
    return s;
}

namespace detail {

// Descriptors for the vertices in `batch`. Each wavelet psi_{b,i} is formed
// by filtering the impulse at i; the masked inner products then reduce to
// per-octant sums of psi * f.
inline void descriptors_for_batch(const VoxelFrame& frame, const Eigen::SparseMatrix<double>& L,
                                  const FilterBank& bank, const Eigen::MatrixXd& signals,
                                  std::span<const std::size_t> batch,
                                  std::vector<FeatureDescriptor>& out) {
    const auto n = static_cast<Eigen::Index>(frame.size());
    const std::size_t bands = bank.bands();
    Eigen::MatrixXd impulses = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t c = 0; c < batch.size(); ++c) {
        impulses(static_cast<Eigen::Index>(batch[c]), static_cast<Eigen::Index>(c)) = 1.0;
    }
    const auto wavelets = apply_filter_bank(L, bank, impulses);
    const auto& P = frame.positions();

    std::vector<int> octant(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < batch.size(); ++c) {
        const std::size_t i = batch[c];
        const Eigen::RowVector3d center = P.row(static_cast<Eigen::Index>(i));
        for (Eigen::Index j = 0; j < n; ++j) octant[static_cast<std::size_t>(j)] = octant_of(center, P.row(j));

        FeatureDescriptor d;
        d.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(FeatureDescriptor::length(bands)));
        for (std::size_t b = 0; b < bands; ++b) {
            const auto psi = wavelets[b].col(static_cast<Eigen::Index>(c));
            for (Eigen::Index j = 0; j < n; ++j) {
                const double w = psi[j];
                if (w == 0.0) continue;
                const int k = octant[static_cast<std::size_t>(j)];
                for (int s = 0; s < kNumSignals; ++s) {
                    d.values[static_cast<Eigen::Index>(FeatureDescriptor::index(k, s, b, bands))] +=
                        w * signals(j, s);
                }
            }
        }
        out[i] = std::move(d);
    }
}

}  // namespace detail

inline FeatureDescriptor compute_descriptor(const VoxelFrame& frame, const VoxelGraph& graph,
                                            const WaveletConfig& config, std::size_t i) {
    if (graph.size() != frame.size()) {
        throw Error(ErrorCode::DimensionMismatch, "graph was not built on this frame");
    }
    if (i >= frame.size()) throw Error(ErrorCode::OutOfRange, "vertex index out of range");
    FilterBank bank(config, estimate_lambda_max(graph));
    std::vector<FeatureDescriptor> out(frame.size());
    const std::size_t one[1] = {i};
    detail::descriptors_for_batch(frame, laplacian(graph), bank, frame_signals(frame), one, out);
    return out[i];
}

// Descriptor table for every vertex, indexed like the frame.
inline std::vector<FeatureDescriptor> compute_all_descriptors(const VoxelFrame& frame,
                                                              const VoxelGraph& graph,
                                                              const WaveletConfig& config,
                                                              std::size_t batch_size = 256) {
    if (graph.size() != frame.size()) {
        throw Error(ErrorCode::DimensionMismatch, "graph was not built on this frame");
    }
    FilterBank bank(config, estimate_lambda_max(graph));
    const auto L = laplacian(graph);
    const auto signals = frame_signals(frame);
    std::vector<FeatureDescriptor> out(frame.size());
    std::vector<std::size_t> batch;
    for (std::size_t start = 0; start < frame.size(); start += batch_size) {
        batch.clear();
        for (std::size_t i = start; i < std::min(frame.size(), start + batch_size); ++i) batch.push_back(i);
        detail::descriptors_for_batch(frame, L, bank, signals, batch, out);
    }
    return out;
}

}  // namespace pcmc::sgw

#endif  // PCMC_SGW_HPP
