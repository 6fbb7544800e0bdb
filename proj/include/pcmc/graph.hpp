// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_GRAPH_HPP
#define PCMC_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <lapacke.h>

#include "pcmc/error.hpp"
#include "pcmc/spatial_index.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc {

struct Edge {
    std::size_t i;
    std::size_t j;
    double weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Weighted undirected graph over frame vertices. Edges are stored once with
// i < j, sorted lexicographically; an adjacency list mirrors them for
// matrix-free Laplacian products.
class VoxelGraph {
public:
    VoxelGraph() = default;

    VoxelGraph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return a.i < b.i || (a.i == b.i && a.j < b.j);
        });
        degree_.assign(n_, 0.0);
        adjacency_.assign(n_, {});
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto& ed = edges_[e];
            if (ed.i >= ed.j || ed.j >= n_) {
                throw Error(ErrorCode::InvalidArgument, "edge endpoints must satisfy i < j < n");
            }
            if (!(ed.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "edge weight must be positive");
            if (e > 0 && edges_[e - 1].i == ed.i && edges_[e - 1].j == ed.j) {
                throw Error(ErrorCode::InvalidArgument, "duplicate edge");
            }
            degree_[ed.i] += ed.weight;
            degree_[ed.j] += ed.weight;
            adjacency_[ed.i].emplace_back(ed.j, ed.weight);
            adjacency_[ed.j].emplace_back(ed.i, ed.weight);
        }
    }

    std::size_t size() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& degree() const { return degree_; }
    const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t v) const {
        return adjacency_[v];
    }

    // y = L x with L = D - W, column by column.
    Eigen::MatrixXd apply_laplacian(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd y(x.rows(), x.cols());
        for (std::size_t v = 0; v < n_; ++v) {
            const auto r = static_cast<Eigen::Index>(v);
            y.row(r) = degree_[v] * x.row(r);
            for (const auto& [u, w] : adjacency_[v]) y.row(r) -= w * x.row(static_cast<Eigen::Index>(u));
        }
        return y;
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> degree_;
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

// Each vertex links to its k nearest others (Euclidean, ties by index); an
// edge exists when either endpoint selects it, weighted by 1/distance.
inline VoxelGraph build_knn_graph(const Eigen::MatrixX3d& positions, std::size_t k = 26) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    const auto n = static_cast<std::size_t>(positions.rows());
    SpatialIndex index(positions, 1.0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * k);
    for (std::size_t v = 0; v < n; ++v) {
        for (const auto& nb : index.knn(positions.row(static_cast<Eigen::Index>(v)).transpose(), k, v)) {
            pairs.emplace_back(std::min(v, nb.index), std::max(v, nb.index));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        const double d = (positions.row(static_cast<Eigen::Index>(i)) -
                          positions.row(static_cast<Eigen::Index>(j)))
                             .norm();
        edges.push_back({i, j, 1.0 / d});
    }
    return VoxelGraph(n, std::move(edges));
}

inline VoxelGraph build_knn_graph(const VoxelFrame& frame, std::size_t k = 26) {
    if (frame.empty()) throw Error(ErrorCode::EmptyInput, "cannot build a graph on an empty frame");
    return build_knn_graph(frame.positions(), k);
}

inline Eigen::SparseMatrix<double> laplacian(const VoxelGraph& graph) {
    const auto n = static_cast<Eigen::Index>(graph.size());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(graph.size() + 2 * graph.edges().size());
    for (std::size_t v = 0; v < graph.size(); ++v) {
        const auto r = static_cast<Eigen::Index>(v);
        t.emplace_back(r, r, graph.degree()[v]);
    }
    for (const auto& e : graph.edges()) {
        const auto i = static_cast<Eigen::Index>(e.i), j = static_cast<Eigen::Index>(e.j);
        t.emplace_back(i, j, -e.weight);
        t.emplace_back(j, i, -e.weight);
    }
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

// Union-find component labels, numbered in order of first appearance.
inline std::vector<std::size_t> connected_components(const VoxelGraph& graph,
                                                     std::size_t* count = nullptr) {
    std::vector<std::size_t> parent(graph.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& e : graph.edges()) {
        auto a = find(e.i), b = find(e.j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::size_t> label(graph.size());
    std::vector<std::size_t> root_label(graph.size(), graph.size());
    std::size_t next = 0;
    for (std::size_t v = 0; v < graph.size(); ++v) {
        auto r = find(v);
        if (root_label[r] == graph.size()) root_label[r] = next++;
        label[v] = root_label[r];
    }
    if (count) *count = next;
    return label;
}

// Full eigendecomposition of the graph Laplacian. Eigenvalues ascend; each
// eigenvector's first entry with magnitude above 1e-10 is made positive.
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // column l is the l-th basis vector

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }

    double lambda_max() const { return eigenvalues.size() ? eigenvalues[eigenvalues.size() - 1] : 0.0; }

    // Eigenvalues at or below this threshold count as zero.
    double zero_threshold() const { return std::max(1e-8 * lambda_max(), 1e-13); }

    std::size_t zero_count() const {
        std::size_t c = 0;
        for (Eigen::Index l = 0; l < eigenvalues.size(); ++l) c += eigenvalues[l] <= zero_threshold();
        return c;
    }
};

inline constexpr std::size_t kDefaultDenseLimit = 20000;

inline Spectrum eigendecompose(const VoxelGraph& graph, std::size_t limit = kDefaultDenseLimit) {
    const std::size_t n = graph.size();
    if (n > limit) {
        throw Error(ErrorCode::Capacity, "graph with " + std::to_string(n) +
                                             " vertices exceeds the dense decomposition limit of " +
                                             std::to_string(limit) + "; process it blockwise");
    }
    Spectrum s;
    if (n == 0) return s;
    Eigen::MatrixXd L = Eigen::MatrixXd(laplacian(graph));
    s.eigenvalues.resize(static_cast<Eigen::Index>(n));
    const auto ld = static_cast<lapack_int>(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', ld, L.data(), ld, s.eigenvalues.data());
    if (info != 0) {
        throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed, info=" + std::to_string(info));
    }
    s.eigenvectors = std::move(L);

    const double thr = s.zero_threshold();
    for (Eigen::Index l = 0; l < s.eigenvalues.size(); ++l) {
        if (std::abs(s.eigenvalues[l]) <= thr) s.eigenvalues[l] = 0.0;
        auto col = s.eigenvectors.col(l);
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            if (std::abs(col[r]) > 1e-10) {
                if (col[r] < 0) col = -col;
                break;
            }
        }
    }
    return s;
}

inline void require_length(const Spectrum& s, Eigen::Index len) {
    if (static_cast<std::size_t>(len) != s.size()) {
        throw Error(ErrorCode::DimensionMismatch, "signal length " + std::to_string(len) +
                                                      " does not match spectrum size " +
                                                      std::to_string(s.size()));
    }
}

// Accepts a single signal or several signals stacked as columns.
inline Eigen::MatrixXd gft(const Spectrum& s, const Eigen::MatrixXd& f) {
    require_length(s, f.rows());
    return s.eigenvectors.transpose() * f;
}

inline Eigen::MatrixXd inverse_gft(const Spectrum& s, const Eigen::MatrixXd& coefficients) {
    require_length(s, coefficients.rows());
    return s.eigenvectors * coefficients;
}

}  // namespace pcmc

#endif  // PCMC_GRAPH_HPP
