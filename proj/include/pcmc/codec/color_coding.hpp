// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_CODEC_COLOR_CODING_HPP
#define PCMC_CODEC_COLOR_CODING_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmc/bitstream.hpp"
#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/laplace_coder.hpp"
#include "pcmc/quantizer.hpp"
#include "pcmc/range_coder.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::codec {

struct ColorConfig {
    double step = 64.0;
    std::size_t block_size = 16;
    std::size_t k_neighbors = 26;
    double decay = 0.95;
    double dc_constant = 1.0;

    void validate(const VoxelGrid& grid) const {
        if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorCode::InvalidArgument, "color step must be positive");
        if (block_size == 0 || !std::has_single_bit(block_size) || block_size > grid.extent()) {
            throw Error(ErrorCode::InvalidArgument, "color block size must be a power of two dividing the grid extent");
        }
        if (k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "color graph needs k >= 1");
        if (!(decay > 0.0 && decay < 1.0)) throw Error(ErrorCode::InvalidArgument, "decay must lie in (0, 1)");
        if (!(dc_constant > 0.0)) throw Error(ErrorCode::InvalidArgument, "DC constant must be positive");
    }
};

// Orthonormal block transform. The first `dc_count` columns are normalized
// indicators of the connected components (ordered by label), the rest are the
// Laplacian eigenvectors with nonzero eigenvalue in ascending order.
struct BlockTransform {
    std::size_t first = 0;  // first vertex of the block in frame order
    std::size_t count = 0;
    Eigen::MatrixXd basis;
    std::vector<double> seeds_ac;  // one per AC column, 1/sqrt(lambda)
    std::vector<double> component_sizes;

    std::size_t dc_count() const { return component_sizes.size(); }
};

inline BlockTransform block_transform(const Eigen::MatrixX3d& positions, std::size_t first, std::size_t count,
                                      std::size_t k) {
    BlockTransform t;
    t.first = first;
    t.count = count;
    const auto n = static_cast<Eigen::Index>(count);
    if (count == 1) {
        t.basis = Eigen::MatrixXd::Ones(1, 1);
        t.component_sizes = {1.0};
        return t;
    }
    const Eigen::MatrixX3d pts = positions.middleRows(static_cast<Eigen::Index>(first), n);
    const auto graph = build_knn_graph(pts, std::min(k, count - 1));
    std::size_t ncomp = 0;
    const auto label = connected_components(graph, &ncomp);
    const auto spectrum = eigendecompose(graph, count);

    t.component_sizes.assign(ncomp, 0.0);
    for (auto l : label) t.component_sizes[l] += 1.0;
    t.basis.resize(n, n);
    t.basis.leftCols(static_cast<Eigen::Index>(ncomp)).setZero();
    for (Eigen::Index v = 0; v < n; ++v) {
        const auto c = label[static_cast<std::size_t>(v)];
        t.basis(v, static_cast<Eigen::Index>(c)) = 1.0 / std::sqrt(t.component_sizes[c]);
    }
    const auto nc = static_cast<Eigen::Index>(ncomp);
    t.basis.rightCols(n - nc) = spectrum.eigenvectors.rightCols(n - nc);
    for (Eigen::Index l = nc; l < n; ++l) {
        t.seeds_ac.push_back(1.0 / std::sqrt(std::max(spectrum.eigenvalues[l], 1e-6)));
    }
    return t;
}

// Vertex ranges of the occupied k^3 blocks. Blocks are contiguous in Morton
// order because k is a power of two.
inline std::vector<std::pair<std::size_t, std::size_t>> color_blocks(const VoxelSet& set, std::size_t block_size) {
    const int shift = 3 * std::countr_zero(block_size);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= set.size(); ++i) {
        if (i == set.size() || (set.codes[i] >> shift) != (set.codes[start] >> shift)) {
            out.emplace_back(start, i - start);
            start = i;
        }
    }
    return out;
}

namespace detail {

// Per-channel entropy state shared across the blocks of one frame.
struct ChannelModels {
    LaplacianModel ac;
    LaplacianModel dc;
    std::int64_t dc_sum = 0;
    std::int64_t dc_count = 0;

    explicit ChannelModels(double decay) : ac(decay), dc(decay) {}

    std::int32_t dc_prediction() const {
        if (dc_count == 0) return 0;
        const double mean = static_cast<double>(dc_sum) / static_cast<double>(dc_count);
        return static_cast<std::int32_t>(std::llround(mean));
    }

    void record_dc(std::int32_t value) {
        dc_sum += value;
        ++dc_count;
    }
};

inline std::array<ChannelModels, 3> make_models(double decay) {
    return {ChannelModels(decay), ChannelModels(decay), ChannelModels(decay)};
}

inline void clamp_colors(Eigen::MatrixX3d& c) { c = c.cwiseMax(0.0).cwiseMin(255.0); }

}  // namespace detail

struct ColorCoding {
    std::vector<std::uint8_t> bytes;
    Eigen::MatrixX3d reconstruction;
};

// Payload: [u32 block count][range-coded coefficients]. Within the range
// coder, blocks follow Morton order; per block the channels R, G, B follow
// in turn, each as its DC terms and then its AC terms by ascending frequency.
inline ColorCoding encode_color(const Eigen::MatrixX3d& colors, const Eigen::MatrixX3d& prediction,
                                const VoxelFrame& geometry, const ColorConfig& config) {
    config.validate(geometry.grid());
    if (colors.rows() != static_cast<Eigen::Index>(geometry.size()) || prediction.rows() != colors.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "colors, prediction and geometry sizes differ");
    }
    const QuantizerSpec q(config.step);
    const auto blocks = color_blocks(geometry.geometry(), config.block_size);
    ColorCoding out;
    put_u32(out.bytes, static_cast<std::uint32_t>(blocks.size()));
    out.reconstruction = prediction;

    RangeEncoder rc;
    auto models = detail::make_models(config.decay);
    for (const auto& [first, count] : blocks) {
        const auto t = block_transform(geometry.positions(), first, count, config.k_neighbors);
        const auto rows = static_cast<Eigen::Index>(count), start = static_cast<Eigen::Index>(first);
        for (int ch = 0; ch < 3; ++ch) {
            auto& m = models[static_cast<std::size_t>(ch)];
            const Eigen::VectorXd residual = colors.col(ch).segment(start, rows) - prediction.col(ch).segment(start, rows);
            const auto symbols = quantize(t.basis.transpose() * residual, q);
            for (std::size_t c = 0; c < t.dc_count(); ++c) {
                const double seed = config.dc_constant / t.component_sizes[c];
                encode_laplace(rc, m.dc, symbols[c] - m.dc_prediction(), seed);
                m.record_dc(symbols[c]);
            }
            for (std::size_t l = t.dc_count(); l < count; ++l) {
                encode_laplace(rc, m.ac, symbols[l], t.seeds_ac[l - t.dc_count()]);
            }
            out.reconstruction.col(ch).segment(start, rows) += t.basis * dequantize(symbols, q);
        }
    }
    const auto coded = rc.finish();
    out.bytes.insert(out.bytes.end(), coded.begin(), coded.end());
    detail::clamp_colors(out.reconstruction);
    return out;
}

inline Eigen::MatrixX3d decode_color(std::span<const std::uint8_t> payload, const Eigen::MatrixX3d& prediction,
                                     const VoxelFrame& geometry, const ColorConfig& config) {
    config.validate(geometry.grid());
    if (prediction.rows() != static_cast<Eigen::Index>(geometry.size())) {
        throw Error(ErrorCode::DimensionMismatch, "prediction and geometry sizes differ");
    }
    const QuantizerSpec q(config.step);
    const auto blocks = color_blocks(geometry.geometry(), config.block_size);
    ByteReader br(payload);
    const std::uint32_t declared = br.u32();
    if (declared != blocks.size()) {
        throw StreamError(ErrorCode::MalformedStream,
                          "color payload declares " + std::to_string(declared) + " blocks, geometry has " +
                              std::to_string(blocks.size()),
                          0);
    }
    Eigen::MatrixX3d out = prediction;
    RangeDecoder rd(payload.subspan(4));
    auto models = detail::make_models(config.decay);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto [first, count] = blocks[b];
        const auto t = block_transform(geometry.positions(), first, count, config.k_neighbors);
        const auto rows = static_cast<Eigen::Index>(count), start = static_cast<Eigen::Index>(first);
        try {
            for (int ch = 0; ch < 3; ++ch) {
                auto& m = models[static_cast<std::size_t>(ch)];
                std::vector<std::int32_t> symbols(count);
                for (std::size_t c = 0; c < t.dc_count(); ++c) {
                    const double seed = config.dc_constant / t.component_sizes[c];
                    const std::int64_t v = std::int64_t{decode_laplace(rd, m.dc, seed)} + m.dc_prediction();
                    if (v < INT32_MIN || v > INT32_MAX) {
                        throw StreamError(ErrorCode::MalformedStream, "DC value overflows", rd.position());
                    }
                    symbols[c] = static_cast<std::int32_t>(v);
                    m.record_dc(symbols[c]);
                }
                for (std::size_t l = t.dc_count(); l < count; ++l) {
                    symbols[l] = decode_laplace(rd, m.ac, t.seeds_ac[l - t.dc_count()]);
                }
                out.col(ch).segment(start, rows) += t.basis * dequantize(symbols, q);
            }
        } catch (const StreamError& e) {
            throw StreamError(e.code(), "color block " + std::to_string(b) + ": " + e.what(), e.position() + 4);
        }
    }
    detail::clamp_colors(out);
    return out;
}

}  // namespace pcmc::codec

#endif  // PCMC_CODEC_COLOR_CODING_HPP
