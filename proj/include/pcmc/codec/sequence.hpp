// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_CODEC_SEQUENCE_HPP
#define PCMC_CODEC_SEQUENCE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmc/bitstream.hpp"
#include "pcmc/codec/color_coding.hpp"
#include "pcmc/codec/geometry_coding.hpp"
#include "pcmc/codec/motion_coding.hpp"
#include "pcmc/codec/prediction.hpp"
#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::codec {

inline constexpr char kMagic[8] = {'P', 'C', 'M', 'C', 'S', 'E', 'Q', '\0'};
inline constexpr std::uint32_t kVersion = 1;

struct CodecConfig {
    motion::MotionConfig motion;
    double delta_motion = 0.5;
    double delta_color = 64.0;
    double delta_color_intra = 0.0;  // 0: same as delta_color
    double ema_decay = 0.95;
    double dc_constant = 1.0;
    std::size_t color_block = 16;
    std::size_t color_neighbors = 3;
    std::size_t gop = 0;  // 0: only the first frame is intra

    double intra_color_step() const { return delta_color_intra > 0.0 ? delta_color_intra : delta_color; }

    void validate() const {
        motion.wavelet.validate();
        auto positive = [](double v, const char* what) {
            if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
        };
        positive(delta_motion, "motion step");
        positive(delta_color, "color step");
        if (delta_color_intra < 0.0) throw Error(ErrorCode::InvalidArgument, "intra color step must not be negative");
        positive(dc_constant, "DC constant");
        if (!(ema_decay > 0.0 && ema_decay < 1.0)) throw Error(ErrorCode::InvalidArgument, "decay must lie in (0, 1)");
        if (motion.k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
        if (color_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "color neighbor count must be at least 1");
    }
};

// Fixed-layout little-endian header; everything the decoder needs.
struct SequenceHeader {
    VoxelGrid grid;
    std::uint32_t num_scales = 4;
    std::uint32_t chebyshev_degree = 30;
    double lowpass_factor = 2.0;
    std::uint32_t k_neighbors = 26;
    double delta_motion = 0.5;
    double delta_color = 64.0;
    double delta_color_intra = 64.0;
    double ema_decay = 0.95;
    double dc_constant = 1.0;
    std::uint32_t color_block = 16;
    std::uint32_t color_neighbors = 3;
    std::uint32_t frame_count = 0;
    std::uint32_t gop = 0;

    static constexpr std::size_t kSize = 8 + 4 + 3 * 8 + 8 + 4 + 4 + 4 + 8 + 4 + 5 * 8 + 4 * 4;

    static SequenceHeader from_config(const CodecConfig& c, const VoxelGrid& grid, std::size_t frames) {
        SequenceHeader h;
        h.grid = grid;
        h.num_scales = static_cast<std::uint32_t>(c.motion.wavelet.num_scales);
        h.chebyshev_degree = static_cast<std::uint32_t>(c.motion.wavelet.chebyshev_degree);
        h.lowpass_factor = c.motion.wavelet.lowpass_factor;
        h.k_neighbors = static_cast<std::uint32_t>(c.motion.k_neighbors);
        h.delta_motion = c.delta_motion;
        h.delta_color = c.delta_color;
        h.delta_color_intra = c.intra_color_step();
        h.ema_decay = c.ema_decay;
        h.dc_constant = c.dc_constant;
        h.color_block = static_cast<std::uint32_t>(c.color_block);
        h.color_neighbors = static_cast<std::uint32_t>(c.color_neighbors);
        h.frame_count = static_cast<std::uint32_t>(frames);
        h.gop = static_cast<std::uint32_t>(c.gop);
        return h;
    }

    ColorConfig color_config(bool intra) const {
        ColorConfig cc;
        cc.step = intra ? delta_color_intra : delta_color;
        cc.block_size = color_block;
        cc.decay = ema_decay;
        cc.dc_constant = dc_constant;
        return cc;
    }

    bool is_intra(std::size_t index) const { return index == 0 || (gop > 0 && index % gop == 0); }

    void write(std::vector<std::uint8_t>& out) const {
        out.insert(out.end(), kMagic, kMagic + 8);
        put_u32(out, kVersion);
        for (int a = 0; a < 3; ++a) put_f64(out, grid.origin[a]);
        put_f64(out, grid.stepsize);
        put_u32(out, grid.depth);
        put_u32(out, num_scales);
        put_u32(out, chebyshev_degree);
        put_f64(out, lowpass_factor);
        put_u32(out, k_neighbors);
        put_f64(out, delta_motion);
        put_f64(out, delta_color);
        put_f64(out, delta_color_intra);
        put_f64(out, ema_decay);
        put_f64(out, dc_constant);
        put_u32(out, color_block);
        put_u32(out, color_neighbors);
        put_u32(out, frame_count);
        put_u32(out, gop);
    }

    static SequenceHeader read(ByteReader& br) {
        const auto magic = br.take(8);
        if (std::memcmp(magic.data(), kMagic, 8) != 0) {
            throw StreamError(ErrorCode::HeaderCorrupt, "bad container magic", 0);
        }
        const std::uint32_t version = br.u32();
        if (version != kVersion) {
            throw StreamError(ErrorCode::VersionMismatch, "container version " + std::to_string(version) +
                                                               ", expected " + std::to_string(kVersion),
                              8);
        }
        SequenceHeader h;
        for (int a = 0; a < 3; ++a) h.grid.origin[a] = br.f64();
        h.grid.stepsize = br.f64();
        h.grid.depth = br.u32();
        h.num_scales = br.u32();
        h.chebyshev_degree = br.u32();
        h.lowpass_factor = br.f64();
        h.k_neighbors = br.u32();
        h.delta_motion = br.f64();
        h.delta_color = br.f64();
        h.delta_color_intra = br.f64();
        h.ema_decay = br.f64();
        h.dc_constant = br.f64();
        h.color_block = br.u32();
        h.color_neighbors = br.u32();
        h.frame_count = br.u32();
        h.gop = br.u32();
        try {
            h.grid.validate();
            h.color_config(false).validate(h.grid);
            h.color_config(true).validate(h.grid);
            if (!(h.delta_motion > 0.0) || h.k_neighbors == 0 || h.color_neighbors == 0) {
                throw Error(ErrorCode::InvalidArgument, "coder parameters out of range");
            }
        } catch (const Error& e) {
            throw StreamError(ErrorCode::HeaderCorrupt, e.what(), br.position());
        }
        return h;
    }
};

enum class FrameType : std::uint8_t { I = 0, P = 1 };

struct FrameStats {
    FrameType type = FrameType::I;
    std::size_t vertices = 0;
    std::size_t geometry_bits = 0;
    std::size_t motion_bits = 0;
    std::size_t color_bits = 0;
    std::array<double, 3> psnr{};  // per channel, capped at 99 dB
    double prediction_snr = 0.0;   // P frames; capped at 99 dB
    double motion_sqnr = 0.0;      // P frames; capped at 99 dB
    std::size_t anchors = 0;
    std::size_t clamped = 0;

    double bpv(std::size_t bits) const { return vertices ? static_cast<double>(bits) / static_cast<double>(vertices) : 0.0; }
    double geometry_bpv() const { return bpv(geometry_bits); }
    double motion_bpv() const { return bpv(motion_bits); }
    double color_bpv() const { return bpv(color_bits); }
    double total_bpv() const { return bpv(geometry_bits + motion_bits + color_bits); }
    double mean_psnr() const { return (psnr[0] + psnr[1] + psnr[2]) / 3.0; }
};

struct EncodedFrame {
    FrameType type = FrameType::I;
    std::vector<std::uint8_t> geometry;
    std::vector<std::uint8_t> motion;
    std::vector<std::uint8_t> color;
    FrameStats stats;
};

struct EncodedSequence {
    SequenceHeader header;
    std::vector<EncodedFrame> frames;
    std::vector<VoxelFrame> reconstruction;

    std::vector<std::uint8_t> bytes() const {
        std::vector<std::uint8_t> out;
        header.write(out);
        for (const auto& f : frames) {
            out.push_back(static_cast<std::uint8_t>(f.type));
            for (const auto* p : {&f.geometry, &f.motion, &f.color}) {
                put_u32(out, static_cast<std::uint32_t>(p->size()));
                out.insert(out.end(), p->begin(), p->end());
            }
        }
        return out;
    }
};

inline double psnr_db(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double cap = 99.0) {
    if (a.size() == 0) return cap;
    const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
    if (mse == 0.0) return cap;
    return std::min(cap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

// Decoder-side state for one P frame: reference graph spectrum, decoded
// motion, warped frame, color prediction.
struct PredictionContext {
    Spectrum spectrum;
    motion::MotionField motion;
    WarpedFrame warped;
};

namespace detail {

inline Spectrum reference_spectrum(const VoxelFrame& reference, std::size_t k, VoxelGraph* graph_out = nullptr) {
    auto graph = build_knn_graph(reference, k);
    auto s = eigendecompose(graph);
    if (graph_out) *graph_out = std::move(graph);
    return s;
}

}  // namespace detail

// Codes one frame against `reference` (nullptr for intra). Returns the frame
// and its decoded reconstruction.
inline EncodedFrame encode_frame(const VoxelFrame& target, const VoxelFrame* reference, const SequenceHeader& header,
                                 const CodecConfig& config, const motion::PrecisionModel& model,
                                 VoxelFrame& decoded) {
    EncodedFrame f;
    f.stats.vertices = target.size();
    if (!reference) {
        f.type = FrameType::I;
        f.geometry = encode_geometry_I(target.geometry());
        const Eigen::MatrixX3d zero = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(target.size()), 3);
        auto cc = encode_color(target.colors(), zero, target, header.color_config(true));
        f.color = std::move(cc.bytes);
        decoded = target.with_colors(std::move(cc.reconstruction));
    } else {
        f.type = FrameType::P;
        VoxelGraph graph(0, {});
        const auto spectrum = detail::reference_spectrum(*reference, header.k_neighbors, &graph);
        const auto est = motion::estimate_motion(*reference, graph, target, model, config.motion);
        f.stats.anchors = est.diagnostics.anchors;
        auto mc = encode_motion(spectrum, est.field, header.delta_motion);
        f.stats.motion_sqnr = std::min(99.0, sqnr_db(est.field, mc.decoded));
        f.motion = std::move(mc.bytes);
        const auto warped = warp_frame(*reference, mc.decoded);
        f.stats.clamped = warped.clamped;
        f.geometry = encode_geometry_P(warped.occupied, target.geometry());
        const auto pred = predict_color(warped, target, header.color_neighbors);
        f.stats.prediction_snr = prediction_snr_db(target.colors(), pred);
        auto cc = encode_color(target.colors(), pred, target, header.color_config(false));
        f.color = std::move(cc.bytes);
        decoded = target.with_colors(std::move(cc.reconstruction));
    }
    f.stats.type = f.type;
    f.stats.geometry_bits = f.geometry.size() * 8;
    f.stats.motion_bits = f.motion.size() * 8;
    f.stats.color_bits = f.color.size() * 8;
    for (int ch = 0; ch < 3; ++ch) f.stats.psnr[static_cast<std::size_t>(ch)] = psnr_db(target.colors().col(ch), decoded.colors().col(ch));
    return f;
}

inline EncodedSequence encode_sequence(const std::vector<VoxelFrame>& frames, const CodecConfig& config,
                                       const motion::PrecisionModel& model) {
    if (frames.empty()) throw Error(ErrorCode::EmptyInput, "no frames to encode");
    config.validate();
    const VoxelGrid& grid = frames.front().grid();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (!(frames[t].grid() == grid)) {
            throw Error(ErrorCode::GridMismatch, "frame " + std::to_string(t) + " uses a different grid");
        }
        if (frames[t].empty()) throw Error(ErrorCode::EmptyInput, "frame " + std::to_string(t) + " is empty");
    }
    EncodedSequence seq;
    seq.header = SequenceHeader::from_config(config, grid, frames.size());
    seq.header.color_config(false).validate(grid);
    for (std::size_t t = 0; t < frames.size(); ++t) {
        VoxelFrame decoded;
        const VoxelFrame* ref = seq.header.is_intra(t) ? nullptr : &seq.reconstruction.back();
        seq.frames.push_back(encode_frame(frames[t], ref, seq.header, config, model, decoded));
        seq.reconstruction.push_back(std::move(decoded));
    }
    return seq;
}

struct DecodedSequence {
    SequenceHeader header;
    std::vector<VoxelFrame> frames;
};

inline DecodedSequence decode_sequence(std::span<const std::uint8_t> bytes) {
    ByteReader br(bytes);
    DecodedSequence out;
    out.header = SequenceHeader::read(br);
    const auto& h = out.header;
    for (std::uint32_t t = 0; t < h.frame_count; ++t) {
        try {
            const std::size_t at = br.position();
            const auto type = br.u8();
            if (type > 1) throw StreamError(ErrorCode::MalformedStream, "unknown frame type", at);
            auto geom = br.take(br.u32());
            auto mot = br.take(br.u32());
            auto col = br.take(br.u32());
            const bool intra = type == static_cast<std::uint8_t>(FrameType::I);
            if (intra != h.is_intra(t)) throw StreamError(ErrorCode::MalformedStream, "frame type disagrees with GOP", at);
            if (intra) {
                if (!mot.empty()) throw StreamError(ErrorCode::MalformedStream, "I frame carries motion", at);
                const VoxelFrame geometry(decode_geometry_I(geom, h.grid));
                if (geometry.empty()) throw StreamError(ErrorCode::MalformedStream, "empty intra frame", at);
                const Eigen::MatrixX3d zero = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(geometry.size()), 3);
                out.frames.push_back(geometry.with_colors(decode_color(col, zero, geometry, h.color_config(true))));
            } else {
                const VoxelFrame& ref = out.frames.back();
                const auto spectrum = detail::reference_spectrum(ref, h.k_neighbors);
                const auto v = decode_motion(spectrum, mot, h.delta_motion);
                const auto warped = warp_frame(ref, v);
                const VoxelFrame geometry(decode_geometry_P(warped.occupied, geom));
                if (geometry.empty()) throw StreamError(ErrorCode::MalformedStream, "empty predicted frame", at);
                const auto pred = predict_color(warped, geometry, h.color_neighbors);
                out.frames.push_back(geometry.with_colors(decode_color(col, pred, geometry, h.color_config(false))));
            }
        } catch (const Error& e) {
            throw Error(e.code(), "frame " + std::to_string(t) + ": " + e.what());
        }
    }
    if (br.remaining() != 0) throw StreamError(ErrorCode::MalformedStream, "trailing bytes after last frame", br.position());
    return out;
}

}  // namespace pcmc::codec

#endif  // PCMC_CODEC_SEQUENCE_HPP
