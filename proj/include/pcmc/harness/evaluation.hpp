// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_HARNESS_EVALUATION_HPP
#define PCMC_HARNESS_EVALUATION_HPP

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmc/codec/motion_coding.hpp"
#include "pcmc/codec/prediction.hpp"
#include "pcmc/codec/sequence.hpp"
#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/voxel.hpp"

namespace pcmc::harness {

inline constexpr double kSnrCap = 99.0;

// Mean Euclidean distance between per-vertex vectors.
inline double mean_endpoint_error(const motion::MotionField& a, const motion::MotionField& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "motion fields differ in length");
    if (a.size() == 0) return 0.0;
    return (a.rows() - b.rows()).rowwise().norm().mean();
}

struct PredictionSnr {
    double motion_compensated = 0.0;
    double static_neighbors = 0.0;
    double global_mean = 0.0;
};

// The three color predictors for one frame pair: (i) neighbors in the frame
// warped by coded motion, (ii) neighbors in the unwarped reference, (iii) the
// reference mean color.
inline PredictionSnr compare_predictors(const VoxelFrame& reference, const VoxelFrame& target,
                                        const motion::PrecisionModel& model, const codec::CodecConfig& config) {
    const auto graph = build_knn_graph(reference, config.motion.k_neighbors);
    const auto spectrum = eigendecompose(graph);
    const auto est = motion::estimate_motion(reference, graph, target, model, config.motion);
    const auto coded = codec::encode_motion(spectrum, est.field, config.delta_motion);
    const auto warped = codec::warp_frame(reference, coded.decoded);

    PredictionSnr out;
    out.motion_compensated = codec::prediction_snr_db(target.colors(), codec::predict_color(warped, target, config.color_neighbors), kSnrCap);
    out.static_neighbors = codec::prediction_snr_db(
        target.colors(),
        codec::nearest_neighbor_colors(reference.positions(), reference.colors(), target.positions(), config.color_neighbors),
        kSnrCap);
    const Eigen::RowVector3d mean = reference.colors().colwise().mean();
    const Eigen::MatrixX3d flat = mean.replicate(static_cast<Eigen::Index>(target.size()), 1);
    out.global_mean = codec::prediction_snr_db(target.colors(), flat, kSnrCap);
    return out;
}

inline PredictionSnr average_prediction_snr(const std::vector<VoxelFrame>& frames, const motion::PrecisionModel& model,
                                            const codec::CodecConfig& config) {
    if (frames.size() < 2) throw Error(ErrorCode::InvalidArgument, "prediction comparison needs two frames");
    PredictionSnr sum;
    for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
        const auto p = compare_predictors(frames[t], frames[t + 1], model, config);
        sum.motion_compensated += p.motion_compensated;
        sum.static_neighbors += p.static_neighbors;
        sum.global_mean += p.global_mean;
    }
    const double n = static_cast<double>(frames.size() - 1);
    return {sum.motion_compensated / n, sum.static_neighbors / n, sum.global_mean / n};
}

// Per-frame CSV. Column order is part of the tool's interface.
inline const char* kFrameCsvHeader =
    "frame,type,vertices,geometry_bits,motion_bits,color_bits,geometry_bpv,motion_bpv,color_bpv,total_bpv,"
    "psnr_r,psnr_g,psnr_b,psnr_mean,prediction_snr,anchors";

inline void write_frame_csv(std::ostream& os, const std::vector<codec::EncodedFrame>& frames) {
    os << kFrameCsvHeader << '\n';
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const auto& s = frames[t].stats;
        const bool p = s.type == codec::FrameType::P;
        os << t << ',' << (p ? 'P' : 'I') << ',' << s.vertices << ',' << s.geometry_bits << ',' << s.motion_bits << ','
           << s.color_bits << ',' << s.geometry_bpv() << ',' << s.motion_bpv() << ',' << s.color_bpv() << ','
           << s.total_bpv() << ',' << s.psnr[0] << ',' << s.psnr[1] << ',' << s.psnr[2] << ',' << s.mean_psnr() << ',';
        if (p) os << s.prediction_snr;
        os << ',' << s.anchors << '\n';
    }
}

struct RdPoint {
    double delta_motion = 0.0;
    double delta_color = 0.0;
    double geometry_bpv = 0.0;
    double motion_bpv = 0.0;
    double color_bpv = 0.0;
    double total_bpv = 0.0;
    double psnr = 0.0;
};

inline RdPoint summarize(const codec::EncodedSequence& seq, double delta_motion, double delta_color) {
    RdPoint r{delta_motion, delta_color};
    std::size_t bits_g = 0, bits_m = 0, bits_c = 0, verts = 0;
    for (const auto& f : seq.frames) {
        bits_g += f.stats.geometry_bits;
        bits_m += f.stats.motion_bits;
        bits_c += f.stats.color_bits;
        verts += f.stats.vertices;
        r.psnr += f.stats.mean_psnr();
    }
    const double v = static_cast<double>(verts);
    r.geometry_bpv = static_cast<double>(bits_g) / v;
    r.motion_bpv = static_cast<double>(bits_m) / v;
    r.color_bpv = static_cast<double>(bits_c) / v;
    r.total_bpv = static_cast<double>(bits_g + bits_m + bits_c) / v;
    r.psnr /= static_cast<double>(seq.frames.size());
    return r;
}

// One encode per (motion step, color step) pair. When `intra_only` is set
// every frame is coded as an I frame.
inline std::vector<RdPoint> rd_sweep(const std::vector<VoxelFrame>& frames, const motion::PrecisionModel& model,
                                     codec::CodecConfig config, const std::vector<double>& motion_steps,
                                     const std::vector<double>& color_steps, bool intra_only = false) {
    std::vector<RdPoint> out;
    if (intra_only) {
        config.gop = 1;
        config.delta_color_intra = 0.0;
    }
    for (double dm : motion_steps) {
        for (double dc : color_steps) {
            config.delta_motion = dm;
            config.delta_color = dc;
            out.push_back(summarize(codec::encode_sequence(frames, config, model), dm, dc));
        }
    }
    return out;
}

inline const char* kRdCsvHeader = "delta_motion,delta_color,geometry_bpv,motion_bpv,color_bpv,total_bpv,psnr_mean";

inline void write_rd_csv(std::ostream& os, const std::vector<RdPoint>& points) {
    os << kRdCsvHeader << '\n';
    for (const auto& p : points) {
        os << p.delta_motion << ',' << p.delta_color << ',' << p.geometry_bpv << ',' << p.motion_bpv << ','
           << p.color_bpv << ',' << p.total_bpv << ',' << p.psnr << '\n';
    }
}

}  // namespace pcmc::harness

#endif  // PCMC_HARNESS_EVALUATION_HPP
