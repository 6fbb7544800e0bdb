// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_CODEC_MOTION_CODING_HPP
#define PCMC_CODEC_MOTION_CODING_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmc/bitstream.hpp"
#include "pcmc/error.hpp"
#include "pcmc/graph.hpp"
#include "pcmc/motion.hpp"
#include "pcmc/quantizer.hpp"
#include "pcmc/rlgr.hpp"

namespace pcmc::codec {

// Motion payload: one RLGR payload ([u32 count][bits]) holding the 3N
// quantized coefficients interleaved by index, x0 y0 z0 x1 y1 z1 ..., so the
// near-zero tails of the three coordinates form a single run.
namespace detail {

inline std::vector<std::uint8_t> code_interleaved(const Eigen::MatrixXd& values, const QuantizerSpec& q,
                                                  Eigen::MatrixXd& dequantized) {
    const Eigen::MatrixXd rows_first = values.transpose();  // 3 x N, column-major = interleaved
    const auto symbols = quantize(Eigen::Map<const Eigen::VectorXd>(rows_first.data(), rows_first.size()), q);
    const Eigen::VectorXd deq = dequantize(symbols, q);
    dequantized = Eigen::Map<const Eigen::MatrixXd>(deq.data(), 3, values.rows()).transpose();
    return rlgr::encode_payload(symbols);
}

inline Eigen::MatrixXd read_interleaved(std::span<const std::uint8_t> bytes, std::size_t n, const QuantizerSpec& q) {
    const auto symbols = rlgr::decode_payload(bytes);
    if (symbols.size() != 3 * n) {
        throw StreamError(ErrorCode::DimensionMismatch,
                          "motion payload holds " + std::to_string(symbols.size()) + " coefficients, expected " +
                              std::to_string(3 * n),
                          0);
    }
    const Eigen::VectorXd deq = dequantize(symbols, q);
    return Eigen::Map<const Eigen::MatrixXd>(deq.data(), 3, static_cast<Eigen::Index>(n)).transpose();
}

}  // namespace detail

struct MotionCoding {
    std::vector<std::uint8_t> bytes;
    motion::MotionField decoded;
};

// GFT on the reference graph, uniform quantization, RLGR.
inline MotionCoding encode_motion(const Spectrum& spectrum, const motion::MotionField& field, double step) {
    if (field.size() != spectrum.size()) {
        throw Error(ErrorCode::DimensionMismatch, "motion field and spectrum sizes differ");
    }
    const QuantizerSpec q(step);
    MotionCoding out;
    Eigen::MatrixXd deq;
    out.bytes = detail::code_interleaved(gft(spectrum, field.rows()), q, deq);
    out.decoded = motion::MotionField::from_rows(inverse_gft(spectrum, deq));
    return out;
}

inline motion::MotionField decode_motion(const Spectrum& spectrum, std::span<const std::uint8_t> bytes, double step) {
    const QuantizerSpec q(step);
    return motion::MotionField::from_rows(inverse_gft(spectrum, detail::read_interleaved(bytes, spectrum.size(), q)));
}

// Signal-domain baseline: quantize the vectors directly, same RLGR stage.
inline MotionCoding encode_motion_signal_domain(const motion::MotionField& field, double step) {
    const QuantizerSpec q(step);
    MotionCoding out;
    Eigen::MatrixXd deq;
    out.bytes = detail::code_interleaved(field.rows(), q, deq);
    out.decoded = motion::MotionField::from_rows(deq);
    return out;
}

inline motion::MotionField decode_motion_signal_domain(std::span<const std::uint8_t> bytes, std::size_t n, double step) {
    return motion::MotionField::from_rows(detail::read_interleaved(bytes, n, QuantizerSpec(step)));
}

// Signal-to-quantization-noise ratio in dB; infinite for exact coding.
inline double sqnr_db(const motion::MotionField& original, const motion::MotionField& decoded) {
    const double noise = (original.stacked - decoded.stacked).squaredNorm();
    const double signal = original.stacked.squaredNorm();
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / noise);
}

}  // namespace pcmc::codec

#endif  // PCMC_CODEC_MOTION_CODING_HPP
