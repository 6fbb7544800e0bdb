// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_QUANTIZER_HPP
#define PCMC_QUANTIZER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcmc/error.hpp"

namespace pcmc {

struct QuantizerSpec {
    double step = 1.0;

    explicit QuantizerSpec(double step_) : step(step_) {
        if (!(step > 0.0) || !std::isfinite(step)) {
            throw Error(ErrorCode::InvalidArgument, "quantizer step must be positive and finite");
        }
    }
};

// Uniform quantization, round(F / step) with ties away from zero.
inline std::vector<std::int32_t> quantize(const Eigen::VectorXd& values, const QuantizerSpec& q) {
    std::vector<std::int32_t> out(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorCode::InvalidArgument, "non-finite value at index " + std::to_string(i));
        }
        const double r = std::round(values[i] / q.step);
        if (std::abs(r) > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
            throw Error(ErrorCode::OutOfRange, "quantized value overflows 32 bits at index " + std::to_string(i));
        }
        out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(r);
    }
    return out;
}

inline Eigen::VectorXd dequantize(const std::vector<std::int32_t>& symbols, const QuantizerSpec& q) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t i = 0; i < symbols.size(); ++i) out[static_cast<Eigen::Index>(i)] = q.step * symbols[i];
    return out;
}

}  // namespace pcmc

#endif  // PCMC_QUANTIZER_HPP
