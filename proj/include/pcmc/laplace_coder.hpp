// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_LAPLACE_CODER_HPP
#define PCMC_LAPLACE_CODER_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcmc/bitstream.hpp"
#include "pcmc/error.hpp"
#include "pcmc/range_coder.hpp"

namespace pcmc {

// Discretized zero-mean Laplacian over integers, truncated to [-R, R] plus
// one escape symbol that takes the tail mass. Every symbol gets one count of
// floor on top of its share, so any value stays decodable.
class DiscreteLaplace {
public:
    static constexpr unsigned kTotalBits = 16;
    static constexpr std::uint32_t kTotal = 1u << kTotalBits;
    static constexpr double kMinDiversity = 1e-3;
    static constexpr double kMaxDiversity = 1e6;
    static constexpr std::int32_t kMinRadius = 15;
    static constexpr std::int32_t kMaxRadius = 2047;

    explicit DiscreteLaplace(double diversity)
        : b_(std::clamp(diversity, kMinDiversity, kMaxDiversity)),
          radius_(static_cast<std::int32_t>(std::clamp(std::ceil(12.0 * b_), double(kMinRadius), double(kMaxRadius)))),
          spread_(kTotal - static_cast<std::uint32_t>(2 * radius_ + 2)),
          base_(cdf(-radius_ - 0.5)) {}

    std::int32_t radius() const { return radius_; }
    std::uint32_t escape_index() const { return static_cast<std::uint32_t>(2 * radius_ + 1); }

    // Cumulative count below symbol index i, i in [0, 2R + 2].
    std::uint32_t cum(std::uint32_t i) const {
        if (i >= escape_index() + 1) return kTotal;
        const double g = cdf(static_cast<double>(i) - radius_ - 0.5) - base_;
        return i + static_cast<std::uint32_t>(std::floor(spread_ * std::max(g, 0.0)));
    }

    // Symbol index whose interval contains `target`.
    std::uint32_t find(std::uint32_t target) const {
        std::uint32_t lo = 0, hi = escape_index() + 1;  // cum(lo) <= target < cum(hi)
        while (hi - lo > 1) {
            const std::uint32_t mid = lo + (hi - lo) / 2;
            if (cum(mid) <= target) lo = mid;
            else hi = mid;
        }
        return lo;
    }

private:
    double cdf(double x) const { return x < 0.0 ? 0.5 * std::exp(x / b_) : 1.0 - 0.5 * std::exp(-x / b_); }

    double b_;
    std::int32_t radius_;
    double spread_;
    double base_;
};

// Adaptive diversity: each symbol is modeled with b = scale * seed, and the
// scale tracks |symbol| / seed by an exponential moving average.
class LaplacianModel {
public:
    static constexpr double kMinScale = 1e-3;

    explicit LaplacianModel(double decay = 0.95, double initial_scale = 1.0)
        : decay_(decay), scale_(initial_scale) {
        if (!(decay > 0.0 && decay < 1.0)) throw Error(ErrorCode::InvalidArgument, "decay must lie in (0, 1)");
        if (!(initial_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial scale must be positive");
    }

    double diversity(double seed) const { return scale_ * seed; }
    double scale() const { return scale_; }

    void update(std::int32_t symbol, double seed) {
        const double observed = std::abs(static_cast<double>(symbol)) / seed;
        scale_ = std::max(kMinScale, decay_ * scale_ + (1.0 - decay_) * observed);
    }

private:
    double decay_;
    double scale_;
};

inline void check_seed(double seed) {
    if (!(seed > 0.0) || !std::isfinite(seed)) {
        throw Error(ErrorCode::InvalidArgument, "diversity seed must be positive and finite");
    }
}

// Escaped values: sign bit, then Elias-gamma of (|v| - R) in equiprobable bits.
inline void encode_laplace(RangeEncoder& rc, LaplacianModel& model, std::int32_t value, double seed) {
    check_seed(seed);
    const DiscreteLaplace dist(model.diversity(seed));
    const std::int32_t R = dist.radius();
    const std::uint32_t index = (value >= -R && value <= R) ? static_cast<std::uint32_t>(value + R) : dist.escape_index();
    const std::uint32_t lo = dist.cum(index);
    rc.encode(lo, dist.cum(index + 1) - lo, DiscreteLaplace::kTotalBits);
    if (index == dist.escape_index()) {
        rc.encode_bit(value < 0);
        const std::uint64_t m = static_cast<std::uint64_t>(std::abs(static_cast<std::int64_t>(value)) - R);
        const auto width = static_cast<unsigned>(std::bit_width(m));
        rc.encode_bits(0, width - 1);
        rc.encode_bits(m, width);
    }
    model.update(value, seed);
}

inline std::int32_t decode_laplace(RangeDecoder& rd, LaplacianModel& model, double seed) {
    check_seed(seed);
    const DiscreteLaplace dist(model.diversity(seed));
    const std::int32_t R = dist.radius();
    const std::uint32_t index = dist.find(rd.decode_freq(DiscreteLaplace::kTotalBits));
    const std::uint32_t lo = dist.cum(index);
    rd.update(lo, dist.cum(index + 1) - lo);
    std::int32_t value;
    if (index == dist.escape_index()) {
        const bool negative = rd.decode_bit();
        unsigned width = 1;
        while (!rd.decode_bit()) {
            if (++width > 33) throw StreamError(ErrorCode::MalformedStream, "escape code too long", rd.position());
        }
        const std::uint64_t m = (std::uint64_t{1} << (width - 1)) | rd.decode_bits(width - 1);
        const std::int64_t mag = static_cast<std::int64_t>(m) + R;
        if (mag > 2147483648LL) throw StreamError(ErrorCode::MalformedStream, "escaped value overflows", rd.position());
        value = static_cast<std::int32_t>(negative ? -mag : mag);
    } else {
        value = static_cast<std::int32_t>(index) - R;
    }
    model.update(value, seed);
    return value;
}

// Standalone stream: one model over all symbols, each with its own seed.
inline Bitstream laplace_ac_encode(std::span<const std::int32_t> symbols, std::span<const double> seeds,
                                   double decay = 0.95) {
    if (symbols.size() != seeds.size()) throw Error(ErrorCode::DimensionMismatch, "one seed per symbol required");
    RangeEncoder rc;
    LaplacianModel model(decay);
    for (std::size_t i = 0; i < symbols.size(); ++i) encode_laplace(rc, model, symbols[i], seeds[i]);
    Bitstream out;
    out.bytes = rc.finish();
    out.bit_length = out.bytes.size() * 8;
    return out;
}

inline std::vector<std::int32_t> laplace_ac_decode(std::span<const std::uint8_t> bytes, std::span<const double> seeds,
                                                   double decay = 0.95) {
    RangeDecoder rd(bytes);
    LaplacianModel model(decay);
    std::vector<std::int32_t> out;
    out.reserve(seeds.size());
    for (double seed : seeds) out.push_back(decode_laplace(rd, model, seed));
    return out;
}

}  // namespace pcmc

#endif  // PCMC_LAPLACE_CODER_HPP
