// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_RANGE_CODER_HPP
#define PCMC_RANGE_CODER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pcmc/error.hpp"

namespace pcmc {

// 32-bit range coder with carry propagation through a cached byte and a
// run of pending 0xFF bytes. Frequencies are given against a power-of-two
// total.
class RangeEncoder {
public:
    static constexpr std::uint32_t kTop = 1u << 24;

    void encode(std::uint32_t start, std::uint32_t size, unsigned total_bits) {
        const std::uint32_t r = range_ >> total_bits;
        low_ += static_cast<std::uint64_t>(start) * r;
        range_ = size * r;
        while (range_ < kTop) {
            range_ <<= 8;
            shift_low();
        }
    }

    void encode_bit(bool bit) { encode(bit ? 1u : 0u, 1u, 1); }

    void encode_bits(std::uint64_t value, unsigned count) {
        for (unsigned i = count; i-- > 0;) encode_bit((value >> i) & 1u);
    }

    std::vector<std::uint8_t> finish() {
        for (int i = 0; i < 5; ++i) shift_low();
        return std::move(out_);
    }

private:
    void shift_low() {
        if (low_ < 0xFF000000ULL || low_ >= (1ULL << 32)) {
            const auto carry = static_cast<std::uint8_t>(low_ >> 32);
            std::uint8_t temp = cache_;
            do {
                out_.push_back(static_cast<std::uint8_t>(temp + carry));
                temp = 0xFF;
            } while (--pending_ != 0);
            cache_ = static_cast<std::uint8_t>(low_ >> 24);
        }
        ++pending_;
        low_ = (low_ & 0x00FFFFFFULL) << 8;
    }

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t pending_ = 1;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    static constexpr std::uint32_t kTop = RangeEncoder::kTop;
    // The encoder's final flush leaves trailing zero bytes unwritten.
    static constexpr std::size_t kMaxOverread = 8;

    explicit RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
    }

    std::uint32_t decode_freq(unsigned total_bits) {
        step_ = range_ >> total_bits;
        const std::uint32_t v = code_ / step_;
        const std::uint32_t max = (1u << total_bits) - 1;
        return v > max ? max : v;
    }

    void update(std::uint32_t start, std::uint32_t size) {
        code_ -= start * step_;
        range_ = size * step_;
        while (range_ < kTop) {
            code_ = (code_ << 8) | next_byte();
            range_ <<= 8;
        }
    }

    bool decode_bit() {
        const bool bit = decode_freq(1) != 0;
        update(bit ? 1u : 0u, 1u);
        return bit;
    }

    std::uint64_t decode_bits(unsigned count) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(decode_bit());
        return v;
    }

    std::size_t position() const { return pos_; }

private:
    std::uint8_t next_byte() {
        if (pos_ < bytes_.size()) return bytes_[pos_++];
        if (++pos_ > bytes_.size() + kMaxOverread) {
            throw StreamError(ErrorCode::Truncated, "range-coded stream exhausted", bytes_.size());
        }
        return 0;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t step_ = 1;
};

}  // namespace pcmc

#endif  // PCMC_RANGE_CODER_HPP
