// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_BITSTREAM_HPP
#define PCMC_BITSTREAM_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "pcmc/error.hpp"

namespace pcmc {

struct Bitstream {
    std::vector<std::uint8_t> bytes;
    std::size_t bit_length = 0;
};

// MSB-first bit packing; the final byte is zero-padded.
class BitWriter {
public:
    void put_bit(bool bit) {
        if (bits_ % 8 == 0) out_.bytes.push_back(0);
        if (bit) out_.bytes.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
        ++bits_;
    }

    // Lowest `count` bits of `value`, most significant first.
    void put_bits(std::uint64_t value, unsigned count) {
        for (unsigned i = count; i-- > 0;) put_bit((value >> i) & 1u);
    }

    void put_ones(std::uint64_t count) {
        for (std::uint64_t i = 0; i < count; ++i) put_bit(true);
    }

    std::size_t bit_length() const { return bits_; }

    Bitstream finish() {
        out_.bit_length = bits_;
        return std::move(out_);
    }

private:
    Bitstream out_;
    std::size_t bits_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool get_bit() {
        if (pos_ >= bytes_.size() * 8) {
            throw StreamError(ErrorCode::Truncated, "bitstream exhausted", pos_);
        }
        const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
        ++pos_;
        return bit;
    }

    std::uint64_t get_bits(unsigned count) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint64_t>(get_bit());
        return v;
    }

    std::size_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

// Little-endian helpers for the byte-aligned container layouts.
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t u;
    static_assert(sizeof u == sizeof v);
    std::memcpy(&u, &v, sizeof u);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t base = 0)
        : bytes_(bytes), base_(base) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t u = 0;
        for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        double v;
        std::memcpy(&v, &u, sizeof v);
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t position() const { return base_ + pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw StreamError(ErrorCode::Truncated, "byte stream ended early", base_ + pos_);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

}  // namespace pcmc

#endif  // PCMC_BITSTREAM_HPP
