// SPDX-FileCopyrightText: 2026 pcmc authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PCMC_RLGR_HPP
#define PCMC_RLGR_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "pcmc/bitstream.hpp"
#include "pcmc/error.hpp"

// Adaptive run-length / Golomb-Rice coder (RLGR1 flavour). Two scaled
// parameters drive it: kp selects between run mode (k = kp >> 3 > 0) and
// plain Golomb-Rice mode, and krp sets the Rice parameter kr = krp >> 3.
namespace pcmc::rlgr {

inline constexpr int kLsgr = 3;
inline constexpr int kKpMax = 80;
inline constexpr int kUpGr = 4;  // kp increment after a full zero run
inline constexpr int kDnGr = 6;  // kp decrement after a run is broken
inline constexpr int kUqGr = 3;  // kp increment after a zero in GR mode
inline constexpr int kDqGr = 3;  // kp decrement after a nonzero in GR mode
// Rice quotients at or above this length switch to an explicit-width escape.
inline constexpr std::uint64_t kUnaryEscape = 24;

// Interleaves signs: 0, -1, 1, -2, 2 ... -> 0, 1, 2, 3, 4 ...
constexpr std::uint64_t zigzag(std::int32_t v) {
    const auto m = static_cast<std::uint64_t>(v < 0 ? -static_cast<std::int64_t>(v) : v);
    return v < 0 ? 2 * m - 1 : 2 * m;
}

constexpr std::int32_t unzigzag(std::uint64_t u) {
    return (u & 1u) ? static_cast<std::int32_t>(-static_cast<std::int64_t>((u + 1) / 2))
                    : static_cast<std::int32_t>(u / 2);
}

namespace detail {

inline void update(int& param, int delta, int& derived) {
    param = std::clamp(param + delta, 0, kKpMax);
    derived = param >> kLsgr;
}

struct State {
    int kp = 1 << kLsgr;
    int k = 1;
    int krp = 1 << kLsgr;
    int kr = 1;
};

inline void put_gr(BitWriter& w, State& s, std::uint64_t value) {
    const std::uint64_t q = value >> s.kr;
    if (q < kUnaryEscape) {
        w.put_ones(q);
        w.put_bit(false);
        w.put_bits(value, static_cast<unsigned>(s.kr));
    } else {
        w.put_ones(kUnaryEscape);
        const auto width = static_cast<unsigned>(std::bit_width(value));
        w.put_bits(width, 6);
        w.put_bits(value, width);
    }
    if (q == 0) update(s.krp, -2, s.kr);
    else if (q > 1) update(s.krp, static_cast<int>(std::min<std::uint64_t>(q, kKpMax)), s.kr);
}

inline std::uint64_t get_gr(BitReader& r, State& s) {
    std::uint64_t q = 0;
    while (q < kUnaryEscape && r.get_bit()) ++q;
    std::uint64_t value;
    if (q < kUnaryEscape) {
        value = (q << s.kr) | r.get_bits(static_cast<unsigned>(s.kr));
    } else {
        const auto width = static_cast<unsigned>(r.get_bits(6));
        if (width > 33) throw StreamError(ErrorCode::MalformedStream, "RLGR escape width too large", r.position());
        value = r.get_bits(width);
        q = value >> s.kr;
    }
    if (q == 0) update(s.krp, -2, s.kr);
    else if (q > 1) update(s.krp, static_cast<int>(std::min<std::uint64_t>(q, kKpMax)), s.kr);
    return value;
}

}  // namespace detail

inline Bitstream encode(std::span<const std::int32_t> symbols) {
    BitWriter w;
    detail::State s;
    std::size_t i = 0;
    while (i < symbols.size()) {
        if (s.k > 0) {
            std::uint64_t zeros = 0;
            while (i < symbols.size() && symbols[i] == 0) {
                ++zeros;
                ++i;
            }
            std::uint64_t run_max = std::uint64_t{1} << s.k;
            while (zeros >= run_max) {
                w.put_bit(false);
                zeros -= run_max;
                detail::update(s.kp, kUpGr, s.k);
                run_max = std::uint64_t{1} << s.k;
            }
            if (i == symbols.size() && zeros == 0) break;
            w.put_bit(true);
            w.put_bits(zeros, static_cast<unsigned>(s.k));
            if (i == symbols.size()) break;
            detail::put_gr(w, s, zigzag(symbols[i]) - 1);
            ++i;
            detail::update(s.kp, -kDnGr, s.k);
        } else {
            const std::uint64_t u = zigzag(symbols[i]);
            ++i;
            detail::put_gr(w, s, u);
            if (u == 0) detail::update(s.kp, kUqGr, s.k);
            else detail::update(s.kp, -kDqGr, s.k);
        }
    }
    return w.finish();
}

inline std::vector<std::int32_t> decode(std::span<const std::uint8_t> bytes, std::size_t count) {
    std::vector<std::int32_t> out;
    out.reserve(count);
    BitReader r(bytes);
    detail::State s;
    auto push_zeros = [&](std::uint64_t n) {
        if (n > count - out.size()) {
            throw StreamError(ErrorCode::MalformedStream, "RLGR zero run overruns symbol count", r.position());
        }
        out.insert(out.end(), n, 0);
    };
    while (out.size() < count) {
        if (s.k > 0) {
            if (!r.get_bit()) {
                push_zeros(std::uint64_t{1} << s.k);
                detail::update(s.kp, kUpGr, s.k);
                continue;
            }
            push_zeros(r.get_bits(static_cast<unsigned>(s.k)));
            if (out.size() == count) break;
            out.push_back(unzigzag(detail::get_gr(r, s) + 1));
            detail::update(s.kp, -kDnGr, s.k);
        } else {
            const std::uint64_t u = detail::get_gr(r, s);
            out.push_back(unzigzag(u));
            if (u == 0) detail::update(s.kp, kUqGr, s.k);
            else detail::update(s.kp, -kDqGr, s.k);
        }
    }
    return out;
}

// Byte-aligned payload: u32 little-endian symbol count, then the bits.
inline std::vector<std::uint8_t> encode_payload(std::span<const std::int32_t> symbols) {
    std::vector<std::uint8_t> out;
    put_u32(out, static_cast<std::uint32_t>(symbols.size()));
    const auto bits = encode(symbols);
    out.insert(out.end(), bits.bytes.begin(), bits.bytes.end());
    return out;
}

inline std::vector<std::int32_t> decode_payload(std::span<const std::uint8_t> payload) {
    ByteReader br(payload);
    const std::uint32_t count = br.u32();
    return decode(payload.subspan(4), count);
}

}  // namespace pcmc::rlgr

#endif  // PCMC_RLGR_HPP
