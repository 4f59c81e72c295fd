#pragma once

#include <cstdint>

namespace ormac {

// Deterministic keyed hashing shared by encoder and decoder. All randomness in
// the toolkit flows through these mixers so that runs reproduce bit-for-bit
// across platforms; no std:: distribution is used anywhere (their outputs are
// not specified portably).

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// Chained key derivation; the added constant keeps zero inputs out of the
// mixer's fixed point.
inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h + kGolden + v);
}

// Upper 64 bits of a 128-bit product; maps a uniform 64-bit word onto [0, n)
// with bias below n / 2^64.
inline constexpr std::uint64_t reduce_to_range(std::uint64_t x, std::uint64_t n) {
#ifdef __SIZEOF_INT128__
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * n) >> 64);
#else
    const std::uint64_t xl = x & 0xFFFFFFFFull, xh = x >> 32;
    const std::uint64_t nl = n & 0xFFFFFFFFull, nh = n >> 32;
    const std::uint64_t ll = xl * nl;
    const std::uint64_t lh = xl * nh;
    const std::uint64_t hl = xh * nl;
    const std::uint64_t hh = xh * nh;
    const std::uint64_t mid = (ll >> 32) + (lh & 0xFFFFFFFFull) + (hl & 0xFFFFFFFFull);
    return hh + (lh >> 32) + (hl >> 32) + (mid >> 32);
#endif
}

// Identity of one hash-position stream: which user, which scheme phase, which
// message. Single-phase schemes use phase 0; the two-phase scheme uses phases
// 1 (signatures) and 2 (message codebooks).
struct HashSpec {
    std::uint64_t master_seed = 0;
    std::int64_t user = 0;
    std::int64_t phase = 0;
    std::int64_t message = 0;

    constexpr std::uint64_t key() const {
        std::uint64_t h = hash_combine(master_seed, static_cast<std::uint64_t>(user));
        h = hash_combine(h, static_cast<std::uint64_t>(phase));
        return hash_combine(h, static_cast<std::uint64_t>(message));
    }

    // j-th hashed position of this stream, uniform on [0, length).
    static constexpr std::int64_t position_from_key(std::uint64_t key, std::int64_t hash_index,
                                                    std::int64_t length) {
        const std::uint64_t word = mix64(key + kGolden * static_cast<std::uint64_t>(hash_index + 1));
        return static_cast<std::int64_t>(reduce_to_range(word, static_cast<std::uint64_t>(length)));
    }

    constexpr std::int64_t position(std::int64_t hash_index, std::int64_t length) const {
        return position_from_key(key(), hash_index, length);
    }
};

// Small counter-based generator for harness-side sampling (activity patterns,
// message draws, Bernoulli decisions).
struct SplitMix {
    std::uint64_t state = 0;

    explicit constexpr SplitMix(std::uint64_t seed) : state(seed) {}

    constexpr std::uint64_t next() {
        state += kGolden;
        return mix64(state);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) { return reduce_to_range(next(), n); }
};

inline constexpr std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::int64_t trial_index) {
    return hash_combine(hash_combine(master_seed, 0x7472696131ull), static_cast<std::uint64_t>(trial_index));
}

}  // namespace ormac
