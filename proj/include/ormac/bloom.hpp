#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ormac/errors.hpp"
#include "ormac/hashing.hpp"

namespace ormac {

// Fixed-length binary array with positionwise OR as the only combining
// operation. The all-zero array is a valid value (a silent user's
// transmission); generation with K >= 1 hashes always sets at least one bit.
class BloomFilter {
public:
    explicit BloomFilter(std::int64_t length) : length_(length) {
        if (length < 1) throw std::invalid_argument("BloomFilter: length must be >= 1");
        words_.assign(static_cast<std::size_t>((length + 63) / 64), 0);
    }

    static BloomFilter from_positions(std::int64_t length, std::span<const std::int64_t> positions) {
        BloomFilter f(length);
        for (std::int64_t p : positions) f.set(p);
        return f;
    }

    // Test convenience: "1011" -> bits at positions 0, 2, 3.
    static BloomFilter from_string(std::string_view bits) {
        BloomFilter f(static_cast<std::int64_t>(bits.size()));
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1')
                f.set(static_cast<std::int64_t>(i));
            else if (bits[i] != '0')
                throw std::invalid_argument("BloomFilter: bit string must contain only 0/1");
        }
        return f;
    }

    std::int64_t length() const { return length_; }

    bool test(std::int64_t pos) const {
        check_pos(pos);
        return (words_[static_cast<std::size_t>(pos >> 6)] >> (pos & 63)) & 1u;
    }

    void set(std::int64_t pos) {
        check_pos(pos);
        words_[static_cast<std::size_t>(pos >> 6)] |= std::uint64_t{1} << (pos & 63);
    }

    std::int64_t weight() const {
        std::int64_t w = 0;
        for (std::uint64_t word : words_) w += std::popcount(word);
        return w;
    }

    std::int64_t zeros() const { return length_ - weight(); }

    BloomFilter& operator|=(const BloomFilter& other) {
        if (other.length_ != length_)
            throw dimension_error("superpose: length mismatch (" + std::to_string(length_) + " vs " +
                                  std::to_string(other.length_) + ")");
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
        return *this;
    }

    friend bool operator==(const BloomFilter& a, const BloomFilter& b) {
        return a.length_ == b.length_ && a.words_ == b.words_;
    }

    // True iff every set bit of `other` is set here (no instrumentation).
    bool covers(const BloomFilter& other) const {
        if (other.length_ != length_)
            throw dimension_error("covers: length mismatch (" + std::to_string(length_) + " vs " +
                                  std::to_string(other.length_) + ")");
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (other.words_[i] & ~words_[i]) return false;
        return true;
    }

    std::string to_string() const {
        std::string s(static_cast<std::size_t>(length_), '0');
        for (std::int64_t i = 0; i < length_; ++i)
            if ((words_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1u) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }

private:
    void check_pos(std::int64_t pos) const {
        if (pos < 0 || pos >= length_)
            throw dimension_error("BloomFilter: position " + std::to_string(pos) + " outside [0, " +
                                  std::to_string(length_) + ")");
    }

    std::int64_t length_;
    std::vector<std::uint64_t> words_;
};

inline BloomFilter generate(std::int64_t length, std::int64_t hash_count, const HashSpec& spec) {
    if (length < 1) throw std::invalid_argument("generate: length must be >= 1");
    if (hash_count < 1) throw std::invalid_argument("generate: hash count must be >= 1");
    BloomFilter f(length);
    const std::uint64_t key = spec.key();
    for (std::int64_t j = 0; j < hash_count; ++j) f.set(HashSpec::position_from_key(key, j, length));
    return f;
}

inline std::vector<std::int64_t> hash_positions(std::int64_t length, std::int64_t hash_count,
                                                const HashSpec& spec) {
    if (length < 1) throw std::invalid_argument("hash_positions: length must be >= 1");
    if (hash_count < 0) throw std::invalid_argument("hash_positions: hash count must be >= 0");
    std::vector<std::int64_t> out(static_cast<std::size_t>(hash_count));
    const std::uint64_t key = spec.key();
    for (std::int64_t j = 0; j < hash_count; ++j) out[static_cast<std::size_t>(j)] = HashSpec::position_from_key(key, j, length);
    return out;
}

inline BloomFilter superpose(const BloomFilter& a, const BloomFilter& b) {
    BloomFilter out = a;
    out |= b;
    return out;
}

struct ContainsResult {
    bool contained = false;
    std::int64_t hashes_checked = 0;
};

// Containment of a filter given by its ordered hashed-position sequence.
// Probes positions in order and stops at the first miss, so hashes_checked
// reports the early-exit probe count. An empty sequence (the all-zero filter)
// is vacuously contained.
inline ContainsResult contains(const BloomFilter& array, std::span<const std::int64_t> filter_positions) {
    ContainsResult r;
    for (std::int64_t pos : filter_positions) {
        ++r.hashes_checked;
        if (!array.test(pos)) return r;
    }
    r.contained = true;
    return r;
}

// Lazy variants: positions are recomputed from the hash stream one probe at a
// time, so untransmitted codewords cost only a couple of probes on average.
inline ContainsResult contains_with_key(const BloomFilter& array, std::uint64_t key,
                                        std::int64_t hash_count) {
    ContainsResult r;
    const std::int64_t length = array.length();
    for (std::int64_t j = 0; j < hash_count; ++j) {
        ++r.hashes_checked;
        if (!array.test(HashSpec::position_from_key(key, j, length))) return r;
    }
    r.contained = true;
    return r;
}

inline ContainsResult contains(const BloomFilter& array, const HashSpec& spec, std::int64_t hash_count) {
    return contains_with_key(array, spec.key(), hash_count);
}

inline std::int64_t weight(const BloomFilter& f) { return f.weight(); }

}  // namespace ormac
