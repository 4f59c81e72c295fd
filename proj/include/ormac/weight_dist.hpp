#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ormac/errors.hpp"

namespace ormac {

using bigint = boost::multiprecision::cpp_int;

// Exact distribution of the number of set bits after K uniform hashes into L
// positions, computed by the occupancy Markov recurrence
//   P_{k+1}(w) = P_k(w) * w/L + P_k(w-1) * (L-w+1)/L,  P_0(0) = 1.
// Every update is a convex combination of nonnegative terms, so the result is
// stable in double precision; the total mass drifts by at most a few ulp per
// step.
class WeightPmf {
public:
    static WeightPmf exact(std::int64_t length, std::int64_t hash_count);

    std::int64_t length() const { return length_; }
    std::int64_t hash_count() const { return hash_count_; }

    // Probability of weight w; zero outside the support.
    double at(std::int64_t w) const;

    std::int64_t min_weight() const { return hash_count_ > 0 ? 1 : 0; }
    std::int64_t max_weight() const { return static_cast<std::int64_t>(probs_.size()) - 1; }

    double sum() const;
    double mean() const;
    double entropy_bits() const;

    void write_csv(std::ostream& out) const;

private:
    WeightPmf(std::int64_t length, std::int64_t hash_count, std::vector<double> probs)
        : length_(length), hash_count_(hash_count), probs_(std::move(probs)) {}

    std::int64_t length_ = 0;
    std::int64_t hash_count_ = 0;
    std::vector<double> probs_;  // index = weight, 0 .. min(K, L)
};

// Guard for the O(L*K) recurrence; exceeding it raises resource_limit_error.
bool weight_pmf_within_guard(std::int64_t length, std::int64_t hash_count);

inline WeightPmf weight_pmf(std::int64_t length, std::int64_t hash_count) {
    return WeightPmf::exact(length, hash_count);
}

// Stirling number of the second kind: partitions of `items` elements into
// `blocks` nonempty blocks. Exact big-integer arithmetic; returns 0 when
// blocks > items.
bigint stirling2(std::int64_t items, std::int64_t blocks);

// Closed-form weight probability C(L,w) * w! * S(K,w) / L^K evaluated in
// exact rational arithmetic and rounded once to double. Cross-check path for
// the recurrence; infeasible for large K (factorials), guarded.
double weight_prob_closed_form(std::int64_t length, std::int64_t hash_count, std::int64_t w);

// Azuma-type concentration of the zero count z of BF(L, K) around p*L with
// p = (1 - 1/L)^K: deviation probability bound 2*exp(-eps^2 L^2 / (2K)).
struct OccupancyBound {
    double raw = 0;                    // bound as computed, may exceed 1
    double clamped = 0;                // min(raw, 1)
    double expected_zero_fraction = 0; // p
};

OccupancyBound occupancy_bound(std::int64_t length, std::int64_t hash_count, double eps);

// Conditional variant: deviation of z from p2 * z1 given a first filter with
// z1 zeros; only the second filter's K2 hashes drive the exponent.
OccupancyBound conditional_occupancy_bound(std::int64_t length, std::int64_t hash_count2, double eps);

}  // namespace ormac
