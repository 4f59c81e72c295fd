#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ormac/errors.hpp"

namespace ormac {

// Closed-form quantities: entropies and their large-L limits, rate-region
// points, exact success probabilities of containment decoding, concentration
// lower bounds, feasibility conditions, and cost-bound intervals. All
// entropies and rates are in bits unless a name says nats.

double binary_entropy(double x);  // bits; domain [0, 1], endpoints 0

// Large-L normalized entropy of a filter with hash density kappa = K/L.
double entropy_limit(double kappa);

// Large-L normalized conditional entropy of a second filter given a first:
// exp(-kappa1) * h2(exp(-kappa2)).
double conditional_entropy_limit(double kappa1, double kappa2);

// Exact entropy of BF(L, K) in bits: H(w) + sum_w Pr[w] log2 C(L, w), using
// the fact that given its weight the filter is uniform over patterns.
double exact_entropy(std::int64_t length, std::int64_t hash_count);

// Exact conditional entropy H(superposition | first filter) in bits. For each
// zero count z1 of the first filter, the number d of newly covered zero
// positions evolves through K2 hashes by the same occupancy recurrence
// restricted to the z1 zero positions; given d the pattern is uniform over
// C(z1, d) choices.
double exact_conditional_entropy(std::int64_t length, std::int64_t hash_count1, std::int64_t hash_count2);

struct RatePoint {
    double r1 = 0;    // bits per channel use
    double r2 = 0;
    double sum = 0;

    static RatePoint from_rates(std::span<const double> rates);  // sum = total of entries
};

// Two-user rate-region corner at hash densities (kappa1, kappa2):
//   R1 <= exp(-kappa2) h2(exp(-kappa1)),
//   R2 <= exp(-kappa1) h2(exp(-kappa2)),
//   R1 + R2 <= h2(exp(-(kappa1+kappa2))).
// The three fields are the constraint values; r1 + r2 exceeds sum except in
// degenerate limits, reflecting the pentagon shape of the region.
RatePoint rate_region_point(double kappa1, double kappa2);

// Sum-rate capacity test for the OR channel: R_sum <= 1 bit per channel use.
bool capacity_membership(const RatePoint& rates);

// Numeric subset-rate constraints for up to 4 users with per-user hash counts
// K_n at common length L: for each nonempty subset S of users,
//   sum_{n in S} R_n <= H(output | inputs outside S) / L.
struct SubsetRateBound {
    std::uint32_t subset_mask = 0;  // bit n set = user n in S
    double bits_per_cu = 0;
};
std::vector<SubsetRateBound> rate_region_numeric(std::int64_t length, std::span<const std::int64_t> hash_counts);

// Exact probability that per-user containment decoding of all N users
// succeeds: sum_w Pr_{BF(L, N*K)}[w] * [1 - (w/L)^K]^{N(M-1)}.
double success_prob_exact(std::int64_t users, std::int64_t messages, std::int64_t length, std::int64_t hash_count);

// Same formula with the number of competing codewords N(M-1) supplied as a
// real number, for message sets far too large to enumerate.
double success_prob_competing(std::int64_t users, double competing_codewords, std::int64_t length,
                              std::int64_t hash_count);

// Conditional form: success probability given that the received array has
// weight w (the competing filters' positions are independent of it).
double success_prob_given_weight(double competing_codewords, std::int64_t received_weight, std::int64_t length,
                                 std::int64_t hash_count);

// log2-domain variants for competing counts beyond double range (e.g. rates
// specified in bits with message sets of size 2^600).
double success_prob_given_weight_log2(double log2_competing, std::int64_t received_weight, std::int64_t length,
                                      std::int64_t hash_count);
double success_prob_competing_log2(std::int64_t users, double log2_competing, std::int64_t length,
                                   std::int64_t hash_count);

// Sum-rate threshold in nats per channel use: -kappa * ln(1 - exp(-kappa) + eps).
// The eps > 0 slack accounts for weight concentration; maximal at kappa = ln 2.
double sumrate_threshold_nats(double kappa, double eps);
double sumrate_threshold_bits(double kappa, double eps);

// Exact success probability of activity recognition given `active` actives:
// sum_w Pr_{BF(L, a*K)}[w] * [1 - (w/L)^K]^{N - a}.
double ar_success_exact(std::int64_t users, std::int64_t active, std::int64_t length, std::int64_t hash_count);

struct ArBound {
    double raw = 0;                    // 1 - N(1-p+eps)^K - 2 exp(-eps^2 L^2 / (2aK))
    double clamped = 0;                // clamped to [0, 1]
    double expected_zero_fraction = 0; // p = (1 - 1/L)^{aK}
    double eps = 0;
};

// Concentration-driven lower bound on the activity-recognition success
// probability given `active` actives.
ArBound ar_success_lower_bound(std::int64_t users, std::int64_t active, std::int64_t length,
                               std::int64_t hash_count, double eps);

// Best eps over a grid in (0, 1); the reported bound is valid for each eps,
// so the maximum is too.
ArBound ar_success_lower_bound_best(std::int64_t users, std::int64_t active, std::int64_t length,
                                    std::int64_t hash_count);

// Exact success probability of the two-phase decoder conditioned on the
// active count a and the received weights (w1, w2):
//   [1 - (w2/L2)^K2]^{a(M-1)}
//   * {1 - (w1/L1)^K1 * (1 - [1 - (w2/L2)^K2]^M)}^{N-a}.
double two_phase_q(std::int64_t active, std::int64_t w1, std::int64_t w2, std::int64_t l1, std::int64_t l2,
                   std::int64_t k1, std::int64_t k2, std::int64_t messages, std::int64_t users);

// Exact success probability of the two-phase decoder given the active count,
// mixing two_phase_q over the independent weight distributions of the two
// received arrays (weights pruned below 1e-12 mass, so accurate to ~1e-8).
double two_phase_success_exact(std::int64_t active, std::int64_t users, std::int64_t messages,
                               std::int64_t l1, std::int64_t k1, std::int64_t l2, std::int64_t k2);

// Feasibility of vanishing two-phase error in the many-access scaling:
// kappa2 ln2 > beta + gamma and (kappa1 + kappa2) ln2 > 1 + gamma.
bool feasibility_mt(double kappa1, double kappa2, double beta, double gamma);

struct CostBounds {
    double lower = 0;
    double upper = 0;
};

// Activity-recognition cost interval [1 - beta, 1/ln 2].
CostBounds cost_bounds_ar(double beta);

// Message-transmission cost interval [1 - beta + gamma, (1 + gamma)/ln 2].
CostBounds cost_bounds_mt(double beta, double gamma);

}  // namespace ormac
