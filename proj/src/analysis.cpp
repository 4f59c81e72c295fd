#include "ormac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ormac/analysis_detail.hpp"
#include "ormac/weight_dist.hpp"

namespace ormac {

namespace {

using detail::kLn2;
using detail::log2_choose;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Success probability against competing codewords, with the competing count
// passed as its natural log (-inf encodes zero). Given received weight w,
// each untransmitted codeword is contained independently with probability
// t = (w/L)^K, so success = (1 - t)^C = exp(-C * (-log1p(-t))), evaluated
// without forming C or t when they would over/underflow.
double success_given_weight_ln(double ln_competing, std::int64_t w, std::int64_t length,
                               std::int64_t hash_count) {
    require(length >= 1, "success probability: length must be >= 1");
    require(hash_count >= 1, "success probability: hash count must be >= 1");
    require(w >= 0 && w <= length, "success probability: weight outside [0, L]");
    if (ln_competing == -std::numeric_limits<double>::infinity()) return 1.0;
    if (w == 0) return 1.0;
    if (w == length) return 0.0;
    const double lt = static_cast<double>(hash_count) *
                      std::log(static_cast<double>(w) / static_cast<double>(length));
    // lq = log(-log1p(-exp(lt))); below exp underflow the two agree exactly
    const double lq = lt < -700.0 ? lt : std::log(-std::log1p(-std::exp(lt)));
    const double log_success = -std::exp(ln_competing + lq);
    return std::exp(log_success);
}

double ln_from_count(double competing) {
    require(competing >= 0, "success probability: competing count must be >= 0");
    return competing == 0 ? -std::numeric_limits<double>::infinity() : std::log(competing);
}

}  // namespace

double binary_entropy(double x) {
    require(x >= 0.0 && x <= 1.0, "binary_entropy: x outside [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -(x * std::log2(x)) - (1.0 - x) * std::log2(1.0 - x);
}

double entropy_limit(double kappa) {
    require(kappa > 0, "entropy_limit: kappa must be > 0");
    return binary_entropy(std::exp(-kappa));
}

double conditional_entropy_limit(double kappa1, double kappa2) {
    require(kappa1 > 0, "conditional_entropy_limit: kappa1 must be > 0");
    require(kappa2 > 0, "conditional_entropy_limit: kappa2 must be > 0");
    return std::exp(-kappa1) * binary_entropy(std::exp(-kappa2));
}

double exact_entropy(std::int64_t length, std::int64_t hash_count) {
    const WeightPmf pmf = weight_pmf(length, hash_count);
    double h = 0;
    for (std::int64_t w = 0; w <= pmf.max_weight(); ++w) {
        const double p = pmf.at(w);
        if (p <= 0) continue;
        h += p * (log2_choose(length, w) - std::log2(p));
    }
    return h;
}

namespace {

// Entropy of the superposed array given that the first filter leaves z1
// zeros: track d = newly covered zero positions through hash_count2 steps.
double entropy_given_zeros(std::int64_t length, std::int64_t z1, std::int64_t hash_count2) {
    if (z1 == 0) return 0.0;
    const std::int64_t support = std::min(hash_count2, z1);
    std::vector<double> cur(static_cast<std::size_t>(support) + 1, 0.0);
    std::vector<double> next(cur.size(), 0.0);
    cur[0] = 1.0;
    const double inv_len = 1.0 / static_cast<double>(length);
    std::int64_t lo = 0, hi = 0;
    for (std::int64_t k = 0; k < hash_count2; ++k) {
        const std::int64_t new_hi = std::min(hi + 1, support);
        std::fill(next.begin() + lo, next.begin() + new_hi + 1, 0.0);
        for (std::int64_t d = hi; d >= lo; --d) {
            const double p = cur[static_cast<std::size_t>(d)];
            if (p == 0.0) continue;
            // hash lands on an already-set position (of either filter) or a
            // covered zero: d unchanged; fresh zero position: d + 1
            next[static_cast<std::size_t>(d)] += p * (static_cast<double>(length - z1 + d) * inv_len);
            if (d + 1 <= support)
                next[static_cast<std::size_t>(d) + 1] += p * (static_cast<double>(z1 - d) * inv_len);
        }
        cur.swap(next);
        hi = new_hi;
        // trim negligible tails; ends only, the pmf is unimodal
        while (hi > lo && cur[static_cast<std::size_t>(hi)] < 1e-18) --hi;
        while (lo < hi && cur[static_cast<std::size_t>(lo)] < 1e-18) ++lo;
    }
    double h = 0;
    for (std::int64_t d = lo; d <= hi; ++d) {
        const double p = cur[static_cast<std::size_t>(d)];
        if (p <= 0) continue;
        h += p * (log2_choose(z1, d) - std::log2(p));
    }
    return h;
}

}  // namespace

double exact_conditional_entropy(std::int64_t length, std::int64_t hash_count1, std::int64_t hash_count2) {
    require(hash_count1 >= 0, "exact_conditional_entropy: hash count must be >= 0");
    require(hash_count2 >= 0, "exact_conditional_entropy: hash count must be >= 0");
    if (hash_count2 == 0) return 0.0;
    const WeightPmf pmf1 = weight_pmf(length, hash_count1);
    double h = 0;
    for (std::int64_t w1 = 0; w1 <= pmf1.max_weight(); ++w1) {
        const double p1 = pmf1.at(w1);
        if (p1 < 1e-15) continue;  // skipped mass contributes < 1e-12 bits total
        h += p1 * entropy_given_zeros(length, length - w1, hash_count2);
    }
    return h;
}

RatePoint RatePoint::from_rates(std::span<const double> rates) {
    RatePoint p;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        require(rates[i] >= 0, "RatePoint: rates must be >= 0");
        if (i == 0) p.r1 = rates[i];
        if (i == 1) p.r2 = rates[i];
        p.sum += rates[i];
    }
    return p;
}

RatePoint rate_region_point(double kappa1, double kappa2) {
    require(kappa1 > 0, "rate_region_point: kappa1 must be > 0");
    require(kappa2 > 0, "rate_region_point: kappa2 must be > 0");
    RatePoint p;
    p.r1 = std::exp(-kappa2) * binary_entropy(std::exp(-kappa1));
    p.r2 = std::exp(-kappa1) * binary_entropy(std::exp(-kappa2));
    p.sum = binary_entropy(std::exp(-(kappa1 + kappa2)));
    return p;
}

bool capacity_membership(const RatePoint& rates) {
    require(rates.r1 >= 0 && rates.r2 >= 0 && rates.sum >= 0, "capacity_membership: rates must be >= 0");
    return rates.sum <= 1.0 + 1e-12;
}

std::vector<SubsetRateBound> rate_region_numeric(std::int64_t length, std::span<const std::int64_t> hash_counts) {
    const std::size_t n = hash_counts.size();
    require(n >= 1 && n <= 4, "rate_region_numeric: supports 1 to 4 users");
    for (std::int64_t k : hash_counts) require(k >= 1, "rate_region_numeric: hash counts must be >= 1");
    std::vector<SubsetRateBound> out;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::int64_t k_in = 0, k_out = 0;
        for (std::size_t i = 0; i < n; ++i)
            ((mask >> i) & 1u ? k_in : k_out) += hash_counts[i];
        SubsetRateBound b;
        b.subset_mask = mask;
        b.bits_per_cu = exact_conditional_entropy(length, k_out, k_in) / static_cast<double>(length);
        out.push_back(b);
    }
    return out;
}

double success_prob_given_weight(double competing_codewords, std::int64_t received_weight, std::int64_t length,
                                 std::int64_t hash_count) {
    return success_given_weight_ln(ln_from_count(competing_codewords), received_weight, length, hash_count);
}

double success_prob_given_weight_log2(double log2_competing, std::int64_t received_weight, std::int64_t length,
                                      std::int64_t hash_count) {
    return success_given_weight_ln(log2_competing * kLn2, received_weight, length, hash_count);
}

namespace {

double success_sum_over_weights(std::int64_t total_hashes, double ln_competing, std::int64_t length,
                                std::int64_t hash_count) {
    const WeightPmf pmf = weight_pmf(length, total_hashes);
    double s = 0;
    for (std::int64_t w = pmf.min_weight(); w <= pmf.max_weight(); ++w) {
        const double p = pmf.at(w);
        if (p <= 0) continue;
        s += p * success_given_weight_ln(ln_competing, w, length, hash_count);
    }
    return std::min(s, 1.0);
}

}  // namespace

double success_prob_exact(std::int64_t users, std::int64_t messages, std::int64_t length,
                          std::int64_t hash_count) {
    require(users >= 1, "success_prob_exact: users must be >= 1");
    require(messages >= 1, "success_prob_exact: messages must be >= 1");
    if (messages == 1) return 1.0;
    const double competing = static_cast<double>(users) * static_cast<double>(messages - 1);
    return success_sum_over_weights(users * hash_count, ln_from_count(competing), length, hash_count);
}

double success_prob_competing(std::int64_t users, double competing_codewords, std::int64_t length,
                              std::int64_t hash_count) {
    require(users >= 1, "success_prob_competing: users must be >= 1");
    return success_sum_over_weights(users * hash_count, ln_from_count(competing_codewords), length, hash_count);
}

double success_prob_competing_log2(std::int64_t users, double log2_competing, std::int64_t length,
                                   std::int64_t hash_count) {
    require(users >= 1, "success_prob_competing: users must be >= 1");
    return success_sum_over_weights(users * hash_count, log2_competing * kLn2, length, hash_count);
}

double sumrate_threshold_nats(double kappa, double eps) {
    require(kappa > 0, "sumrate_threshold: kappa must be > 0");
    require(eps >= 0, "sumrate_threshold: eps must be >= 0");
    require(eps <= std::exp(-kappa), "sumrate_threshold: eps must not exceed the zero-cell fraction exp(-kappa)");
    const double arg = -std::expm1(-kappa) + eps;  // 1 - exp(-kappa) + eps
    require(arg > 0, "sumrate_threshold: log argument must be > 0");
    return -kappa * std::log(arg);
}

double sumrate_threshold_bits(double kappa, double eps) { return sumrate_threshold_nats(kappa, eps) / kLn2; }

double ar_success_exact(std::int64_t users, std::int64_t active, std::int64_t length, std::int64_t hash_count) {
    require(users >= 1, "ar_success_exact: users must be >= 1");
    require(active >= 1 && active <= users, "ar_success_exact: active count outside [1, N]");
    const double competing = static_cast<double>(users - active);
    return success_sum_over_weights(active * hash_count, ln_from_count(competing), length, hash_count);
}

ArBound ar_success_lower_bound(std::int64_t users, std::int64_t active, std::int64_t length,
                               std::int64_t hash_count, double eps) {
    require(users >= 1, "ar_success_lower_bound: users must be >= 1");
    require(active >= 1 && active <= users, "ar_success_lower_bound: active count outside [1, N]");
    require(length >= 1 && hash_count >= 1, "ar_success_lower_bound: length and hash count must be >= 1");
    require(eps > 0, "ar_success_lower_bound: eps must be > 0");
    ArBound b;
    b.eps = eps;
    const double l = static_cast<double>(length);
    const double ak = static_cast<double>(active) * static_cast<double>(hash_count);
    b.expected_zero_fraction = std::exp(ak * std::log1p(-1.0 / l));
    const double false_accept = static_cast<double>(users) *
                                std::pow(1.0 - b.expected_zero_fraction + eps, static_cast<double>(hash_count));
    const double concentration = 2.0 * std::exp(-(eps * eps * l * l) / (2.0 * ak));
    b.raw = 1.0 - false_accept - concentration;
    b.clamped = std::clamp(b.raw, 0.0, 1.0);
    return b;
}

ArBound ar_success_lower_bound_best(std::int64_t users, std::int64_t active, std::int64_t length,
                                    std::int64_t hash_count) {
    ArBound best = ar_success_lower_bound(users, active, length, hash_count, 0.001);
    for (int i = 2; i < 1000; ++i) {
        const ArBound b = ar_success_lower_bound(users, active, length, hash_count, 0.001 * i);
        if (b.raw > best.raw) best = b;
    }
    return best;
}

double two_phase_q(std::int64_t active, std::int64_t w1, std::int64_t w2, std::int64_t l1, std::int64_t l2,
                   std::int64_t k1, std::int64_t k2, std::int64_t messages, std::int64_t users) {
    require(l1 >= 1 && l2 >= 1, "two_phase_q: lengths must be >= 1");
    require(k1 >= 1 && k2 >= 1, "two_phase_q: hash counts must be >= 1");
    require(w1 >= 0 && w1 <= l1, "two_phase_q: w1 outside [0, L1]");
    require(w2 >= 0 && w2 <= l2, "two_phase_q: w2 outside [0, L2]");
    require(messages >= 1, "two_phase_q: messages must be >= 1");
    require(active >= 0 && active <= users, "two_phase_q: active count outside [0, N]");

    // log(1 - t2), t2 = (w2/L2)^K2: chance a fixed untransmitted codeword is
    // contained in the phase-2 array
    double log_not_contained2;
    if (w2 == 0) {
        log_not_contained2 = 0.0;
    } else if (w2 == l2) {
        log_not_contained2 = -std::numeric_limits<double>::infinity();
    } else {
        const double lt2 = static_cast<double>(k2) *
                           std::log(static_cast<double>(w2) / static_cast<double>(l2));
        log_not_contained2 = std::log1p(-std::exp(lt2));
    }

    const double false_msg_exponent = static_cast<double>(active) * static_cast<double>(messages - 1);
    double f1;
    if (false_msg_exponent == 0.0)
        f1 = 1.0;
    else
        f1 = std::exp(false_msg_exponent * log_not_contained2);

    double t1;
    if (w1 == 0) {
        t1 = 0.0;
    } else if (w1 == l1) {
        t1 = 1.0;
    } else {
        t1 = std::exp(static_cast<double>(k1) * std::log(static_cast<double>(w1) / static_cast<double>(l1)));
    }
    // chance an inactive user slips through phase 1 and has >= 1 message
    // contained in phase 2
    const double any_contained2 = -std::expm1(static_cast<double>(messages) * log_not_contained2);
    const double inactive_bad = t1 * any_contained2;
    const std::int64_t inactive = users - active;
    double f2;
    if (inactive == 0)
        f2 = 1.0;
    else if (inactive_bad >= 1.0)
        f2 = 0.0;
    else
        f2 = std::exp(static_cast<double>(inactive) * std::log1p(-inactive_bad));
    return f1 * f2;
}

double two_phase_success_exact(std::int64_t active, std::int64_t users, std::int64_t messages,
                               std::int64_t l1, std::int64_t k1, std::int64_t l2, std::int64_t k2) {
    require(active >= 0 && active <= users, "two_phase_success_exact: active count outside [0, N]");
    if (active == 0) return 1.0;  // both arrays empty, nothing is ever contained
    const WeightPmf pmf1 = weight_pmf(l1, active * k1);
    const WeightPmf pmf2 = weight_pmf(l2, active * k2);
    std::vector<std::pair<std::int64_t, double>> w1s, w2s;
    for (std::int64_t w = pmf1.min_weight(); w <= pmf1.max_weight(); ++w)
        if (pmf1.at(w) >= 1e-12) w1s.emplace_back(w, pmf1.at(w));
    for (std::int64_t w = pmf2.min_weight(); w <= pmf2.max_weight(); ++w)
        if (pmf2.at(w) >= 1e-12) w2s.emplace_back(w, pmf2.at(w));
    double s = 0;
    for (const auto& [w2, p2] : w2s)
        for (const auto& [w1, p1] : w1s)
            s += p1 * p2 * two_phase_q(active, w1, w2, l1, l2, k1, k2, messages, users);
    return std::min(s, 1.0);
}

bool feasibility_mt(double kappa1, double kappa2, double beta, double gamma) {
    return kappa2 * kLn2 > beta + gamma && (kappa1 + kappa2) * kLn2 > 1.0 + gamma;
}

CostBounds cost_bounds_ar(double beta) {
    require(beta > 0 && beta < 1, "cost_bounds_ar: beta out of (0,1)");
    return {1.0 - beta, 1.0 / kLn2};
}

CostBounds cost_bounds_mt(double beta, double gamma) {
    require(beta > 0 && beta < 1, "cost_bounds_mt: beta out of (0,1)");
    require(gamma >= 0, "cost_bounds_mt: gamma must be >= 0");
    return {1.0 - beta + gamma, (1.0 + gamma) / kLn2};
}

}  // namespace ormac
