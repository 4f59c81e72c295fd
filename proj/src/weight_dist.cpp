#include "ormac/weight_dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace ormac {

namespace {

constexpr std::int64_t kMaxLength = 1'000'000;
constexpr std::int64_t kMaxCells = 4'000'000'000;  // recurrence steps x support size

void check_pmf_args(std::int64_t length, std::int64_t hash_count) {
    if (length < 1) throw std::invalid_argument("weight_pmf: length must be >= 1");
    if (hash_count < 0) throw std::invalid_argument("weight_pmf: hash count must be >= 0");
}

}  // namespace

bool weight_pmf_within_guard(std::int64_t length, std::int64_t hash_count) {
    if (length > kMaxLength) return false;
    const std::int64_t support = std::min(hash_count, length) + 1;
    return hash_count <= kMaxCells / std::max<std::int64_t>(support, 1);
}

WeightPmf WeightPmf::exact(std::int64_t length, std::int64_t hash_count) {
    check_pmf_args(length, hash_count);
    if (!weight_pmf_within_guard(length, hash_count))
        throw resource_limit_error("weight_pmf: L=" + std::to_string(length) + ", K=" +
                                   std::to_string(hash_count) + " exceeds the exact-computation guard");

    const std::int64_t support = std::min(hash_count, length);
    std::vector<double> cur(static_cast<std::size_t>(support) + 1, 0.0);
    std::vector<double> next(cur.size(), 0.0);
    cur[0] = 1.0;
    const double inv_len = 1.0 / static_cast<double>(length);
    std::int64_t top = 0;
    for (std::int64_t k = 0; k < hash_count; ++k) {
        const std::int64_t new_top = std::min(top + 1, support);
        std::fill(next.begin(), next.begin() + new_top + 1, 0.0);
        for (std::int64_t w = top; w >= 0; --w) {
            const double p = cur[static_cast<std::size_t>(w)];
            if (p == 0.0) continue;
            // repeat hash: stays at w; fresh position: moves to w+1
            next[static_cast<std::size_t>(w)] += p * (static_cast<double>(w) * inv_len);
            if (w + 1 <= support)
                next[static_cast<std::size_t>(w) + 1] += p * (static_cast<double>(length - w) * inv_len);
        }
        cur.swap(next);
        top = new_top;
    }
    return WeightPmf(length, hash_count, std::move(cur));
}

double WeightPmf::at(std::int64_t w) const {
    if (w < 0 || w >= static_cast<std::int64_t>(probs_.size())) return 0.0;
    return probs_[static_cast<std::size_t>(w)];
}

double WeightPmf::sum() const {
    double s = 0;
    for (double p : probs_) s += p;
    return s;
}

double WeightPmf::mean() const {
    double s = 0;
    for (std::size_t w = 0; w < probs_.size(); ++w) s += static_cast<double>(w) * probs_[w];
    return s;
}

double WeightPmf::entropy_bits() const {
    double h = 0;
    for (double p : probs_)
        if (p > 0) h -= p * std::log2(p);
    return h;
}

void WeightPmf::write_csv(std::ostream& out) const {
    out << "w,probability\n";
    char buf[40];
    for (std::size_t w = 0; w < probs_.size(); ++w) {
        if (probs_[w] == 0.0 && w == 0) continue;  // weight 0 occurs only for K = 0
        std::snprintf(buf, sizeof buf, "%.17g", probs_[w]);
        out << w << ',' << buf << '\n';
    }
}

bigint stirling2(std::int64_t items, std::int64_t blocks) {
    if (items < 0 || blocks < 0) throw std::invalid_argument("stirling2: arguments must be >= 0");
    if (blocks > items) return 0;
    if (items == 0) return 1;  // S(0,0) = 1
    if (blocks == 0) return 0;
    if (items > 5000) throw resource_limit_error("stirling2: items too large for exact table");
    // rolling row of S(k, .) for k = 1..items
    std::vector<bigint> row(static_cast<std::size_t>(blocks) + 1, 0);
    row[std::min<std::int64_t>(1, blocks)] = 1;  // S(1,1) = 1
    for (std::int64_t k = 2; k <= items; ++k) {
        for (std::int64_t w = std::min(k, blocks); w >= 1; --w)
            row[static_cast<std::size_t>(w)] =
                bigint(w) * row[static_cast<std::size_t>(w)] + row[static_cast<std::size_t>(w) - 1];
    }
    return row[static_cast<std::size_t>(blocks)];
}

double weight_prob_closed_form(std::int64_t length, std::int64_t hash_count, std::int64_t w) {
    check_pmf_args(length, hash_count);
    if (hash_count == 0) return w == 0 ? 1.0 : 0.0;
    if (w < 1 || w > std::min(hash_count, length)) return 0.0;
    if (hash_count > 400) throw resource_limit_error("weight_prob_closed_form: hash count too large");
    // C(L, w) * w! * S(K, w) = L * (L-1) * ... * (L-w+1) * S(K, w)
    bigint num = stirling2(hash_count, w);
    for (std::int64_t i = 0; i < w; ++i) num *= (length - i);
    bigint den = 1;
    for (std::int64_t i = 0; i < hash_count; ++i) den *= length;
    boost::multiprecision::cpp_rational ratio(num, den);
    return static_cast<double>(ratio);
}

namespace {

OccupancyBound bound_impl(std::int64_t length, std::int64_t hash_count, double eps) {
    if (length < 1 || hash_count < 1)
        throw std::invalid_argument("occupancy bound: length and hash count must be >= 1");
    if (!(eps > 0))
        throw std::invalid_argument("occupancy bound: eps must be > 0");
    OccupancyBound b;
    const double l = static_cast<double>(length);
    const double exponent = -(eps * eps * l * l) / (2.0 * static_cast<double>(hash_count));
    b.raw = 2.0 * std::exp(exponent);
    b.clamped = std::min(b.raw, 1.0);
    b.expected_zero_fraction = std::exp(static_cast<double>(hash_count) * std::log1p(-1.0 / l));
    return b;
}

}  // namespace

OccupancyBound occupancy_bound(std::int64_t length, std::int64_t hash_count, double eps) {
    return bound_impl(length, hash_count, eps);
}

OccupancyBound conditional_occupancy_bound(std::int64_t length, std::int64_t hash_count2, double eps) {
    return bound_impl(length, hash_count2, eps);
}

}  // namespace ormac
