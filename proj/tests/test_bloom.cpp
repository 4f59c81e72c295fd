#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "ormac/bloom.hpp"
#include "ormac/errors.hpp"
#include "ormac/hashing.hpp"
#include "ormac/weight_dist.hpp"
#include "stat_utils.hpp"

using namespace ormac;

TEST_CASE("filter construction and bit access") {
    BloomFilter f(5);
    CHECK(f.length() == 5);
    CHECK(f.weight() == 0);
    CHECK(f.zeros() == 5);
    f.set(0);
    f.set(3);
    f.set(3);
    CHECK(f.weight() == 2);
    CHECK(f.test(0));
    CHECK(f.test(3));
    CHECK_FALSE(f.test(1));
    CHECK(f.to_string() == "10010");

    CHECK(BloomFilter::from_string("1011").weight() == 3);
    CHECK(BloomFilter::from_string("1011").to_string() == "1011");
    const std::int64_t pos[] = {1, 3, 1};
    CHECK(BloomFilter::from_positions(4, pos) == BloomFilter::from_string("0101"));

    CHECK_THROWS_AS(BloomFilter(0), std::invalid_argument);
    CHECK_THROWS_AS(f.set(5), dimension_error);
    CHECK_THROWS_AS(f.test(-1), dimension_error);
    CHECK_THROWS_AS(BloomFilter::from_string("10x"), std::invalid_argument);
}

TEST_CASE("superposition is positionwise OR") {
    const BloomFilter a = BloomFilter::from_string("10010");
    const BloomFilter b = BloomFilter::from_string("01010");
    CHECK(superpose(a, b).to_string() == "11010");
    CHECK(superpose(a, b) == superpose(b, a));
    CHECK(superpose(a, a) == a);

    BloomFilter c = a;
    c |= b;
    CHECK(c == superpose(a, b));
    CHECK(c.covers(a));
    CHECK(c.covers(b));
    CHECK_FALSE(a.covers(c));

    BloomFilter wrong(6);
    CHECK_THROWS_AS(c |= wrong, dimension_error);
    CHECK_THROWS_AS(c.covers(wrong), dimension_error);
}

TEST_CASE("generation is deterministic in the key and varies across keys") {
    const HashSpec spec{99, 3, 1, 7};
    const BloomFilter f1 = generate(64, 5, spec);
    const BloomFilter f2 = generate(64, 5, spec);
    CHECK(f1 == f2);
    CHECK(f1.weight() <= 5);
    CHECK(f1.weight() >= 1);
    CHECK(hash_positions(64, 5, spec) == hash_positions(64, 5, spec));
    CHECK(BloomFilter::from_positions(64, hash_positions(64, 5, spec)) == f1);

    // any field change moves the filter (collisions at L=2^40 are negligible)
    const std::int64_t big = std::int64_t{1} << 40;
    const auto base = hash_positions(big, 4, spec);
    CHECK(hash_positions(big, 4, HashSpec{100, 3, 1, 7}) != base);
    CHECK(hash_positions(big, 4, HashSpec{99, 4, 1, 7}) != base);
    CHECK(hash_positions(big, 4, HashSpec{99, 3, 2, 7}) != base);
    CHECK(hash_positions(big, 4, HashSpec{99, 3, 1, 8}) != base);

    CHECK_THROWS_AS(generate(0, 3, spec), std::invalid_argument);
    CHECK_THROWS_AS(generate(8, 0, spec), std::invalid_argument);
}

TEST_CASE("containment never misses a transmitted filter") {
    // exact property of the OR channel: each input is covered by the output
    SplitMix rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::int64_t length = 2 + static_cast<std::int64_t>(rng.below(40));
        const int users = 1 + static_cast<int>(rng.below(5));
        std::vector<std::vector<std::int64_t>> positions(users);
        BloomFilter y(length);
        for (int u = 0; u < users; ++u) {
            const std::int64_t k = 1 + static_cast<std::int64_t>(rng.below(6));
            positions[u] = hash_positions(length, k, HashSpec{rng.next(), u, 0, 0});
            for (const std::int64_t p : positions[u]) y.set(p);
        }
        for (int u = 0; u < users; ++u) {
            const ContainsResult r = contains(y, positions[u]);
            CHECK(r.contained);
            CHECK(r.hashes_checked == static_cast<std::int64_t>(positions[u].size()));
        }
    }
}

TEST_CASE("containment early-exits on the first missing position") {
    const BloomFilter y = BloomFilter::from_string("11110000");
    const std::int64_t hit_then_miss[] = {0, 1, 5, 2};
    const ContainsResult r = contains(y, hit_then_miss);
    CHECK_FALSE(r.contained);
    CHECK(r.hashes_checked == 3);

    const std::int64_t all_hits[] = {3, 2, 1};
    CHECK(contains(y, all_hits).contained);
    CHECK(contains(y, {}).contained);  // all-zero filter is vacuously contained

    // the lazy key variant agrees with the materialized positions
    const HashSpec spec{5, 0, 0, 0};
    const auto pos = hash_positions(8, 4, spec);
    const ContainsResult a = contains(y, pos);
    const ContainsResult b = contains_with_key(y, spec.key(), 4);
    CHECK(a.contained == b.contained);
    CHECK(a.hashes_checked == b.hashes_checked);
}

TEST_CASE("hash positions are uniform over the cells") {
    const std::int64_t length = 16;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(length), 0);
    std::int64_t total = 0;
    for (std::uint64_t s = 0; s < 20000; ++s) {
        const auto pos = hash_positions(length, 4, HashSpec{s, 1, 2, 3});
        for (const std::int64_t p : pos) {
            ++counts[static_cast<std::size_t>(p)];
            ++total;
        }
    }
    const std::vector<double> expected(static_cast<std::size_t>(length), 1.0 / static_cast<double>(length));
    const double stat = testutil::chi_square_stat(counts, expected, total);
    CHECK(testutil::chi_square_pvalue(stat, static_cast<int>(length) - 1) > 1e-3);
}

TEST_CASE("given its weight, a generated filter is uniform over equal-weight sets") {
    // L=5, K=3: bucket samples by weight, then chi-square each weight class
    // against the uniform distribution on its C(5,w) position sets
    const std::int64_t length = 5;
    std::map<std::string, std::int64_t> pattern_counts;
    std::map<std::int64_t, std::int64_t> weight_counts;
    const std::int64_t samples = 200000;
    for (std::int64_t s = 0; s < samples; ++s) {
        const BloomFilter f = generate(length, 3, HashSpec{static_cast<std::uint64_t>(s), 0, 0, 0});
        ++pattern_counts[f.to_string()];
        ++weight_counts[f.weight()];
    }
    const WeightPmf pmf = WeightPmf::exact(length, 3);
    for (const auto& [w, count] : weight_counts) {
        std::vector<std::int64_t> observed;
        for (const auto& [pattern, c] : pattern_counts) {
            const std::int64_t pw = static_cast<std::int64_t>(std::count(pattern.begin(), pattern.end(), '1'));
            if (pw == w) observed.push_back(c);
        }
        // every pattern of this weight must have appeared for the dof below
        const double choose = w == 1 ? 5 : (w == 2 ? 10 : 10);
        CHECK(static_cast<double>(observed.size()) == choose);
        const std::vector<double> expected(observed.size(), 1.0 / choose);
        const double stat = testutil::chi_square_stat(observed, expected, count);
        CHECK(testutil::chi_square_pvalue(stat, static_cast<int>(observed.size()) - 1) > 1e-3);
        // and the weight class frequency matches the exact pmf
        const double p = pmf.at(w);
        const double sd = std::sqrt(p * (1 - p) * static_cast<double>(samples));
        CHECK(std::fabs(static_cast<double>(count) - p * static_cast<double>(samples)) < 4.5 * sd);
    }
}

TEST_CASE("superposing independent filters matches the aggregated weight law") {
    // BF(6,2) | BF(6,2) has the weight distribution of BF(6,4)
    const WeightPmf pmf = WeightPmf::exact(6, 4);
    const std::int64_t samples = 100000;
    std::vector<std::int64_t> counts(7, 0);
    for (std::int64_t s = 0; s < samples; ++s) {
        const BloomFilter a = generate(6, 2, HashSpec{static_cast<std::uint64_t>(s), 0, 0, 0});
        const BloomFilter b = generate(6, 2, HashSpec{static_cast<std::uint64_t>(s), 1, 0, 0});
        ++counts[static_cast<std::size_t>(superpose(a, b).weight())];
    }
    std::vector<double> expected(7, 0.0);
    for (int w = 0; w <= 6; ++w) expected[static_cast<std::size_t>(w)] = w <= pmf.max_weight() ? pmf.at(w) : 0.0;
    double stat = 0;
    int dof = 0;
    for (int w = 1; w <= 4; ++w) {  // support of BF(6,4)
        const double e = expected[static_cast<std::size_t>(w)] * static_cast<double>(samples);
        const double d = static_cast<double>(counts[static_cast<std::size_t>(w)]) - e;
        stat += d * d / e;
        ++dof;
    }
    CHECK(counts[0] == 0);
    CHECK(counts[5] == 0);
    CHECK(counts[6] == 0);
    CHECK(testutil::chi_square_pvalue(stat, dof - 1) > 1e-3);
}
