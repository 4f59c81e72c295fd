#include "ormac/schemes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_set>

#include "ormac/analysis_detail.hpp"
#include "ormac/errors.hpp"

namespace ormac {

namespace {

using detail::kLn2;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::int64_t ceil_length(double multiplier, std::int64_t na, std::int64_t n) {
    const double raw = multiplier * static_cast<double>(na) * std::log2(static_cast<double>(n));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw)));
}

std::int64_t derived_hash_count(std::int64_t length, std::int64_t na) {
    return std::max<std::int64_t>(
        1, std::llround(static_cast<double>(length) / static_cast<double>(na) * kLn2));
}

}  // namespace

std::string_view mode_name(Mode mode) {
    switch (mode) {
        case Mode::mac: return "mac";
        case Mode::ar: return "ar";
        case Mode::mt: return "mt";
    }
    return "?";
}

Mode mode_from_name(std::string_view name) {
    if (name == "mac") return Mode::mac;
    if (name == "ar") return Mode::ar;
    if (name == "mt") return Mode::mt;
    throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected mac, ar, or mt)");
}

void Scenario::derive(Mode mode) {
    switch (mode) {
        case Mode::mac:
            na = n;
            l1 = l_explicit;
            if (k_explicit > 0)
                k1 = k_explicit;
            else if (mult1 > 0 && n >= 1 && l1 >= 1)
                k1 = std::max<std::int64_t>(1, std::llround(mult1 * static_cast<double>(l1) /
                                                            static_cast<double>(n)));
            else
                k1 = 0;
            l2 = k2 = 0;
            if (rate_driven()) {
                log2m = rsum_bits * static_cast<double>(l1) / static_cast<double>(n);
                m = 0;  // not enumerable; log2m carries the size
            } else {
                m = m_explicit;
                log2m = 0;
            }
            break;
        case Mode::ar:
        case Mode::mt: {
            na = std::clamp<std::int64_t>(std::llround(std::pow(static_cast<double>(n), beta)), 1, n);
            l1 = ceil_length(mult1, na, n);
            k1 = derived_hash_count(l1, na);
            if (mode == Mode::mt) {
                m = std::max<std::int64_t>(1, std::llround(std::pow(static_cast<double>(n), gamma)));
                l2 = ceil_length(mult2, na, n);
                k2 = derived_hash_count(l2, na);
            } else {
                m = 1;
                l2 = k2 = 0;
            }
            log2m = 0;
            break;
        }
    }
}

void Scenario::validate(Mode mode) const {
    require(n >= 1, "scenario: n must be >= 1");
    if (condition_a != -1) {
        require(mode != Mode::mac, "scenario: conditioning on the active count needs ar or mt mode");
        require(condition_a >= 1 && condition_a <= n, "scenario: condition_a outside [1, n]");
    }
    switch (mode) {
        case Mode::mac:
            require(l1 >= 1, "scenario: mac mode needs l >= 1");
            require(k1 >= 1, "scenario: mac mode needs k >= 1 (give k or kappa)");
            if (rate_driven())
                require(m_explicit == 0, "scenario: give either m or rsum_bits, not both");
            else
                require(m >= 1, "scenario: mac mode needs m >= 1 or rsum_bits > 0");
            break;
        case Mode::mt:
            require(gamma >= 0, "scenario: gamma must be >= 0");
            require(mult2 > 0, "scenario: kappa2 must be > 0");
            require(l2 >= 1 && k2 >= 1 && m >= 1, "scenario: derived phase-2 parameters invalid");
            [[fallthrough]];
        case Mode::ar:
            require(n >= 2, "scenario: ar/mt modes need n >= 2");
            require(beta > 0 && beta < 1, "scenario: beta out of (0,1)");
            require(mult1 > 0, "scenario: cost multiplier must be > 0");
            require(na >= 1 && na <= n, "scenario: derived active mean outside [1, n]");
            require(l1 >= 1 && k1 >= 1, "scenario: derived phase-1 parameters invalid");
            break;
    }
}

std::uint64_t Scenario::fingerprint(Mode mode) const {
    std::uint64_t h = hash_combine(0x0f1e2d3c4b5a6978ull, static_cast<std::uint64_t>(mode));
    const auto mixi = [&h](std::int64_t v) { h = hash_combine(h, static_cast<std::uint64_t>(v)); };
    const auto mixd = [&h](double v) { h = hash_combine(h, std::bit_cast<std::uint64_t>(v)); };
    mixi(n);
    mixd(beta);
    mixd(gamma);
    mixd(mult1);
    mixd(mult2);
    mixi(m_explicit);
    mixi(l_explicit);
    mixi(k_explicit);
    mixd(rsum_bits);
    mixi(condition_a);
    h = hash_combine(h, master_seed);
    mixi(na);
    mixi(m);
    mixi(l1);
    mixi(k1);
    mixi(l2);
    mixi(k2);
    return h;
}

Scenario make_mac_scenario(std::int64_t users, std::int64_t messages, std::int64_t length,
                           std::int64_t hash_count, std::uint64_t seed) {
    Scenario s;
    s.n = users;
    s.m_explicit = messages;
    s.l_explicit = length;
    s.k_explicit = hash_count;
    s.master_seed = seed;
    s.derive(Mode::mac);
    s.validate(Mode::mac);
    return s;
}

Scenario make_mac_rate_scenario(std::int64_t users, double rsum_bits, double kappa, std::int64_t length,
                                std::uint64_t seed) {
    require(rsum_bits > 0, "scenario: rsum_bits must be > 0");
    Scenario s;
    s.n = users;
    s.rsum_bits = rsum_bits;
    s.mult1 = kappa;
    s.l_explicit = length;
    s.master_seed = seed;
    s.derive(Mode::mac);
    s.validate(Mode::mac);
    return s;
}

Scenario make_ar_scenario(std::int64_t users, double beta, double omega_a, std::uint64_t seed) {
    Scenario s;
    s.n = users;
    s.beta = beta;
    s.mult1 = omega_a;
    s.master_seed = seed;
    s.derive(Mode::ar);
    s.validate(Mode::ar);
    return s;
}

Scenario make_mt_scenario(std::int64_t users, double beta, double gamma, double kappa1, double kappa2,
                          std::uint64_t seed) {
    Scenario s;
    s.n = users;
    s.beta = beta;
    s.gamma = gamma;
    s.mult1 = kappa1;
    s.mult2 = kappa2;
    s.master_seed = seed;
    s.derive(Mode::mt);
    s.validate(Mode::mt);
    return s;
}

ActivityPattern sample_activity(const Scenario& scenario, Mode mode, std::uint64_t trial_seed) {
    ActivityPattern p;
    SplitMix rng(hash_combine(trial_seed, 0xAC7111ull));
    if (mode == Mode::mac) {
        p.active.resize(static_cast<std::size_t>(scenario.n));
        p.messages.resize(static_cast<std::size_t>(scenario.n));
        for (std::int64_t u = 0; u < scenario.n; ++u) {
            p.active[static_cast<std::size_t>(u)] = u;
            // rate-driven message sets are unenumerable; a 63-bit draw stands
            // in for the message id, which only feeds the hash stream
            p.messages[static_cast<std::size_t>(u)] =
                scenario.rate_driven() ? static_cast<std::int64_t>(rng.next() >> 1)
                                       : static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(scenario.m)));
        }
        return p;
    }
    if (scenario.condition_a >= 1) {
        // Floyd's sampling: exactly condition_a distinct users
        std::unordered_set<std::int64_t> chosen;
        for (std::int64_t j = scenario.n - scenario.condition_a; j < scenario.n; ++j) {
            const std::int64_t t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(j) + 1));
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        p.active.assign(chosen.begin(), chosen.end());
        std::sort(p.active.begin(), p.active.end());
    } else {
        const double p_active = static_cast<double>(scenario.na) / static_cast<double>(scenario.n);
        for (std::int64_t u = 0; u < scenario.n; ++u)
            if (rng.u01() < p_active) p.active.push_back(u);
    }
    p.messages.resize(p.active.size());
    for (std::size_t i = 0; i < p.active.size(); ++i)
        p.messages[i] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(scenario.m)));
    return p;
}

Codebook Codebook::build(std::uint64_t master_seed, std::int64_t user, std::int64_t phase,
                         std::int64_t messages, std::int64_t length, std::int64_t hash_count) {
    require(messages >= 1, "codebook: message count must be >= 1");
    require(length >= 1 && hash_count >= 1, "codebook: length and hash count must be >= 1");
    if (messages * hash_count > 20'000'000 || messages > 100'000'000 / std::max<std::int64_t>(1, (length + 63) / 64))
        throw resource_limit_error("codebook: materialization too large (M=" + std::to_string(messages) +
                                   ", L=" + std::to_string(length) + ")");
    Codebook c;
    c.user_ = user;
    c.length_ = length;
    c.positions_.reserve(static_cast<std::size_t>(messages));
    c.filters_.reserve(static_cast<std::size_t>(messages));
    for (std::int64_t msg = 0; msg < messages; ++msg) {
        HashSpec spec{master_seed, user, phase, msg};
        c.positions_.push_back(hash_positions(length, hash_count, spec));
        c.filters_.push_back(BloomFilter::from_positions(length, c.positions_.back()));
    }
    return c;
}

Codebook Codebook::from_position_lists(std::int64_t user, std::int64_t length,
                                       std::vector<std::vector<std::int64_t>> position_lists) {
    require(!position_lists.empty(), "codebook: message count must be >= 1");
    Codebook c;
    c.user_ = user;
    c.length_ = length;
    c.positions_ = std::move(position_lists);
    for (const auto& pos : c.positions_) c.filters_.push_back(BloomFilter::from_positions(length, pos));
    return c;
}

std::span<const std::int64_t> Codebook::positions(std::int64_t message) const {
    require(message >= 0 && message < messages(), "codebook: message id out of range");
    return positions_[static_cast<std::size_t>(message)];
}

const BloomFilter& Codebook::filter(std::int64_t message) const {
    require(message >= 0 && message < messages(), "codebook: message id out of range");
    return filters_[static_cast<std::size_t>(message)];
}

BloomFilter or_channel(std::int64_t length, std::span<const BloomFilter> inputs) {
    BloomFilter y(length);
    for (const BloomFilter& x : inputs) y |= x;  // length mismatch rejected by |=
    return y;
}

DecodeOutcome decode_per_user(const BloomFilter& y, std::span<const Codebook> codebooks) {
    DecodeOutcome out;
    for (const Codebook& book : codebooks) {
        std::int64_t contained_count = 0;
        std::int64_t contained_msg = -1;
        for (std::int64_t msg = 0; msg < book.messages(); ++msg) {
            const ContainsResult r = contains(y, book.positions(msg));
            out.hash_count_total += r.hashes_checked;
            if (r.contained) {
                ++contained_count;
                contained_msg = msg;
            }
        }
        if (contained_count == 1) {
            out.declared_active.push_back(book.user());
            out.declared_messages.push_back(contained_msg);
        } else {
            out.ambiguous.push_back(book.user());
        }
    }
    return out;
}

std::vector<std::vector<std::int64_t>> joint_decode(const BloomFilter& y, std::span<const Codebook> codebooks,
                                                    std::int64_t enumeration_guard) {
    double tuple_count = 1;
    for (const Codebook& book : codebooks) tuple_count *= static_cast<double>(book.messages());
    if (tuple_count > static_cast<double>(enumeration_guard))
        throw resource_limit_error("joint_decode: tuple count exceeds the enumeration guard");

    const std::size_t users = codebooks.size();
    std::vector<std::vector<std::int64_t>> matches;
    if (users == 0) return matches;

    std::vector<std::int64_t> tuple(users, 0);
    // partial[u] = superposition of the first u chosen filters
    std::vector<BloomFilter> partial(users + 1, BloomFilter(y.length()));
    for (std::size_t u = 0; u < users; ++u)
        partial[u + 1] = superpose(partial[u], codebooks[u].filter(0));

    for (;;) {
        if (partial[users] == y) matches.push_back(tuple);
        // odometer step: advance the last digit, carrying leftwards
        std::size_t u = users;
        while (u > 0 && tuple[u - 1] + 1 == codebooks[u - 1].messages()) {
            tuple[u - 1] = 0;
            --u;
        }
        if (u == 0) break;
        ++tuple[u - 1];
        for (std::size_t v = u - 1; v < users; ++v)
            partial[v + 1] = superpose(partial[v], codebooks[v].filter(tuple[v]));
    }
    return matches;
}

BloomFilter ar_encode(const Scenario& scenario, const ActivityPattern& pattern) {
    BloomFilter y(scenario.l1);
    for (std::int64_t u : pattern.active) {
        const std::uint64_t key = HashSpec{scenario.master_seed, u, kPhaseSingle, 0}.key();
        for (std::int64_t j = 0; j < scenario.k1; ++j)
            y.set(HashSpec::position_from_key(key, j, scenario.l1));
    }
    return y;
}

std::vector<std::uint64_t> signature_keys(const Scenario& scenario, std::int64_t phase) {
    std::vector<std::uint64_t> keys(static_cast<std::size_t>(scenario.n));
    for (std::int64_t u = 0; u < scenario.n; ++u)
        keys[static_cast<std::size_t>(u)] = HashSpec{scenario.master_seed, u, phase, 0}.key();
    return keys;
}

DecodeOutcome ar_decode(const BloomFilter& y, const Scenario& scenario,
                        std::span<const std::uint64_t> sig_keys) {
    DecodeOutcome out;
    for (std::int64_t u = 0; u < scenario.n; ++u) {
        const std::uint64_t key = sig_keys.empty() ? HashSpec{scenario.master_seed, u, kPhaseSingle, 0}.key()
                                                   : sig_keys[static_cast<std::size_t>(u)];
        const ContainsResult r = contains_with_key(y, key, scenario.k1);
        out.hash_count_total += r.hashes_checked;
        if (r.contained) {
            out.declared_active.push_back(u);
            out.declared_messages.push_back(0);
        }
    }
    return out;
}

std::pair<BloomFilter, BloomFilter> mt_encode(const Scenario& scenario, const ActivityPattern& pattern) {
    BloomFilter y1(scenario.l1);
    BloomFilter y2(scenario.l2);
    for (std::size_t i = 0; i < pattern.active.size(); ++i) {
        const std::int64_t u = pattern.active[i];
        const std::uint64_t sig_key = HashSpec{scenario.master_seed, u, kPhaseSignature, 0}.key();
        for (std::int64_t j = 0; j < scenario.k1; ++j)
            y1.set(HashSpec::position_from_key(sig_key, j, scenario.l1));
        const std::uint64_t msg_key =
            HashSpec{scenario.master_seed, u, kPhaseMessage, pattern.messages[i]}.key();
        for (std::int64_t j = 0; j < scenario.k2; ++j)
            y2.set(HashSpec::position_from_key(msg_key, j, scenario.l2));
    }
    return {std::move(y1), std::move(y2)};
}

DecodeOutcome mt_decode(const BloomFilter& y1, const BloomFilter& y2, const Scenario& scenario,
                        std::span<const std::uint64_t> sig_keys) {
    DecodeOutcome out;
    for (std::int64_t u = 0; u < scenario.n; ++u) {
        const std::uint64_t sig_key = sig_keys.empty()
                                          ? HashSpec{scenario.master_seed, u, kPhaseSignature, 0}.key()
                                          : sig_keys[static_cast<std::size_t>(u)];
        const ContainsResult sig = contains_with_key(y1, sig_key, scenario.k1);
        out.hash_count_total += sig.hashes_checked;
        if (!sig.contained) continue;
        ++out.candidate_list_size;

        // shared key prefix for this user's message streams
        const std::uint64_t msg_partial =
            hash_combine(hash_combine(scenario.master_seed, static_cast<std::uint64_t>(u)),
                         static_cast<std::uint64_t>(kPhaseMessage));
        std::int64_t contained_count = 0;
        std::int64_t contained_msg = -1;
        for (std::int64_t msg = 0; msg < scenario.m; ++msg) {
            const ContainsResult r =
                contains_with_key(y2, hash_combine(msg_partial, static_cast<std::uint64_t>(msg)), scenario.k2);
            out.hash_count_total += r.hashes_checked;
            if (r.contained) {
                ++contained_count;
                contained_msg = msg;
            }
        }
        if (contained_count == 1) {
            out.declared_active.push_back(u);
            out.declared_messages.push_back(contained_msg);
        } else if (contained_count > 1) {
            out.ambiguous.push_back(u);
        }
        // empty contained set: declared inactive, a phase-1 false alarm resolved
    }
    return out;
}

}  // namespace ormac
