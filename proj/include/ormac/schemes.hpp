#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ormac/bloom.hpp"

namespace ormac {

enum class Mode { mac, ar, mt };

std::string_view mode_name(Mode mode);
Mode mode_from_name(std::string_view name);

// Phase ids inside HashSpec identities.
inline constexpr std::int64_t kPhaseSingle = 0;     // fixed-N codebooks, recognition signatures
inline constexpr std::int64_t kPhaseSignature = 1;  // two-phase: phase-1 signatures
inline constexpr std::int64_t kPhaseMessage = 2;    // two-phase: phase-2 codebooks

// Experiment parameters. Factories fill the generator inputs; derive() turns
// them into concrete (N_a, M, L, K) values:
//   N_a = clamp(round(N^beta), 1, N)      M = max(1, round(N^gamma))
//   L_i = max(1, ceil(mult_i * N_a * log2 N))
//   K_i = max(1, round((L_i / N_a) * ln 2))
// mac mode instead takes L (and M or a sum rate) directly; a positive
// rsum_bits selects the rate-driven variant where the per-user message count
// is 2^(rsum_bits * L / N), far beyond enumeration.
struct Scenario {
    // generator inputs
    std::int64_t n = 1;
    double beta = 0;
    double gamma = 0;
    double mult1 = 0;  // kappa (mac rate mode), omega_a (ar), kappa1 (mt)
    double mult2 = 0;  // kappa2 (mt)
    std::int64_t m_explicit = 0;
    std::int64_t l_explicit = 0;
    std::int64_t k_explicit = 0;
    double rsum_bits = 0;
    std::int64_t condition_a = -1;  // >= 1: condition on exactly this many actives
    std::uint64_t master_seed = 0;

    // derived
    std::int64_t na = 0;
    std::int64_t m = 1;
    std::int64_t l1 = 0, k1 = 0;
    std::int64_t l2 = 0, k2 = 0;
    double log2m = 0;  // rate mode: rsum_bits * L / N

    bool rate_driven() const { return rsum_bits > 0; }

    void derive(Mode mode);
    void validate(Mode mode) const;
    std::uint64_t fingerprint(Mode mode) const;
};

Scenario make_mac_scenario(std::int64_t users, std::int64_t messages, std::int64_t length,
                           std::int64_t hash_count, std::uint64_t seed);
// kappa fixes K = max(1, round(kappa * L / N)); rsum_bits fixes the sum rate.
Scenario make_mac_rate_scenario(std::int64_t users, double rsum_bits, double kappa, std::int64_t length,
                                std::uint64_t seed);
Scenario make_ar_scenario(std::int64_t users, double beta, double omega_a, std::uint64_t seed);
Scenario make_mt_scenario(std::int64_t users, double beta, double gamma, double kappa1, double kappa2,
                          std::uint64_t seed);

struct ActivityPattern {
    std::vector<std::int64_t> active;    // sorted user ids
    std::vector<std::int64_t> messages;  // parallel to active
};

// Each user active i.i.d. with probability N_a/N and a uniform message; in
// mac mode all users transmit. condition_a >= 1 fixes the active count
// exactly. Deterministic per trial_seed.
ActivityPattern sample_activity(const Scenario& scenario, Mode mode, std::uint64_t trial_seed);

// Per-user message codebook: M filters of shared (L, K), regenerable from the
// identity alone. The explicit-position form exists for handcrafted tests.
class Codebook {
public:
    static Codebook build(std::uint64_t master_seed, std::int64_t user, std::int64_t phase,
                          std::int64_t messages, std::int64_t length, std::int64_t hash_count);
    static Codebook from_position_lists(std::int64_t user, std::int64_t length,
                                        std::vector<std::vector<std::int64_t>> position_lists);

    std::int64_t user() const { return user_; }
    std::int64_t messages() const { return static_cast<std::int64_t>(positions_.size()); }
    std::int64_t length() const { return length_; }

    std::span<const std::int64_t> positions(std::int64_t message) const;
    const BloomFilter& filter(std::int64_t message) const;

private:
    Codebook() = default;

    std::int64_t user_ = 0;
    std::int64_t length_ = 0;
    std::vector<std::vector<std::int64_t>> positions_;
    std::vector<BloomFilter> filters_;
};

// Positionwise OR of all inputs; an empty list is the all-zero array.
BloomFilter or_channel(std::int64_t length, std::span<const BloomFilter> inputs);

struct DecodeOutcome {
    std::vector<std::int64_t> declared_active;    // users decoded to a unique message, sorted
    std::vector<std::int64_t> declared_messages;  // parallel to declared_active
    std::vector<std::int64_t> ambiguous;          // users with a non-singleton contained set, sorted
    std::int64_t candidate_list_size = 0;         // two-phase only
    std::int64_t hash_count_total = 0;
};

// Fixed-N containment decoding: every user transmits; a user lands in
// declared_active when exactly one of its codewords is contained in y.
DecodeOutcome decode_per_user(const BloomFilter& y, std::span<const Codebook> codebooks);

// All message tuples whose superposition reproduces y exactly. Joint decoding
// succeeds when the result is the singleton transmitted tuple.
std::vector<std::vector<std::int64_t>> joint_decode(const BloomFilter& y, std::span<const Codebook> codebooks,
                                                    std::int64_t enumeration_guard = 1'000'000);

// Signature stream keys for all users at the given phase; the harness
// precomputes these once per run and passes them back into the decoders.
std::vector<std::uint64_t> signature_keys(const Scenario& scenario, std::int64_t phase);

// Activity recognition: superposed signatures of active users, then
// containment per user. An empty sig_keys span means derive keys on the fly.
BloomFilter ar_encode(const Scenario& scenario, const ActivityPattern& pattern);
DecodeOutcome ar_decode(const BloomFilter& y, const Scenario& scenario,
                        std::span<const std::uint64_t> sig_keys = {});

// Two-phase message transmission: phase 1 carries signatures, phase 2 the
// message codewords. Decoding filters phase-1 candidates through phase 2.
std::pair<BloomFilter, BloomFilter> mt_encode(const Scenario& scenario, const ActivityPattern& pattern);
DecodeOutcome mt_decode(const BloomFilter& y1, const BloomFilter& y2, const Scenario& scenario,
                        std::span<const std::uint64_t> sig_keys = {});

}  // namespace ormac
