#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ormac/schemes.hpp"

namespace ormac {

// Cause taxonomy for failed trials; `miss` covers every flavor of a
// transmitted filter not being contained and must stay at zero (the channel
// is noiseless). Classification priority on a failed trial:
// miss, then active_false_message, then inactive_false_accept, then
// ambiguity (an inactive phase-1 candidate with several contained messages).
enum class ErrorCause { none, miss, active_false_message, inactive_false_accept, ambiguity };

std::string_view error_cause_name(ErrorCause cause);
ErrorCause error_cause_from_name(std::string_view name);

struct TrialRecord {
    std::int64_t trial_index = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::mac;
    std::int64_t n = 0;
    double beta = 0;
    double gamma = 0;
    std::int64_t l1 = 0, k1 = 0;
    std::int64_t l2 = 0, k2 = 0;
    std::int64_t m = 0;
    std::int64_t a = 0;
    std::int64_t w1 = 0, w2 = 0;
    std::int64_t candidate_list_size = 0;
    std::int64_t encode_hashes = 0;
    std::int64_t decode_hashes = 0;
    bool success = false;
    ErrorCause cause = ErrorCause::none;
    std::uint64_t fingerprint = 0;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct WilsonInterval {
    double low = 0;
    double high = 1;
};

// 95% Wilson score interval for an observed error count; well behaved at 0
// and at rates near 0 or 1.
WilsonInterval wilson_interval(std::int64_t errors, std::int64_t trials);

struct Summary {
    static constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

    std::int64_t trials = 0;
    std::int64_t errors = 0;
    double error_rate = 0;
    WilsonInterval ci;
    double mean_active = 0;
    double mean_candidate_ratio = kNan;  // nan outside mt mode
    double max_candidate_ratio = kNan;
    double mean_encode_hashes_per_active = 0;
    double mean_decode_hashes_per_user = 0;
    std::int64_t cause_miss = 0;
    std::int64_t cause_active_false_message = 0;
    std::int64_t cause_inactive_false_accept = 0;
    std::int64_t cause_ambiguity = 0;
    // analytic comparison slots; nan when not applicable or guarded out
    double exact_success = kNan;            // exact formula (mac always; ar/mt when conditioned on a)
    double exact_success_at_mean_a = kNan;  // ar/mt anchor at a = round(mean active count)
    double bound_success = kNan;            // concentration lower bound (ar) at the same a
    int feasible = -1;                      // mt: 1 or 0; other modes -1 (n/a)
};

struct RunResult {
    Summary summary;
    std::vector<TrialRecord> records;
};

// Executes `trials` independent trials of the given mode. Deterministic given
// (scenario.master_seed, trials): per-trial seeds are derived by a splittable
// scheme, records land in a preallocated slot by index, and the summary is
// reduced in index order, so any thread count produces identical output.
RunResult run_trials(const Scenario& scenario, Mode mode, std::int64_t trials, int threads = 1);

Summary summarize(const Scenario& scenario, Mode mode, std::span<const TrialRecord> records);

struct SweepRow {
    std::string axis;
    double value = 0;
    Scenario scenario;
    Summary summary;
};

// One run per value of the swept parameter. Axis names: n, beta, gamma,
// kappa, kappa1, kappa2, omega_a, l (case-insensitive). The base scenario's
// master seed is shared across points (common random numbers).
std::vector<SweepRow> run_sweep(const Scenario& base, Mode mode, std::string_view axis,
                                std::span<const double> values, std::int64_t trials, int threads = 1);

// Structured text forms. format_summary output is what persist writes and
// load_summary parses; keys are documented in the README.
std::string format_summary(const Scenario& scenario, Mode mode, const Summary& summary);
std::string format_summary_human(const Scenario& scenario, Mode mode, const Summary& summary);
std::string format_sweep_table(std::span<const SweepRow> rows, Mode mode);
std::string sweep_csv(std::span<const SweepRow> rows, Mode mode);

// Trial records as CSV, fixed column order:
// trial_index, seed, mode, N, beta, gamma, L1, K1, L2, K2, M, a, w1, w2,
// candidate_list_size, encode_hashes, decode_hashes, success, error_cause,
// fingerprint
void persist_records(std::span<const TrialRecord> records, const std::filesystem::path& path);
std::vector<TrialRecord> load_records(const std::filesystem::path& path);

void persist_summary(const Scenario& scenario, Mode mode, const Summary& summary,
                     const std::filesystem::path& path);

struct LoadedRun {
    Mode mode = Mode::mac;
    Scenario scenario;
    Summary summary;
};
LoadedRun load_summary(const std::filesystem::path& path);

struct PersistPaths {
    std::filesystem::path records_csv;
    std::filesystem::path summary_txt;
};

// Writes <prefix>.records.csv and <prefix>.summary.txt.
PersistPaths persist_run(const Scenario& scenario, Mode mode, const RunResult& result,
                         const std::filesystem::path& prefix);

}  // namespace ormac
