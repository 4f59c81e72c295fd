#include "ormac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ormac/analysis.hpp"
#include "ormac/analysis_detail.hpp"
#include "ormac/errors.hpp"

namespace ormac {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits) {
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Per-run immutable state shared by all worker threads. Every trial redraws
// the codeword filters from its own trial seed: the exact formulas the runs
// are compared against average over the random-coding ensemble, so a codebook
// frozen across trials would estimate a different (conditional) quantity.
struct RunContext {
    const Scenario& sc;
    Mode mode;
    std::uint64_t fingerprint = 0;
    double competing = 0;       // mac rate mode, linear form
    double log2_competing = 0;  // mac rate mode, log2 form
    bool competing_in_log2 = false;

    RunContext(const Scenario& scenario, Mode run_mode) : sc(scenario), mode(run_mode) {
        sc.validate(mode);
        fingerprint = sc.fingerprint(mode);
        if (mode == Mode::mac) {
            if (sc.rate_driven()) {
                if (sc.log2m <= 50.0) {
                    competing = static_cast<double>(sc.n) * (std::exp2(sc.log2m) - 1.0);
                } else {
                    log2_competing = std::log2(static_cast<double>(sc.n)) + sc.log2m;
                    competing_in_log2 = true;
                }
            } else if (sc.n * sc.m * sc.k1 > 20'000'000) {
                throw resource_limit_error(
                    "run_trials: mac codebook enumeration too large; use the rate-driven form");
            }
        }
    }

    double rate_mode_success_given_weight(std::int64_t w) const {
        return competing_in_log2 ? success_prob_given_weight_log2(log2_competing, w, sc.l1, sc.k1)
                                 : success_prob_given_weight(competing, w, sc.l1, sc.k1);
    }
};

TrialRecord base_record(const RunContext& ctx, std::int64_t index) {
    TrialRecord r;
    r.trial_index = index;
    r.seed = derive_trial_seed(ctx.sc.master_seed, index);
    r.mode = ctx.mode;
    r.n = ctx.sc.n;
    r.beta = ctx.sc.beta;
    r.gamma = ctx.sc.gamma;
    r.l1 = ctx.sc.l1;
    r.k1 = ctx.sc.k1;
    r.l2 = ctx.sc.l2;
    r.k2 = ctx.sc.k2;
    r.m = ctx.sc.m;
    r.fingerprint = ctx.fingerprint;
    return r;
}

TrialRecord run_mac_trial(const RunContext& ctx, std::int64_t index) {
    const Scenario& sc = ctx.sc;
    TrialRecord r = base_record(ctx, index);
    const ActivityPattern pat = sample_activity(sc, Mode::mac, r.seed);
    r.a = sc.n;
    r.encode_hashes = sc.n * sc.k1;

    BloomFilter y(sc.l1);
    for (std::int64_t u = 0; u < sc.n; ++u) {
        const std::uint64_t key =
            HashSpec{r.seed, u, kPhaseSingle, pat.messages[static_cast<std::size_t>(u)]}.key();
        for (std::int64_t j = 0; j < sc.k1; ++j) y.set(HashSpec::position_from_key(key, j, sc.l1));
    }
    r.w1 = y.weight();

    if (sc.rate_driven()) {
        // Draw the decode verdict from the exact conditional success
        // probability given the output weight: the competing codewords'
        // containment is independent of which messages were sent, so this is
        // equivalent in law to enumerating all 2^log2m messages per user.
        const double p_success = ctx.rate_mode_success_given_weight(r.w1);
        SplitMix verdict(hash_combine(r.seed, 0xDEC1DEull));
        r.success = verdict.u01() < p_success;
        r.cause = r.success ? ErrorCause::none : ErrorCause::active_false_message;
        return r;
    }

    bool wrong_message = false;  // transmitted codeword not contained: impossible on this channel
    std::int64_t ambiguous_users = 0;
    for (std::int64_t u = 0; u < sc.n; ++u) {
        std::int64_t contained_count = 0;
        std::int64_t contained_msg = -1;
        for (std::int64_t msg = 0; msg < sc.m; ++msg) {
            const ContainsResult res =
                contains_with_key(y, HashSpec{r.seed, u, kPhaseSingle, msg}.key(), sc.k1);
            r.decode_hashes += res.hashes_checked;
            if (res.contained) {
                ++contained_count;
                contained_msg = msg;
            }
        }
        if (contained_count == 1) {
            if (contained_msg != pat.messages[static_cast<std::size_t>(u)]) wrong_message = true;
        } else {
            ++ambiguous_users;
        }
    }
    r.success = ambiguous_users == 0 && !wrong_message;
    if (!r.success) r.cause = wrong_message ? ErrorCause::miss : ErrorCause::active_false_message;
    return r;
}

TrialRecord run_ar_trial(const RunContext& ctx, std::int64_t index) {
    const Scenario& sc = ctx.sc;
    TrialRecord r = base_record(ctx, index);
    const ActivityPattern pat = sample_activity(sc, Mode::ar, r.seed);
    r.a = static_cast<std::int64_t>(pat.active.size());
    r.encode_hashes = r.a * sc.k1;

    Scenario trial_sc = sc;
    trial_sc.master_seed = r.seed;  // fresh signature draw per trial
    const BloomFilter y = ar_encode(trial_sc, pat);
    r.w1 = y.weight();
    const DecodeOutcome out = ar_decode(y, trial_sc, {});
    r.decode_hashes = out.hash_count_total;

    const bool no_miss = std::includes(out.declared_active.begin(), out.declared_active.end(),
                                       pat.active.begin(), pat.active.end());
    r.success = no_miss && out.declared_active.size() == pat.active.size();
    if (!r.success) r.cause = no_miss ? ErrorCause::inactive_false_accept : ErrorCause::miss;
    return r;
}

TrialRecord run_mt_trial(const RunContext& ctx, std::int64_t index) {
    const Scenario& sc = ctx.sc;
    TrialRecord r = base_record(ctx, index);
    const ActivityPattern pat = sample_activity(sc, Mode::mt, r.seed);
    r.a = static_cast<std::int64_t>(pat.active.size());
    r.encode_hashes = r.a * (sc.k1 + sc.k2);

    Scenario trial_sc = sc;
    trial_sc.master_seed = r.seed;  // fresh signature and message draws per trial
    const auto [y1, y2] = mt_encode(trial_sc, pat);
    r.w1 = y1.weight();
    r.w2 = y2.weight();
    const DecodeOutcome out = mt_decode(y1, y2, trial_sc, {});
    r.decode_hashes = out.hash_count_total;
    r.candidate_list_size = out.candidate_list_size;

    // walk the sorted truth against the sorted decode outcome
    bool miss = false;
    bool active_ambiguous = false;
    std::size_t truth_hits = 0;
    for (std::size_t i = 0; i < pat.active.size(); ++i) {
        const std::int64_t u = pat.active[i];
        const auto it = std::lower_bound(out.declared_active.begin(), out.declared_active.end(), u);
        if (it != out.declared_active.end() && *it == u) {
            const std::size_t pos = static_cast<std::size_t>(it - out.declared_active.begin());
            if (out.declared_messages[pos] == pat.messages[i])
                ++truth_hits;
            else
                miss = true;  // unique but wrong: transmitted codeword missed
        } else if (std::binary_search(out.ambiguous.begin(), out.ambiguous.end(), u)) {
            active_ambiguous = true;
        } else {
            miss = true;  // active user vanished from the candidate list
        }
    }
    r.success = !miss && !active_ambiguous && truth_hits == pat.active.size() &&
                out.declared_active.size() == pat.active.size() && out.ambiguous.empty();
    if (!r.success) {
        if (miss)
            r.cause = ErrorCause::miss;
        else if (active_ambiguous)
            r.cause = ErrorCause::active_false_message;
        else if (out.declared_active.size() > truth_hits)
            r.cause = ErrorCause::inactive_false_accept;
        else
            r.cause = ErrorCause::ambiguity;  // inactive candidate with several contained messages
    }
    return r;
}

TrialRecord run_one_trial(const RunContext& ctx, std::int64_t index) {
    switch (ctx.mode) {
        case Mode::mac: return run_mac_trial(ctx, index);
        case Mode::ar: return run_ar_trial(ctx, index);
        case Mode::mt: return run_mt_trial(ctx, index);
    }
    throw std::logic_error("run_trials: unreachable mode");
}

void fill_comparisons(const Scenario& sc, Mode mode, Summary& s) {
    try {
        switch (mode) {
            case Mode::mac:
                if (sc.rate_driven()) {
                    if (sc.log2m <= 50.0)
                        s.exact_success = success_prob_competing(
                            sc.n, static_cast<double>(sc.n) * (std::exp2(sc.log2m) - 1.0), sc.l1, sc.k1);
                    else
                        s.exact_success = success_prob_competing_log2(
                            sc.n, std::log2(static_cast<double>(sc.n)) + sc.log2m, sc.l1, sc.k1);
                } else {
                    s.exact_success = success_prob_exact(sc.n, sc.m, sc.l1, sc.k1);
                }
                break;
            case Mode::ar: {
                const std::int64_t a = sc.condition_a >= 1 ? sc.condition_a
                                                           : std::llround(s.mean_active);
                if (a >= 1 && a <= sc.n) {
                    s.exact_success_at_mean_a = ar_success_exact(sc.n, a, sc.l1, sc.k1);
                    s.bound_success = ar_success_lower_bound_best(sc.n, a, sc.l1, sc.k1).clamped;
                    if (sc.condition_a >= 1) s.exact_success = s.exact_success_at_mean_a;
                }
                break;
            }
            case Mode::mt: {
                s.feasible = feasibility_mt(sc.mult1, sc.mult2, sc.beta, sc.gamma) ? 1 : 0;
                const std::int64_t a = sc.condition_a >= 1 ? sc.condition_a
                                                           : std::llround(s.mean_active);
                if (a >= 1 && a <= sc.n) {
                    s.exact_success_at_mean_a =
                        two_phase_success_exact(a, sc.n, sc.m, sc.l1, sc.k1, sc.l2, sc.k2);
                    if (sc.condition_a >= 1) s.exact_success = s.exact_success_at_mean_a;
                }
                break;
            }
        }
    } catch (const resource_limit_error&) {
        // comparison slots stay nan when the exact computation is out of reach
    }
}

}  // namespace

std::string_view error_cause_name(ErrorCause cause) {
    switch (cause) {
        case ErrorCause::none: return "none";
        case ErrorCause::miss: return "miss";
        case ErrorCause::active_false_message: return "active_false_message";
        case ErrorCause::inactive_false_accept: return "inactive_false_accept";
        case ErrorCause::ambiguity: return "ambiguity";
    }
    return "?";
}

ErrorCause error_cause_from_name(std::string_view name) {
    if (name == "none") return ErrorCause::none;
    if (name == "miss") return ErrorCause::miss;
    if (name == "active_false_message") return ErrorCause::active_false_message;
    if (name == "inactive_false_accept") return ErrorCause::inactive_false_accept;
    if (name == "ambiguity") return ErrorCause::ambiguity;
    throw std::invalid_argument("unknown error cause '" + std::string(name) + "'");
}

WilsonInterval wilson_interval(std::int64_t errors, std::int64_t trials) {
    if (trials < 1) throw std::invalid_argument("wilson_interval: trials must be >= 1");
    if (errors < 0 || errors > trials)
        throw std::invalid_argument("wilson_interval: errors outside [0, trials]");
    constexpr double z = 1.959963984540054;  // 97.5th normal percentile
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

Summary summarize(const Scenario& scenario, Mode mode, std::span<const TrialRecord> records) {
    if (records.empty()) throw std::invalid_argument("summarize: needs at least one record");
    Summary s;
    s.trials = static_cast<std::int64_t>(records.size());
    std::int64_t sum_a = 0, sum_enc = 0, sum_dec = 0;
    double ratio_sum = 0, ratio_max = 0;
    std::int64_t ratio_count = 0;
    for (const TrialRecord& r : records) {
        if (!r.success) ++s.errors;
        switch (r.cause) {
            case ErrorCause::none: break;
            case ErrorCause::miss: ++s.cause_miss; break;
            case ErrorCause::active_false_message: ++s.cause_active_false_message; break;
            case ErrorCause::inactive_false_accept: ++s.cause_inactive_false_accept; break;
            case ErrorCause::ambiguity: ++s.cause_ambiguity; break;
        }
        sum_a += r.a;
        sum_enc += r.encode_hashes;
        sum_dec += r.decode_hashes;
        if (mode == Mode::mt && r.a > 0) {
            const double ratio = static_cast<double>(r.candidate_list_size) / static_cast<double>(r.a);
            ratio_sum += ratio;
            ratio_max = std::max(ratio_max, ratio);
            ++ratio_count;
        }
    }
    const double trials = static_cast<double>(s.trials);
    s.error_rate = static_cast<double>(s.errors) / trials;
    s.ci = wilson_interval(s.errors, s.trials);
    s.mean_active = static_cast<double>(sum_a) / trials;
    if (ratio_count > 0) {
        s.mean_candidate_ratio = ratio_sum / static_cast<double>(ratio_count);
        s.max_candidate_ratio = ratio_max;
    }
    s.mean_encode_hashes_per_active =
        sum_a > 0 ? static_cast<double>(sum_enc) / static_cast<double>(sum_a) : kNan;
    s.mean_decode_hashes_per_user =
        static_cast<double>(sum_dec) / (trials * static_cast<double>(scenario.n));
    fill_comparisons(scenario, mode, s);
    return s;
}

RunResult run_trials(const Scenario& scenario, Mode mode, std::int64_t trials, int threads) {
    if (trials < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
    const RunContext ctx(scenario, mode);
    std::vector<TrialRecord> records(static_cast<std::size_t>(trials));

    const int worker_count = static_cast<int>(std::clamp<std::int64_t>(threads, 1, 64));
    if (worker_count == 1) {
        for (std::int64_t i = 0; i < trials; ++i) records[static_cast<std::size_t>(i)] = run_one_trial(ctx, i);
    } else {
        std::atomic<std::int64_t> cursor{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto work = [&]() {
            try {
                for (;;) {
                    const std::int64_t start = cursor.fetch_add(64);
                    if (start >= trials) return;
                    const std::int64_t end = std::min<std::int64_t>(start + 64, trials);
                    for (std::int64_t i = start; i < end; ++i)
                        records[static_cast<std::size_t>(i)] = run_one_trial(ctx, i);
                }
            } catch (...) {
                const std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int t = 0; t < worker_count; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    RunResult result;
    result.summary = summarize(scenario, mode, records);
    result.records = std::move(records);
    return result;
}

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void apply_axis(Scenario& s, Mode mode, const std::string& axis, double value) {
    if (axis == "n") {
        s.n = std::llround(value);
    } else if (axis == "beta") {
        s.beta = value;
    } else if (axis == "gamma") {
        s.gamma = value;
    } else if (axis == "kappa" || axis == "kappa1" || axis == "omega_a") {
        s.mult1 = value;
    } else if (axis == "kappa2") {
        s.mult2 = value;
    } else if (axis == "l") {
        if (mode != Mode::mac)
            throw std::invalid_argument("run_sweep: axis 'l' applies to mac mode, where L is explicit");
        s.l_explicit = std::llround(value);
    } else {
        throw std::invalid_argument("run_sweep: unknown axis '" + axis +
                                    "' (expected n, beta, gamma, kappa, kappa1, kappa2, omega_a, or l)");
    }
    s.derive(mode);
    s.validate(mode);
}

}  // namespace

std::vector<SweepRow> run_sweep(const Scenario& base, Mode mode, std::string_view axis,
                                std::span<const double> values, std::int64_t trials, int threads) {
    const std::string ax = lowercase(axis);
    {
        Scenario probe = base;  // reject bad axis names even for empty sweeps
        if (!values.empty())
            apply_axis(probe, mode, ax, values.front());
        else
            apply_axis(probe, mode, ax, ax == "n" ? static_cast<double>(base.n) : 1.0);
    }
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        SweepRow row;
        row.axis = ax;
        row.value = v;
        row.scenario = base;
        apply_axis(row.scenario, mode, ax, v);
        row.summary = run_trials(row.scenario, mode, trials, threads).summary;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

double preferred_exact_success(const Summary& s) {
    return std::isnan(s.exact_success) ? s.exact_success_at_mean_a : s.exact_success;
}

std::string feasible_token(int feasible) {
    return feasible < 0 ? "n/a" : (feasible ? "yes" : "no");
}

}  // namespace

std::string format_summary(const Scenario& sc, Mode mode, const Summary& s) {
    std::ostringstream out;
    out << "# ormac run summary\n";
    out << "format = 1\n";
    out << "mode = " << mode_name(mode) << "\n";
    out << "scenario.n = " << sc.n << "\n";
    out << "scenario.beta = " << fmt_double(sc.beta) << "\n";
    out << "scenario.gamma = " << fmt_double(sc.gamma) << "\n";
    out << "scenario.mult1 = " << fmt_double(sc.mult1) << "\n";
    out << "scenario.mult2 = " << fmt_double(sc.mult2) << "\n";
    out << "scenario.m_explicit = " << sc.m_explicit << "\n";
    out << "scenario.l_explicit = " << sc.l_explicit << "\n";
    out << "scenario.k_explicit = " << sc.k_explicit << "\n";
    out << "scenario.rsum_bits = " << fmt_double(sc.rsum_bits) << "\n";
    out << "scenario.condition_a = " << sc.condition_a << "\n";
    out << "scenario.master_seed = " << sc.master_seed << "\n";
    out << "derived.na = " << sc.na << "\n";
    out << "derived.m = " << sc.m << "\n";
    out << "derived.l1 = " << sc.l1 << "\n";
    out << "derived.k1 = " << sc.k1 << "\n";
    out << "derived.l2 = " << sc.l2 << "\n";
    out << "derived.k2 = " << sc.k2 << "\n";
    out << "derived.log2m = " << fmt_double(sc.log2m) << "\n";
    char fp[24];
    std::snprintf(fp, sizeof fp, "0x%016llx", static_cast<unsigned long long>(sc.fingerprint(mode)));
    out << "fingerprint = " << fp << "\n";
    out << "run.trials = " << s.trials << "\n";
    out << "run.errors = " << s.errors << "\n";
    out << "run.error_rate = " << fmt_double(s.error_rate) << "\n";
    out << "run.ci95_low = " << fmt_double(s.ci.low) << "\n";
    out << "run.ci95_high = " << fmt_double(s.ci.high) << "\n";
    out << "run.mean_active = " << fmt_double(s.mean_active) << "\n";
    out << "run.mean_candidate_ratio = " << fmt_double(s.mean_candidate_ratio) << "\n";
    out << "run.max_candidate_ratio = " << fmt_double(s.max_candidate_ratio) << "\n";
    out << "run.mean_encode_hashes_per_active = " << fmt_double(s.mean_encode_hashes_per_active) << "\n";
    out << "run.mean_decode_hashes_per_user = " << fmt_double(s.mean_decode_hashes_per_user) << "\n";
    out << "run.cause.miss = " << s.cause_miss << "\n";
    out << "run.cause.active_false_message = " << s.cause_active_false_message << "\n";
    out << "run.cause.inactive_false_accept = " << s.cause_inactive_false_accept << "\n";
    out << "run.cause.ambiguity = " << s.cause_ambiguity << "\n";
    out << "compare.exact_success = " << fmt_double(s.exact_success) << "\n";
    out << "compare.exact_success_at_mean_a = " << fmt_double(s.exact_success_at_mean_a) << "\n";
    out << "compare.bound_success = " << fmt_double(s.bound_success) << "\n";
    out << "compare.feasible = " << feasible_token(s.feasible) << "\n";
    return out.str();
}

std::string format_summary_human(const Scenario& sc, Mode mode, const Summary& s) {
    std::ostringstream out;
    out << "mode " << mode_name(mode) << "  N " << sc.n;
    if (mode == Mode::mac) {
        out << "  L " << sc.l1 << "  K " << sc.k1;
        if (sc.rate_driven())
            out << "  rsum " << fmt_fixed(sc.rsum_bits, 3) << " bits/c.u. (log2 M = " << fmt_fixed(sc.log2m, 1)
                << ")";
        else
            out << "  M " << sc.m;
    } else {
        out << "  beta " << fmt_fixed(sc.beta, 3) << "  N_a " << sc.na;
        if (mode == Mode::mt)
            out << "  gamma " << fmt_fixed(sc.gamma, 3) << "  M " << sc.m << "  (L1,K1) (" << sc.l1 << ","
                << sc.k1 << ")  (L2,K2) (" << sc.l2 << "," << sc.k2 << ")";
        else
            out << "  L " << sc.l1 << "  K " << sc.k1;
    }
    if (sc.condition_a >= 1) out << "  conditioned on a = " << sc.condition_a;
    out << "\n";
    out << "trials " << s.trials << "  errors " << s.errors << "  error_rate " << fmt_fixed(s.error_rate, 6)
        << "  ci95 [" << fmt_fixed(s.ci.low, 6) << ", " << fmt_fixed(s.ci.high, 6) << "]\n";
    out << "mean_active " << fmt_fixed(s.mean_active, 2) << "  encode_hashes/active "
        << fmt_fixed(s.mean_encode_hashes_per_active, 2) << "  decode_hashes/user "
        << fmt_fixed(s.mean_decode_hashes_per_user, 3);
    if (mode == Mode::mt)
        out << "  candidate_ratio mean " << fmt_fixed(s.mean_candidate_ratio, 3) << " max "
            << fmt_fixed(s.max_candidate_ratio, 3);
    out << "\n";
    out << "causes: miss " << s.cause_miss << ", active_false_message " << s.cause_active_false_message
        << ", inactive_false_accept " << s.cause_inactive_false_accept << ", ambiguity " << s.cause_ambiguity
        << "\n";
    const double exact = preferred_exact_success(s);
    if (!std::isnan(exact)) {
        out << "analytic: exact_error " << fmt_fixed(1.0 - exact, 6);
        if (std::isnan(s.exact_success)) out << " (at mean active count)";
        if (!std::isnan(s.bound_success)) out << "  bound_error <= " << fmt_fixed(1.0 - s.bound_success, 6);
        if (s.feasible >= 0) out << "  feasible " << feasible_token(s.feasible);
        out << "\n";
    } else if (s.feasible >= 0) {
        out << "analytic: feasible " << feasible_token(s.feasible) << "\n";
    }
    return out.str();
}

std::string format_sweep_table(std::span<const SweepRow> rows, Mode mode) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s %8s %8s %10s %10s %10s %11s %11s %6s %8s %6s\n", "axis",
                  "value", "trials", "err_rate", "ci_low", "ci_high", "exact_err", "bound_err", "feas",
                  "cand", "miss");
    out << line;
    for (const SweepRow& r : rows) {
        const Summary& s = r.summary;
        const double exact = preferred_exact_success(s);
        std::snprintf(line, sizeof line, "%-10s %8g %8lld %10.6f %10.6f %10.6f %11s %11s %6s %8s %6lld\n",
                      r.axis.c_str(), r.value, static_cast<long long>(s.trials), s.error_rate, s.ci.low,
                      s.ci.high, fmt_fixed(std::isnan(exact) ? kNan : 1.0 - exact, 6).c_str(),
                      fmt_fixed(std::isnan(s.bound_success) ? kNan : 1.0 - s.bound_success, 6).c_str(),
                      feasible_token(s.feasible).c_str(), fmt_fixed(s.mean_candidate_ratio, 3).c_str(),
                      static_cast<long long>(s.cause_miss));
        out << line;
    }
    if (mode == Mode::mt) out << "(feas: feasibility of the scaling-law conditions for this config)\n";
    return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows, Mode) {
    std::ostringstream out;
    out << "axis,value,trials,errors,error_rate,ci95_low,ci95_high,exact_error,bound_error,feasible,"
           "mean_candidate_ratio,max_candidate_ratio,mean_encode_hashes_per_active,"
           "mean_decode_hashes_per_user,miss_count\n";
    for (const SweepRow& r : rows) {
        const Summary& s = r.summary;
        const double exact = preferred_exact_success(s);
        out << r.axis << ',' << fmt_double(r.value) << ',' << s.trials << ',' << s.errors << ','
            << fmt_double(s.error_rate) << ',' << fmt_double(s.ci.low) << ',' << fmt_double(s.ci.high) << ','
            << fmt_double(std::isnan(exact) ? kNan : 1.0 - exact) << ','
            << fmt_double(std::isnan(s.bound_success) ? kNan : 1.0 - s.bound_success) << ','
            << feasible_token(s.feasible) << ',' << fmt_double(s.mean_candidate_ratio) << ','
            << fmt_double(s.max_candidate_ratio) << ',' << fmt_double(s.mean_encode_hashes_per_active) << ','
            << fmt_double(s.mean_decode_hashes_per_user) << ',' << s.cause_miss << '\n';
    }
    return out.str();
}

namespace {

constexpr std::string_view kRecordsHeader =
    "trial_index,seed,mode,N,beta,gamma,L1,K1,L2,K2,M,a,w1,w2,candidate_list_size,encode_hashes,"
    "decode_hashes,success,error_cause,fingerprint";

}  // namespace

void persist_records(std::span<const TrialRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << kRecordsHeader << '\n';
    char fp[24];
    for (const TrialRecord& r : records) {
        std::snprintf(fp, sizeof fp, "0x%016llx", static_cast<unsigned long long>(r.fingerprint));
        out << r.trial_index << ',' << r.seed << ',' << mode_name(r.mode) << ',' << r.n << ','
            << fmt_double(r.beta) << ',' << fmt_double(r.gamma) << ',' << r.l1 << ',' << r.k1 << ',' << r.l2
            << ',' << r.k2 << ',' << r.m << ',' << r.a << ',' << r.w1 << ',' << r.w2 << ','
            << r.candidate_list_size << ',' << r.encode_hashes << ',' << r.decode_hashes << ','
            << (r.success ? 1 : 0) << ',' << error_cause_name(r.cause) << ',' << fp << '\n';
    }
    out.flush();
    if (!out.good()) throw io_error("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::int64_t parse_i64(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw io_error("bad integer '" + s + "' in " + context);
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, 0);  // accepts 0x... too
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw io_error("bad unsigned integer '" + s + "' in " + context);
    }
}

double parse_double(const std::string& s, const std::string& context) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty()) throw io_error("bad number '" + s + "' in " + context);
    return v;
}

}  // namespace

std::vector<TrialRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader)
        throw io_error("unrecognized records header in '" + path.string() + "'");
    std::vector<TrialRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string context = path.string() + ":" + std::to_string(line_no);
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 20) throw io_error("expected 20 fields in " + context);
        TrialRecord r;
        r.trial_index = parse_i64(f[0], context);
        r.seed = parse_u64(f[1], context);
        r.mode = mode_from_name(f[2]);
        r.n = parse_i64(f[3], context);
        r.beta = parse_double(f[4], context);
        r.gamma = parse_double(f[5], context);
        r.l1 = parse_i64(f[6], context);
        r.k1 = parse_i64(f[7], context);
        r.l2 = parse_i64(f[8], context);
        r.k2 = parse_i64(f[9], context);
        r.m = parse_i64(f[10], context);
        r.a = parse_i64(f[11], context);
        r.w1 = parse_i64(f[12], context);
        r.w2 = parse_i64(f[13], context);
        r.candidate_list_size = parse_i64(f[14], context);
        r.encode_hashes = parse_i64(f[15], context);
        r.decode_hashes = parse_i64(f[16], context);
        const std::int64_t success = parse_i64(f[17], context);
        if (success != 0 && success != 1) throw io_error("bad success flag in " + context);
        r.success = success == 1;
        r.cause = error_cause_from_name(f[18]);
        r.fingerprint = parse_u64(f[19], context);
        records.push_back(r);
    }
    return records;
}

void persist_summary(const Scenario& scenario, Mode mode, const Summary& summary,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << format_summary(scenario, mode, summary);
    out.flush();
    if (!out.good()) throw io_error("write failed for '" + path.string() + "'");
}

LoadedRun load_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find(" = ");
        if (eq == std::string::npos)
            throw io_error("malformed line " + std::to_string(line_no) + " in '" + path.string() + "'");
        kv.emplace(line.substr(0, eq), line.substr(eq + 3));
    }
    const auto get = [&](const std::string& key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw io_error("missing key '" + key + "' in '" + path.string() + "'");
        return it->second;
    };
    const std::string ctx = path.string();

    LoadedRun run;
    if (get("format") != "1") throw io_error("unsupported summary format in '" + path.string() + "'");
    run.mode = mode_from_name(get("mode"));
    Scenario& sc = run.scenario;
    sc.n = parse_i64(get("scenario.n"), ctx);
    sc.beta = parse_double(get("scenario.beta"), ctx);
    sc.gamma = parse_double(get("scenario.gamma"), ctx);
    sc.mult1 = parse_double(get("scenario.mult1"), ctx);
    sc.mult2 = parse_double(get("scenario.mult2"), ctx);
    sc.m_explicit = parse_i64(get("scenario.m_explicit"), ctx);
    sc.l_explicit = parse_i64(get("scenario.l_explicit"), ctx);
    sc.k_explicit = parse_i64(get("scenario.k_explicit"), ctx);
    sc.rsum_bits = parse_double(get("scenario.rsum_bits"), ctx);
    sc.condition_a = parse_i64(get("scenario.condition_a"), ctx);
    sc.master_seed = parse_u64(get("scenario.master_seed"), ctx);
    sc.derive(run.mode);
    if (sc.na != parse_i64(get("derived.na"), ctx) || sc.m != parse_i64(get("derived.m"), ctx) ||
        sc.l1 != parse_i64(get("derived.l1"), ctx) || sc.k1 != parse_i64(get("derived.k1"), ctx) ||
        sc.l2 != parse_i64(get("derived.l2"), ctx) || sc.k2 != parse_i64(get("derived.k2"), ctx))
        throw io_error("derived parameters in '" + path.string() + "' do not match their inputs");
    if (sc.fingerprint(run.mode) != parse_u64(get("fingerprint"), ctx))
        throw io_error("fingerprint mismatch in '" + path.string() + "'");

    Summary& s = run.summary;
    s.trials = parse_i64(get("run.trials"), ctx);
    s.errors = parse_i64(get("run.errors"), ctx);
    s.error_rate = parse_double(get("run.error_rate"), ctx);
    s.ci.low = parse_double(get("run.ci95_low"), ctx);
    s.ci.high = parse_double(get("run.ci95_high"), ctx);
    s.mean_active = parse_double(get("run.mean_active"), ctx);
    s.mean_candidate_ratio = parse_double(get("run.mean_candidate_ratio"), ctx);
    s.max_candidate_ratio = parse_double(get("run.max_candidate_ratio"), ctx);
    s.mean_encode_hashes_per_active = parse_double(get("run.mean_encode_hashes_per_active"), ctx);
    s.mean_decode_hashes_per_user = parse_double(get("run.mean_decode_hashes_per_user"), ctx);
    s.cause_miss = parse_i64(get("run.cause.miss"), ctx);
    s.cause_active_false_message = parse_i64(get("run.cause.active_false_message"), ctx);
    s.cause_inactive_false_accept = parse_i64(get("run.cause.inactive_false_accept"), ctx);
    s.cause_ambiguity = parse_i64(get("run.cause.ambiguity"), ctx);
    s.exact_success = parse_double(get("compare.exact_success"), ctx);
    s.exact_success_at_mean_a = parse_double(get("compare.exact_success_at_mean_a"), ctx);
    s.bound_success = parse_double(get("compare.bound_success"), ctx);
    const std::string& feas = get("compare.feasible");
    s.feasible = feas == "n/a" ? -1 : (feas == "yes" ? 1 : (feas == "no" ? 0 : throw io_error(
                                                                "bad feasible token in '" + path.string() + "'")));
    return run;
}

PersistPaths persist_run(const Scenario& scenario, Mode mode, const RunResult& result,
                         const std::filesystem::path& prefix) {
    PersistPaths paths;
    paths.records_csv = std::filesystem::path(prefix.string() + ".records.csv");
    paths.summary_txt = std::filesystem::path(prefix.string() + ".summary.txt");
    persist_records(result.records, paths.records_csv);
    persist_summary(scenario, mode, result.summary, paths.summary_txt);
    return paths;
}

}  // namespace ormac
