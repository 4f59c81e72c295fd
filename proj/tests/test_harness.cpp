#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ormac/analysis.hpp"
#include "ormac/errors.hpp"
#include "ormac/harness.hpp"
#include "ormac/hashing.hpp"
#include "ormac/sweep_config.hpp"

using namespace ormac;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("ormac_harness_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

// 3-sigma band for an observed error count against an exact probability
void check_within_3sigma(const Summary& s, double exact_error) {
    const double sigma = std::sqrt(exact_error * (1.0 - exact_error) / static_cast<double>(s.trials));
    CHECK(std::abs(s.error_rate - exact_error) <= 3.0 * sigma + 1e-15);
}

std::int64_t cause_total(const Summary& s) {
    return s.cause_miss + s.cause_active_false_message + s.cause_inactive_false_accept + s.cause_ambiguity;
}

}  // namespace

TEST_CASE("wilson interval: values and domain") {
    const WilsonInterval zero = wilson_interval(0, 10);
    CHECK(zero.low == 0.0);
    CHECK(zero.high == doctest::Approx(0.2775327998628892).epsilon(1e-14));

    const WilsonInterval all = wilson_interval(10, 10);
    CHECK(all.high == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(all.low == doctest::Approx(1.0 - 0.2775327998628892).epsilon(1e-13));

    const WilsonInterval half = wilson_interval(5, 10);
    CHECK(half.low < 0.5);
    CHECK(half.high > 0.5);
    CHECK(half.low == doctest::Approx(1.0 - half.high).epsilon(1e-13));

    // interval always brackets the point estimate and stays in [0, 1]
    for (std::int64_t t : {1, 3, 17, 1000}) {
        for (std::int64_t e = 0; e <= t; e += std::max<std::int64_t>(1, t / 7)) {
            const WilsonInterval ci = wilson_interval(e, t);
            const double rate = static_cast<double>(e) / static_cast<double>(t);
            CHECK(ci.low >= 0.0);
            CHECK(ci.high <= 1.0);
            CHECK(ci.low <= rate + 1e-15);
            CHECK(ci.high >= rate - 1e-15);
        }
    }

    CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(wilson_interval(11, 10), std::invalid_argument);
}

TEST_CASE("error cause names round-trip") {
    for (ErrorCause c : {ErrorCause::none, ErrorCause::miss, ErrorCause::active_false_message,
                         ErrorCause::inactive_false_accept, ErrorCause::ambiguity}) {
        CHECK(error_cause_from_name(error_cause_name(c)) == c);
    }
    CHECK_THROWS_AS(error_cause_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("mac run matches the exact success formula") {
    const Scenario sc = make_mac_scenario(2, 2, 8, 3, 20260816);
    const RunResult run = run_trials(sc, Mode::mac, 100000);
    const Summary& s = run.summary;

    const double exact_error = 1.0 - success_prob_exact(2, 2, 8, 3);
    CHECK(exact_error == doctest::Approx(0.325719613931142).epsilon(1e-12));
    check_within_3sigma(s, exact_error);

    CHECK(s.trials == 100000);
    CHECK(s.errors == cause_total(s));
    CHECK(s.error_rate == doctest::Approx(static_cast<double>(s.errors) / 100000.0));
    CHECK(s.ci.low <= s.error_rate);
    CHECK(s.ci.high >= s.error_rate);
    CHECK(s.cause_miss == 0);  // noiseless channel: transmitted filters are always contained
    CHECK(s.mean_active == doctest::Approx(2.0));
    CHECK(s.exact_success == doctest::Approx(success_prob_exact(2, 2, 8, 3)).epsilon(1e-14));
    CHECK(std::isnan(s.exact_success_at_mean_a));
    CHECK(std::isnan(s.bound_success));
    CHECK(s.feasible == -1);
    CHECK(s.mean_encode_hashes_per_active > 0.0);
    CHECK(s.mean_decode_hashes_per_user > 0.0);

    // record plumbing: index order, derived per-trial seeds, scenario stamp
    const std::uint64_t fp = sc.fingerprint(Mode::mac);
    for (std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{99999}}) {
        const TrialRecord& r = run.records[i];
        CHECK(r.trial_index == static_cast<std::int64_t>(i));
        CHECK(r.seed == derive_trial_seed(sc.master_seed, r.trial_index));
        CHECK(r.mode == Mode::mac);
        CHECK(r.n == 2);
        CHECK(r.m == 2);
        CHECK(r.l1 == 8);
        CHECK(r.k1 == 3);
        CHECK(r.a == 2);
        CHECK(r.fingerprint == fp);
        CHECK(r.w1 >= 1);
        CHECK(r.w1 <= 8);
    }
}

TEST_CASE("trial count edge cases and thread-count clamping") {
    const Scenario sc = make_mac_scenario(2, 2, 8, 3, 5);
    CHECK_THROWS_AS(run_trials(sc, Mode::mac, 0), std::invalid_argument);
    CHECK_THROWS_AS(run_trials(sc, Mode::mac, -7), std::invalid_argument);

    const RunResult one = run_trials(sc, Mode::mac, 1);
    CHECK(one.records.size() == 1);
    CHECK(one.summary.trials == 1);

    const RunResult base = run_trials(sc, Mode::mac, 500, 1);
    CHECK(run_trials(sc, Mode::mac, 500, 0).records == base.records);
    CHECK(run_trials(sc, Mode::mac, 500, 1000).records == base.records);
}

TEST_CASE("runs are deterministic and schedule-independent") {
    const Scenario sc = make_mac_scenario(3, 2, 12, 3, 99);
    const RunResult a = run_trials(sc, Mode::mac, 20000, 1);
    const RunResult b = run_trials(sc, Mode::mac, 20000, 1);
    CHECK(a.records == b.records);

    const RunResult threaded = run_trials(sc, Mode::mac, 20000, 3);
    CHECK(threaded.records == a.records);
    CHECK(format_summary(sc, Mode::mac, threaded.summary) == format_summary(sc, Mode::mac, a.summary));

    // a different master seed yields different trials
    Scenario other = sc;
    other.master_seed = 100;
    other.derive(Mode::mac);
    CHECK(run_trials(other, Mode::mac, 20000).records != a.records);
}

TEST_CASE("rate-driven mac run matches the competing-codeword formula") {
    const Scenario sc = make_mac_rate_scenario(2, 0.6, std::numbers::ln2, 60, 31);
    CHECK(sc.k1 == 21);
    CHECK(sc.log2m == doctest::Approx(18.0));
    CHECK(sc.m == 0);  // unenumerable message set: log2m carries the size

    const double competing = 2.0 * (std::exp2(18.0) - 1.0);
    const double exact_error = 1.0 - success_prob_competing(2, competing, 60, 21);
    CHECK(exact_error > 0.05);
    CHECK(exact_error < 0.95);

    const RunResult run = run_trials(sc, Mode::mac, 20000);
    check_within_3sigma(run.summary, exact_error);
    CHECK(run.summary.exact_success ==
          doctest::Approx(success_prob_competing(2, competing, 60, 21)).epsilon(1e-12));
    CHECK(run.summary.cause_miss == 0);
    CHECK(run.summary.cause_ambiguity == 0);
    CHECK(run.summary.cause_active_false_message == run.summary.errors);
}

TEST_CASE("rate-driven mac run beyond double-range message sets") {
    const Scenario sc = make_mac_rate_scenario(2, 0.67, std::numbers::ln2, 159, 77);
    CHECK(sc.k1 == 55);
    CHECK(sc.log2m > 50.0);  // forces the log2-domain path

    const double log2_competing = std::log2(2.0) + sc.log2m;
    const double exact_error = 1.0 - success_prob_competing_log2(2, log2_competing, 159, 55);
    CHECK(exact_error > 0.05);
    CHECK(exact_error < 0.95);

    const RunResult run = run_trials(sc, Mode::mac, 20000);
    check_within_3sigma(run.summary, exact_error);
    CHECK(run.summary.exact_success ==
          doctest::Approx(success_prob_competing_log2(2, log2_competing, 159, 55)).epsilon(1e-12));
}

TEST_CASE("conditioned activity-recognition run matches the exact formula") {
    Scenario sc = make_ar_scenario(200, 0.5, 1.6, 11);
    REQUIRE(sc.na == 14);
    sc.condition_a = 14;

    const double exact_success = ar_success_exact(200, 14, sc.l1, sc.k1);
    const double exact_error = 1.0 - exact_success;
    CHECK(exact_error > 0.05);
    CHECK(exact_error < 0.95);

    const RunResult run = run_trials(sc, Mode::ar, 20000);
    const Summary& s = run.summary;
    check_within_3sigma(s, exact_error);
    CHECK(s.mean_active == doctest::Approx(14.0));
    CHECK(s.cause_miss == 0);  // active signatures are always contained
    CHECK(s.cause_inactive_false_accept == s.errors);
    CHECK(s.exact_success == doctest::Approx(exact_success).epsilon(1e-12));
    CHECK(s.exact_success_at_mean_a == doctest::Approx(exact_success).epsilon(1e-12));
    CHECK(s.bound_success <= s.exact_success_at_mean_a + 1e-12);
    CHECK(s.feasible == -1);
}

TEST_CASE("unconditioned activity-recognition run anchors analytics at the mean active count") {
    const Scenario sc = make_ar_scenario(200, 0.5, 1.6, 12);
    const RunResult run = run_trials(sc, Mode::ar, 4000);
    const Summary& s = run.summary;

    CHECK(std::isnan(s.exact_success));  // random active count: no single exact value
    const std::int64_t anchor = std::llround(s.mean_active);
    CHECK(s.exact_success_at_mean_a ==
          doctest::Approx(ar_success_exact(200, anchor, sc.l1, sc.k1)).epsilon(1e-12));
    CHECK(s.bound_success >= 0.0);
    CHECK(s.bound_success <= 1.0);
    CHECK(s.cause_miss == 0);
    CHECK(s.errors == cause_total(s));
    // i.i.d. activity with mean na = 14: the run mean stays within 5 sigma
    const double sd = std::sqrt(14.0 * (1.0 - 14.0 / 200.0) / 4000.0);
    CHECK(std::abs(s.mean_active - 14.0) < 5.0 * sd);
}

TEST_CASE("conditioned two-phase run matches the exact formula") {
    Scenario sc = make_mt_scenario(16, 0.5, 0.5, 0.6, 0.9, 7);
    REQUIRE(sc.na == 4);
    REQUIRE(sc.m == 4);
    sc.condition_a = 2;

    const double exact_success = two_phase_success_exact(2, 16, 4, sc.l1, sc.k1, sc.l2, sc.k2);
    const double exact_error = 1.0 - exact_success;
    CHECK(exact_error > 0.05);
    CHECK(exact_error < 0.95);

    const RunResult run = run_trials(sc, Mode::mt, 20000);
    const Summary& s = run.summary;
    check_within_3sigma(s, exact_error);
    CHECK(s.mean_active == doctest::Approx(2.0));
    CHECK(s.cause_miss == 0);
    CHECK(s.errors == cause_total(s));
    CHECK(s.exact_success == doctest::Approx(exact_success).epsilon(1e-12));
    CHECK(s.feasible == (feasibility_mt(0.6, 0.9, 0.5, 0.5) ? 1 : 0));
    // candidate-list accounting only exists in two-phase mode
    CHECK(s.mean_candidate_ratio >= 1.0);
    CHECK(s.max_candidate_ratio >= s.mean_candidate_ratio);
}

TEST_CASE("mac enumeration guard rejects oversized codebooks") {
    const Scenario sc = make_mac_scenario(1000, 100000, 1000000, 5, 1);
    CHECK_THROWS_AS(run_trials(sc, Mode::mac, 10), resource_limit_error);
}

TEST_CASE("wilson confidence intervals achieve nominal coverage") {
    const double true_error = 1.0 - success_prob_exact(2, 2, 8, 3);
    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const Scenario sc = make_mac_scenario(2, 2, 8, 3, seed);
        const Summary s = run_trials(sc, Mode::mac, 300).summary;
        if (s.ci.low <= true_error && true_error <= s.ci.high) ++covered;
    }
    CHECK(covered >= 180);  // 95% nominal; 180/200 is > 3 sigma below
}

TEST_CASE("sweep varies one axis over a shared seed") {
    const Scenario base = make_mac_scenario(2, 2, 8, 3, 424242);
    const std::vector<double> values{2, 3, 4};
    const std::vector<SweepRow> rows = run_sweep(base, Mode::mac, "n", values, 2000);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].axis == "n");
        CHECK(rows[i].value == values[i]);
        CHECK(rows[i].scenario.n == static_cast<std::int64_t>(values[i]));
        CHECK(rows[i].scenario.master_seed == base.master_seed);  // common random numbers
        CHECK(rows[i].summary.trials == 2000);
        CHECK(rows[i].summary.exact_success ==
              doctest::Approx(success_prob_exact(rows[i].scenario.n, 2, 8, 3)).epsilon(1e-12));
    }
    // more users on a fixed array: strictly harder
    CHECK(rows[0].summary.exact_success > rows[1].summary.exact_success);
    CHECK(rows[1].summary.exact_success > rows[2].summary.exact_success);

    const std::vector<double> lengths{8, 16};
    const std::vector<SweepRow> by_l = run_sweep(base, Mode::mac, "l", lengths, 500);
    CHECK(by_l[0].scenario.l1 == 8);
    CHECK(by_l[1].scenario.l1 == 16);

    // axis names are validated before any point runs, even with no values
    CHECK_THROWS_AS(run_sweep(base, Mode::mac, "bogus", {}, 100), std::invalid_argument);
    const std::vector<SweepRow> empty = run_sweep(base, Mode::mac, "n", {}, 100);
    CHECK(empty.empty());

    const Scenario ar_base = make_ar_scenario(1000, 0.5, 1.6, 1);
    const std::vector<double> ar_lengths{100, 200};
    try {
        run_sweep(ar_base, Mode::ar, "l", ar_lengths, 10);
        FAIL("expected invalid_argument for axis 'l' outside mac mode");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("mac") != std::string::npos);
    }
}

TEST_CASE("sweep table and csv carry one line per point") {
    const Scenario base = make_mac_scenario(2, 2, 8, 3, 9);
    const std::vector<double> lengths{8, 12, 16};
    const std::vector<SweepRow> rows = run_sweep(base, Mode::mac, "l", lengths, 400);

    const std::string csv = sweep_csv(rows, Mode::mac);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "axis,value,trials,errors,error_rate,ci95_low,ci95_high,exact_error,bound_error,"
          "feasible,mean_candidate_ratio,max_candidate_ratio,mean_encode_hashes_per_active,"
          "mean_decode_hashes_per_user,miss_count");
    int data_lines = 0;
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) ++data_lines;
    CHECK(data_lines == 3);

    const std::string table = format_sweep_table(rows, Mode::mac);
    CHECK(table.find("l") != std::string::npos);
    CHECK(table.find("err_rate") != std::string::npos);
}

TEST_CASE("trial records round-trip through csv") {
    const fs::path dir = fresh_dir("records");
    const Scenario sc = make_mt_scenario(16, 0.5, 0.5, 0.6, 0.9, 3);
    const RunResult run = run_trials(sc, Mode::mt, 400);

    const fs::path path = dir / "trials.csv";
    persist_records(run.records, path);

    const std::string text = read_file(path);
    std::istringstream lines(text);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "trial_index,seed,mode,N,beta,gamma,L1,K1,L2,K2,M,a,w1,w2,candidate_list_size,"
          "encode_hashes,decode_hashes,success,error_cause,fingerprint");

    const std::vector<TrialRecord> loaded = load_records(path);
    CHECK(loaded == run.records);

    // a second write of the same records is byte-identical
    const fs::path again = dir / "trials2.csv";
    persist_records(run.records, again);
    CHECK(read_file(again) == text);

    CHECK_THROWS_AS(load_records(dir / "absent.csv"), io_error);
    write_file(dir / "bad_header.csv", "alpha,beta\n1,2\n");
    CHECK_THROWS_AS(load_records(dir / "bad_header.csv"), io_error);
    write_file(dir / "bad_row.csv", header + "\n1,2,3\n");
    CHECK_THROWS_AS(load_records(dir / "bad_row.csv"), io_error);

    fs::remove_all(dir);
}

TEST_CASE("summaries round-trip through structured text") {
    const fs::path dir = fresh_dir("summary");
    Scenario sc = make_ar_scenario(200, 0.5, 1.6, 21);
    sc.condition_a = 14;
    const RunResult run = run_trials(sc, Mode::ar, 500);

    const std::string text = format_summary(sc, Mode::ar, run.summary);
    CHECK(text.find("mode = ar") != std::string::npos);
    CHECK(text.find("run.trials = 500") != std::string::npos);
    CHECK(text.find("fingerprint = 0x") != std::string::npos);

    const fs::path path = dir / "run.summary.txt";
    persist_summary(sc, Mode::ar, run.summary, path);
    CHECK(read_file(path) == text);

    const LoadedRun loaded = load_summary(path);
    CHECK(loaded.mode == Mode::ar);
    CHECK(loaded.scenario.n == 200);
    CHECK(loaded.scenario.condition_a == 14);
    CHECK(loaded.scenario.l1 == sc.l1);
    CHECK(format_summary(loaded.scenario, loaded.mode, loaded.summary) == text);

    // tampering with a derived field or the fingerprint is caught on load
    const std::string l1_str = "derived.l1 = " + std::to_string(sc.l1);
    std::string tampered = text;
    tampered.replace(tampered.find(l1_str), l1_str.size(),
                     "derived.l1 = " + std::to_string(sc.l1 + 1));
    write_file(dir / "tampered_l1.txt", tampered);
    CHECK_THROWS_AS(load_summary(dir / "tampered_l1.txt"), io_error);

    std::string refp = text;
    const std::size_t fpos = refp.find("fingerprint = 0x");
    REQUIRE(fpos != std::string::npos);
    const std::size_t digit = fpos + std::string("fingerprint = 0x").size();
    refp[digit] = refp[digit] == 'f' ? '0' : 'f';
    write_file(dir / "tampered_fp.txt", refp);
    CHECK_THROWS_AS(load_summary(dir / "tampered_fp.txt"), io_error);

    CHECK_THROWS_AS(load_summary(dir / "absent.txt"), io_error);

    fs::remove_all(dir);
}

TEST_CASE("persist_run writes the record and summary pair") {
    const fs::path dir = fresh_dir("pair");
    const Scenario sc = make_mac_scenario(2, 2, 8, 3, 8);
    const RunResult run = run_trials(sc, Mode::mac, 50);
    const PersistPaths paths = persist_run(sc, Mode::mac, run, dir / "demo");
    CHECK(paths.records_csv == dir / "demo.records.csv");
    CHECK(paths.summary_txt == dir / "demo.summary.txt");
    CHECK(fs::exists(paths.records_csv));
    CHECK(fs::exists(paths.summary_txt));
    CHECK(load_records(paths.records_csv) == run.records);
    CHECK(load_summary(paths.summary_txt).scenario.fingerprint(Mode::mac) == sc.fingerprint(Mode::mac));
    fs::remove_all(dir);
}

TEST_CASE("sweep config parsing") {
    const std::string text =
        "# demo sweep\n"
        "mode = ar\n"
        "trials = 500\n"
        "seed = 0x2a\n"
        "threads = 3\n"
        "n = 1000\n"
        "beta = 0.5\n"
        "omega_a = 1.6\n"
        "\n"
        "[sweep]\n"
        "axis = n\n"
        "values = 1000, 10000\n"
        "trials = 100\n"
        "\n"
        "[sweep]\n"
        "axis = omega_a\n"
        "values = 1.2,1.6\n";
    const SweepConfig cfg = parse_sweep_config(text);
    CHECK(cfg.mode == Mode::ar);
    CHECK(cfg.mode_set);
    CHECK(cfg.trials == 500);
    CHECK(cfg.trials_set);
    CHECK(cfg.seed == 42);
    CHECK(cfg.seed_set);
    CHECK(cfg.threads == 3);
    CHECK(cfg.base.n == 1000);
    CHECK(cfg.base.beta == doctest::Approx(0.5));
    CHECK(cfg.base.mult1 == doctest::Approx(1.6));
    REQUIRE(cfg.sections.size() == 2);
    CHECK(cfg.sections[0].axis == "n");
    CHECK(cfg.sections[0].values == std::vector<double>{1000, 10000});
    CHECK(cfg.sections[0].trials == 100);
    CHECK(cfg.sections[1].axis == "omega_a");
    CHECK(cfg.sections[1].trials == -1);  // inherits the file-level count

    auto line_of = [](const std::string& bad) -> std::string {
        try {
            parse_sweep_config(bad);
        } catch (const std::invalid_argument& e) {
            return e.what();
        }
        return {};
    };
    CHECK(line_of("bogus = 1\n").find("config line 1") != std::string::npos);
    CHECK(line_of("mode = mac\ntrials = 0\n").find("config line 2") != std::string::npos);
    CHECK(line_of("[sweep]\nvalues = 1,2\n").find("axis") != std::string::npos);
    CHECK(line_of("[sweep]\naxis = n\n").find("values") != std::string::npos);
    CHECK(line_of("[sweep]\naxis = n\nvalues = 1,x\n").find("config line 3") != std::string::npos);
    CHECK(line_of("axis = n\n") != "");  // section keys are invalid at file level

    CHECK_THROWS_AS(load_sweep_config("/nonexistent/ormac/sweep.cfg"), io_error);

    const fs::path dir = fresh_dir("config");
    write_file(dir / "sweep.cfg", text);
    const SweepConfig from_file = load_sweep_config(dir / "sweep.cfg");
    CHECK(from_file.sections.size() == 2);
    CHECK(from_file.base.n == 1000);
    fs::remove_all(dir);
}

TEST_CASE("summary text for every mode parses back losslessly") {
    const fs::path dir = fresh_dir("all_modes");

    const Scenario mac = make_mac_rate_scenario(4, 0.6, std::numbers::ln2, 400, 5);
    const Scenario ar = make_ar_scenario(1000, 0.5, 1.6, 5);
    const Scenario mt = make_mt_scenario(16, 0.5, 0.5, 0.6, 0.9, 5);
    const std::vector<std::pair<Scenario, Mode>> cases{
        {mac, Mode::mac}, {ar, Mode::ar}, {mt, Mode::mt}};
    for (const auto& [sc, mode] : cases) {
        const RunResult run = run_trials(sc, mode, 200);
        const fs::path path = dir / (std::string(mode_name(mode)) + ".txt");
        persist_summary(sc, mode, run.summary, path);
        const LoadedRun loaded = load_summary(path);
        CHECK(format_summary(loaded.scenario, loaded.mode, loaded.summary) ==
              format_summary(sc, mode, run.summary));
    }
    fs::remove_all(dir);
}
