// ormac: Bloom-filter coding over the Boolean OR multi-access channel.
// Subcommands cover analytic bounds, filter weight distributions, entropy
// calculations, Monte Carlo simulation, and parameter sweeps.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ormac/analysis.hpp"
#include "ormac/errors.hpp"
#include "ormac/harness.hpp"
#include "ormac/schemes.hpp"
#include "ormac/sweep_config.hpp"
#include "ormac/weight_dist.hpp"

namespace fs = std::filesystem;
using namespace ormac;

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

fs::path resolve_out_dir(const std::string& flag_value) {
    fs::path dir;
    if (!flag_value.empty()) {
        dir = flag_value;
    } else if (const char* env = std::getenv("ORMAC_OUT_DIR"); env && *env) {
        dir = env;
    } else {
        dir = ".";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw io_error("output directory '" + dir.string() + "' cannot be created");
    return dir;
}

struct BoundsArgs {
    double beta = 0, gamma = 0, kappa1 = 0, kappa2 = 0, kappa = 0, eps = 0;
    bool nats = false;
    CLI::App* cmd = nullptr;
};

int run_bounds(const BoundsArgs& a) {
    bool printed = false;
    if (a.cmd->count("--beta") && !a.cmd->count("--gamma")) {
        const CostBounds cb = cost_bounds_ar(a.beta);
        std::cout << "ar_cost_lower = " << g17(cb.lower) << "\n";
        std::cout << "ar_cost_upper = " << g17(cb.upper) << "\n";
        printed = true;
    }
    if (a.cmd->count("--beta") && a.cmd->count("--gamma")) {
        const CostBounds cb = cost_bounds_mt(a.beta, a.gamma);
        std::cout << "mt_cost_lower = " << g17(cb.lower) << "\n";
        std::cout << "mt_cost_upper = " << g17(cb.upper) << "\n";
        printed = true;
    }
    if (a.cmd->count("--kappa1") && a.cmd->count("--kappa2")) {
        const RatePoint p = rate_region_point(a.kappa1, a.kappa2);
        std::cout << "rate_r1 = " << g17(p.r1) << "\n";
        std::cout << "rate_r2 = " << g17(p.r2) << "\n";
        std::cout << "rate_sum = " << g17(p.sum) << "\n";
        std::cout << "inside_capacity = " << (capacity_membership(p) ? "yes" : "no") << "\n";
        if (a.cmd->count("--beta") && a.cmd->count("--gamma")) {
            const bool feasible = feasibility_mt(a.kappa1, a.kappa2, a.beta, a.gamma);
            std::cout << "feasible = " << (feasible ? "yes" : "no") << "\n";
        }
        printed = true;
    }
    if (a.cmd->count("--kappa")) {
        const double t = a.nats ? sumrate_threshold_nats(a.kappa, a.eps)
                                : sumrate_threshold_bits(a.kappa, a.eps);
        std::cout << "sumrate_threshold_" << (a.nats ? "nats" : "bits") << " = " << g17(t) << "\n";
        printed = true;
    }
    if (!printed)
        throw std::invalid_argument(
            "bounds: give --beta [--gamma], --kappa1 --kappa2, and/or --kappa (see --help)");
    return 0;
}

struct WeightDistArgs {
    std::int64_t l = 0, k = 0;
    double eps = 0;
    std::string out_file;
    std::string out_dir_flag;
    CLI::App* cmd = nullptr;
};

int run_weight_dist(const WeightDistArgs& a) {
    const WeightPmf pmf = WeightPmf::exact(a.l, a.k);
    std::cout << "support = [" << pmf.min_weight() << ", " << pmf.max_weight() << "]\n";
    std::cout << "mean_weight = " << g17(pmf.mean()) << "\n";
    std::cout << "entropy_bits = " << g17(pmf.entropy_bits()) << "\n";
    if (a.cmd->count("--eps")) {
        const OccupancyBound ob = occupancy_bound(a.l, a.k, a.eps);
        std::cout << "occupancy_deviation_bound = " << g17(ob.clamped) << "\n";
        std::cout << "expected_zero_fraction = " << g17(ob.expected_zero_fraction) << "\n";
    }
    const fs::path dir = resolve_out_dir(a.out_dir_flag);
    std::string name = a.out_file;
    if (name.empty())
        name = "weight_dist_L" + std::to_string(a.l) + "_K" + std::to_string(a.k) + ".csv";
    const fs::path out = dir / name;
    std::ofstream f(out);
    if (!f) throw io_error("cannot open '" + out.string() + "' for writing");
    pmf.write_csv(f);
    f.flush();
    if (!f.good()) throw io_error("write failed for '" + out.string() + "'");
    std::cout << "csv = " << out.string() << "\n";
    return 0;
}

struct EntropyArgs {
    std::int64_t l = 0, k = 0, k1 = 0, k2 = 0;
    double kappa = 0, kappa1 = 0, kappa2 = 0;
    CLI::App* cmd = nullptr;
};

int run_entropy(const EntropyArgs& a) {
    bool printed = false;
    if (a.cmd->count("--l") && a.cmd->count("--k")) {
        const double h = exact_entropy(a.l, a.k);
        std::cout << "entropy_bits = " << g17(h) << "\n";
        std::cout << "entropy_per_cell = " << g17(h / static_cast<double>(a.l)) << "\n";
        std::cout << "limit_per_cell = "
                  << g17(entropy_limit(static_cast<double>(a.k) / static_cast<double>(a.l))) << "\n";
        printed = true;
    }
    if (a.cmd->count("--l") && a.cmd->count("--k1") && a.cmd->count("--k2")) {
        const double h = exact_conditional_entropy(a.l, a.k1, a.k2);
        std::cout << "conditional_entropy_bits = " << g17(h) << "\n";
        std::cout << "conditional_entropy_per_cell = " << g17(h / static_cast<double>(a.l)) << "\n";
        std::cout << "conditional_limit_per_cell = "
                  << g17(conditional_entropy_limit(static_cast<double>(a.k1) / static_cast<double>(a.l),
                                                   static_cast<double>(a.k2) / static_cast<double>(a.l)))
                  << "\n";
        printed = true;
    }
    if (a.cmd->count("--kappa")) {
        std::cout << "limit_per_cell = " << g17(entropy_limit(a.kappa)) << "\n";
        printed = true;
    }
    if (a.cmd->count("--kappa1") && a.cmd->count("--kappa2")) {
        std::cout << "conditional_limit_per_cell = " << g17(conditional_entropy_limit(a.kappa1, a.kappa2))
                  << "\n";
        printed = true;
    }
    if (!printed)
        throw std::invalid_argument(
            "entropy: give --l with --k or --k1/--k2, or asymptotic --kappa / --kappa1 --kappa2");
    return 0;
}

struct SimulateArgs {
    std::string mode_str;
    std::int64_t n = 0, m = 0, l = 0, k = 0, trials = 0, condition_a = -1;
    double kappa = 0, rsum = 0, beta = 0, gamma = 0, omega_a = 0, kappa1 = 0, kappa2 = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_prefix;
    std::string out_dir_flag;
    CLI::App* cmd = nullptr;
};

Scenario scenario_from_args(const SimulateArgs& a, Mode mode, std::uint64_t seed) {
    Scenario sc;
    sc.master_seed = seed;
    sc.condition_a = a.condition_a;
    switch (mode) {
        case Mode::mac:
            sc.n = a.n;
            sc.l_explicit = a.l;
            if (a.cmd->count("--k")) sc.k_explicit = a.k;
            if (a.cmd->count("--kappa")) sc.mult1 = a.kappa;
            if (a.cmd->count("--rsum"))
                sc.rsum_bits = a.rsum;
            else
                sc.m_explicit = a.m;
            break;
        case Mode::ar:
            sc.n = a.n;
            sc.beta = a.beta;
            sc.mult1 = a.omega_a;
            break;
        case Mode::mt:
            sc.n = a.n;
            sc.beta = a.beta;
            sc.gamma = a.gamma;
            sc.mult1 = a.kappa1;
            sc.mult2 = a.kappa2;
            break;
    }
    sc.derive(mode);
    sc.validate(mode);
    return sc;
}

int run_simulate(const SimulateArgs& a) {
    const Mode mode = mode_from_name(a.mode_str);
    const std::uint64_t seed = a.cmd->count("--seed") ? a.seed : fresh_seed();
    std::cout << "seed = " << seed << "\n";

    const Scenario sc = scenario_from_args(a, mode, seed);
    const RunResult result = run_trials(sc, mode, a.trials, a.threads);
    std::cout << format_summary_human(sc, mode, result.summary);

    if (!a.out_prefix.empty()) {
        const fs::path dir = resolve_out_dir(a.out_dir_flag);
        const PersistPaths paths = persist_run(sc, mode, result, dir / a.out_prefix);
        std::cout << "records = " << paths.records_csv.string() << "\n";
        std::cout << "summary = " << paths.summary_txt.string() << "\n";
    }
    return 0;
}

struct SweepArgs {
    std::string config_path;
    std::string mode_str;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_prefix = "sweep";
    std::string out_dir_flag;
    CLI::App* cmd = nullptr;
};

int run_sweep_cmd(const SweepArgs& a) {
    SweepConfig cfg = load_sweep_config(a.config_path);
    if (a.cmd->count("--mode")) {
        cfg.mode = mode_from_name(a.mode_str);
        cfg.mode_set = true;
    }
    if (!cfg.mode_set) throw std::invalid_argument("sweep: mode not set in config or via --mode");
    if (a.cmd->count("--trials")) {
        if (a.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
        cfg.trials = a.trials;
        cfg.trials_set = true;
    }
    if (a.cmd->count("--seed")) {
        cfg.seed = a.seed;
        cfg.seed_set = true;
    }
    if (a.cmd->count("--threads")) cfg.threads = a.threads;
    if (!cfg.seed_set) cfg.seed = fresh_seed();
    std::cout << "seed = " << cfg.seed << "\n";
    if (cfg.sections.empty()) throw std::invalid_argument("sweep: config has no [sweep] section");

    cfg.base.master_seed = cfg.seed;

    // Run everything first, then write; a failure partway leaves no files.
    struct SectionOutput {
        std::string axis;
        std::string table;
        std::string csv;
    };
    std::vector<SectionOutput> outputs;
    for (const SweepSection& section : cfg.sections) {
        const std::int64_t trials = section.trials > 0 ? section.trials : cfg.trials;
        const std::vector<SweepRow> rows =
            run_sweep(cfg.base, cfg.mode, section.axis, section.values, trials, cfg.threads);
        SectionOutput out;
        out.axis = section.axis;
        out.table = format_sweep_table(rows, cfg.mode);
        out.csv = sweep_csv(rows, cfg.mode);
        outputs.push_back(std::move(out));
    }

    const fs::path dir = resolve_out_dir(a.out_dir_flag);
    std::vector<std::string> used_names;
    for (const SectionOutput& out : outputs) {
        std::string name = a.out_prefix + "_" + out.axis;
        int suffix = 1;
        while (std::find(used_names.begin(), used_names.end(), name) != used_names.end())
            name = a.out_prefix + "_" + out.axis + "_" + std::to_string(++suffix);
        used_names.push_back(name);
        const fs::path csv_path = dir / (name + ".csv");
        std::ofstream f(csv_path);
        if (!f) throw io_error("cannot open '" + csv_path.string() + "' for writing");
        f << out.csv;
        f.flush();
        if (!f.good()) throw io_error("write failed for '" + csv_path.string() + "'");
        std::cout << "\nsweep axis " << out.axis << "\n" << out.table;
        std::cout << "csv = " << csv_path.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bloom-filter coding over the Boolean OR multi-access channel"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir_flag;
    app.add_option("--out-dir", out_dir_flag,
                   "Directory for output files (default: $ORMAC_OUT_DIR, else current directory)");

    BoundsArgs bounds;
    bounds.cmd = app.add_subcommand("bounds", "Analytic cost bounds, rate points, and thresholds");
    bounds.cmd->add_option("--beta", bounds.beta, "Activity exponent in (0,1)");
    bounds.cmd->add_option("--gamma", bounds.gamma, "Payload exponent >= 0");
    bounds.cmd->add_option("--kappa1", bounds.kappa1, "Hash density of phase/user 1 (K1/L1)");
    bounds.cmd->add_option("--kappa2", bounds.kappa2, "Hash density of phase/user 2 (K2/L2)");
    bounds.cmd->add_option("--kappa", bounds.kappa, "Hash density for the sum-rate threshold");
    bounds.cmd->add_option("--eps", bounds.eps, "Occupancy slack for the threshold")
        ->check(CLI::NonNegativeNumber);
    bounds.cmd->add_flag("--nats", bounds.nats, "Report the threshold in nats instead of bits");

    WeightDistArgs wd;
    wd.cmd = app.add_subcommand("weight-dist", "Exact Bloom filter weight distribution -> CSV");
    wd.cmd->add_option("--l", wd.l, "Filter length L")->required();
    wd.cmd->add_option("--k", wd.k, "Total hash insertions K")->required();
    wd.cmd->add_option("--eps", wd.eps, "Also report the occupancy deviation bound at this eps");
    wd.cmd->add_option("--out", wd.out_file, "CSV file name (default weight_dist_L<L>_K<K>.csv)");

    EntropyArgs ent;
    ent.cmd = app.add_subcommand("entropy", "Exact and asymptotic filter entropies");
    ent.cmd->add_option("--l", ent.l, "Filter length L");
    ent.cmd->add_option("--k", ent.k, "Total hash insertions K");
    ent.cmd->add_option("--k1", ent.k1, "Insertions in the conditioning filter");
    ent.cmd->add_option("--k2", ent.k2, "Insertions in the measured filter");
    ent.cmd->add_option("--kappa", ent.kappa, "Asymptotic density K/L");
    ent.cmd->add_option("--kappa1", ent.kappa1, "Asymptotic density of the conditioning filter");
    ent.cmd->add_option("--kappa2", ent.kappa2, "Asymptotic density of the measured filter");

    SimulateArgs sim;
    sim.cmd = app.add_subcommand("simulate", "Monte Carlo run of one scenario");
    sim.cmd->add_option("--mode", sim.mode_str, "mac | ar | mt")->required();
    sim.cmd->add_option("--n", sim.n, "Number of users N")->required();
    sim.cmd->add_option("--m", sim.m, "Messages per user (mac)");
    sim.cmd->add_option("--l", sim.l, "Filter length L (mac)");
    sim.cmd->add_option("--k", sim.k, "Hashes per message (mac; default round(kappa L / N))");
    sim.cmd->add_option("--kappa", sim.kappa, "Aggregate hash density (mac)");
    sim.cmd->add_option("--rsum", sim.rsum, "Target sum rate in bits per channel use (mac)")
        ->excludes("--m");
    sim.cmd->add_option("--beta", sim.beta, "Activity exponent (ar, mt)");
    sim.cmd->add_option("--omega-a", sim.omega_a, "Length multiplier Omega_a (ar)");
    sim.cmd->add_option("--gamma", sim.gamma, "Payload exponent (mt)");
    sim.cmd->add_option("--kappa1", sim.kappa1, "Signature filter density multiplier (mt)");
    sim.cmd->add_option("--kappa2", sim.kappa2, "Message filter density multiplier (mt)");
    sim.cmd->add_option("--trials", sim.trials, "Monte Carlo trials")
        ->required()
        ->check(CLI::PositiveNumber);
    sim.cmd->add_option("--seed", sim.seed, "Master seed (omit for a fresh one; it is printed)");
    sim.cmd->add_option("--threads", sim.threads, "Worker threads")->check(CLI::Range(1, 64));
    sim.cmd->add_option("--condition-a", sim.condition_a, "Condition on exactly this many active users");
    sim.cmd->add_option("--out-prefix", sim.out_prefix, "Write <prefix>.records.csv and <prefix>.summary.txt");

    SweepArgs sw;
    sw.cmd = app.add_subcommand("sweep", "Run the sweeps described by a config file");
    sw.cmd->add_option("--config", sw.config_path, "Config file (key = value plus [sweep] sections)")
        ->required();
    sw.cmd->add_option("--mode", sw.mode_str, "Override the config mode");
    sw.cmd->add_option("--trials", sw.trials, "Override the config trial count");
    sw.cmd->add_option("--seed", sw.seed, "Override the config seed");
    sw.cmd->add_option("--threads", sw.threads, "Override the config thread count")
        ->check(CLI::Range(1, 64));
    sw.cmd->add_option("--out-prefix", sw.out_prefix, "CSV name prefix (default 'sweep')");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    wd.out_dir_flag = out_dir_flag;
    sim.out_dir_flag = out_dir_flag;
    sw.out_dir_flag = out_dir_flag;

    try {
        if (bounds.cmd->parsed()) return run_bounds(bounds);
        if (wd.cmd->parsed()) return run_weight_dist(wd);
        if (ent.cmd->parsed()) return run_entropy(ent);
        if (sim.cmd->parsed()) return run_simulate(sim);
        if (sw.cmd->parsed()) return run_sweep_cmd(sw);
    } catch (const resource_limit_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
