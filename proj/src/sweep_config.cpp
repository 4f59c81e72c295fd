#include "ormac/sweep_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ormac/errors.hpp"

namespace ormac {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + what);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) fail(line_no, "expected a number, got '" + s + "'");
    return v;
}

std::int64_t parse_integer(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(line_no, "expected an integer, got '" + s + "'");
    }
}

std::uint64_t parse_seed(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(line_no, "expected an unsigned integer seed, got '" + s + "'");
    }
}

std::vector<double> parse_value_list(const std::string& s, std::size_t line_no) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item =
            trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
        if (item.empty()) fail(line_no, "empty entry in values list");
        values.push_back(parse_number(item, line_no));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (values.empty()) fail(line_no, "values list is empty");
    return values;
}

void apply_base_key(SweepConfig& cfg, const std::string& key, const std::string& value,
                    std::size_t line_no) {
    Scenario& sc = cfg.base;
    if (key == "mode") {
        try {
            cfg.mode = mode_from_name(value);
        } catch (const std::invalid_argument& e) {
            fail(line_no, e.what());
        }
        cfg.mode_set = true;
    } else if (key == "trials") {
        cfg.trials = parse_integer(value, line_no);
        if (cfg.trials < 1) fail(line_no, "trials must be >= 1");
        cfg.trials_set = true;
    } else if (key == "seed") {
        cfg.seed = parse_seed(value, line_no);
        cfg.seed_set = true;
    } else if (key == "threads") {
        const std::int64_t t = parse_integer(value, line_no);
        if (t < 1 || t > 64) fail(line_no, "threads must be in [1, 64]");
        cfg.threads = static_cast<int>(t);
    } else if (key == "n") {
        sc.n = parse_integer(value, line_no);
    } else if (key == "beta") {
        sc.beta = parse_number(value, line_no);
    } else if (key == "gamma") {
        sc.gamma = parse_number(value, line_no);
    } else if (key == "kappa" || key == "kappa1" || key == "omega_a") {
        sc.mult1 = parse_number(value, line_no);
    } else if (key == "kappa2") {
        sc.mult2 = parse_number(value, line_no);
    } else if (key == "m") {
        sc.m_explicit = parse_integer(value, line_no);
    } else if (key == "l") {
        sc.l_explicit = parse_integer(value, line_no);
    } else if (key == "k") {
        sc.k_explicit = parse_integer(value, line_no);
    } else if (key == "rsum_bits") {
        sc.rsum_bits = parse_number(value, line_no);
    } else if (key == "condition_a") {
        sc.condition_a = parse_integer(value, line_no);
    } else {
        fail(line_no, "unknown key '" + key + "'");
    }
}

void apply_section_key(SweepSection& section, const std::string& key, const std::string& value,
                       std::size_t line_no) {
    if (key == "axis") {
        if (value.empty()) fail(line_no, "axis name is empty");
        section.axis = value;
    } else if (key == "values") {
        section.values = parse_value_list(value, line_no);
    } else if (key == "trials") {
        section.trials = parse_integer(value, line_no);
        if (section.trials < 1) fail(line_no, "trials must be >= 1");
    } else {
        fail(line_no, "unknown key '" + key + "' in [sweep] section");
    }
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text) {
    SweepConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    bool in_section = false;
    std::size_t section_line = 0;

    const auto close_section = [&]() {
        if (!in_section) return;
        const SweepSection& s = cfg.sections.back();
        if (s.axis.empty()) fail(section_line, "[sweep] section has no axis");
        if (s.values.empty()) fail(section_line, "[sweep] section has no values");
    };

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line != "[sweep]") fail(line_no, "unknown section '" + line + "'");
            close_section();
            cfg.sections.emplace_back();
            in_section = true;
            section_line = line_no;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (value.empty()) fail(line_no, "empty value for key '" + key + "'");

        if (in_section)
            apply_section_key(cfg.sections.back(), key, value, line_no);
        else
            apply_base_key(cfg, key, value, line_no);
    }
    close_section();
    return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sweep_config(buf.str());
}

}  // namespace ormac
