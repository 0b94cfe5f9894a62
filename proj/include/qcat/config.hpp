// config.hpp — flat key=value experiment configuration
//
// UTF-8 text, one `key=value` per line, `#` comments, unknown keys are
// errors. CLI flags override file keys; --paper-scale swaps in the
// paper-exact N and ensemble sizes unless those keys were set explicitly.
// The canonical serialization (all effective keys, sorted) is hashed into
// the provenance id that output files carry.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcat/cache.hpp"
#include "qcat/classical.hpp"
#include "qcat/csv.hpp"
#include "qcat/errors.hpp"
#include "qcat/quantize.hpp"

namespace qcat {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "map",      "kind",   "k0",      "ref_k",         "chi_min",     "chi_max",
        "chi_step", "N",      "N_list",  "n_states",      "sigma_states", "T",
        "windows",  "window_center",     "seed",          "out",         "cache",
        "threads",  "paper_scale",       "dump_echo"};
    return keys;
}

struct ExperimentConfig {
    std::string map_label{"G2"};
    PerturbationKind kind{PerturbationKind::MomentumShear};
    double k0{0.02};
    bool ref_k_auto{true};
    double ref_k{0.02};
    double chi_min{0.0};
    double chi_max{60.0};
    double chi_step{1.0};
    std::vector<int> n_list{800};
    int n_states{50};
    std::string sigma_states{"auto"};  // auto | full | <count>
    int t_steps{60};
    std::vector<double> windows;
    bool window_center_auto{true};
    double window_center{0.0};
    bool has_seed{false};
    std::uint64_t seed{0};
    std::string out_dir{"."};
    std::string cache_dir;
    int threads{0};
    bool paper_scale{false};
    bool dump_echo{false};

    std::set<std::string> explicit_keys;

    const CatMap& map() const { return cat_map_by_label(map_label); }

    int n() const { return n_list.at(0); }

    double resolved_window_center() const {
        return window_center_auto ? shear_profile_peak_q() : window_center;
    }

    double resolved_ref_k() const { return ref_k_auto ? k0 : ref_k; }

    std::vector<double> chi_grid() const {
        std::vector<double> grid;
        int count = int((chi_max - chi_min) / chi_step + 1e-9) + 1;
        for (int i = 0; i < count; ++i) grid.push_back(chi_min + i * chi_step);
        return grid;
    }

    ShearWindow window_for(double w) const {
        return ShearWindow(resolved_window_center(), w);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse integer from '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("key '" + key + "': expected boolean, got '" + v + "'");
}

} // namespace detail

// Raw key/value pairs from a config file; throws with line diagnostics.
inline std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                            const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (!known_config_keys().count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (kv.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

// Apply typed values; unknown keys were rejected at parse time.
inline void apply_config_entries(ExperimentConfig& cfg,
                                 const std::map<std::string, std::string>& kv) {
    using namespace detail;
    for (const auto& [key, value] : kv) {
        if (key == "map") {
            cat_map_by_label(value);  // validates
            cfg.map_label = value;
        } else if (key == "kind") {
            cfg.kind = kind_by_label(value);
        } else if (key == "k0") {
            cfg.k0 = parse_double(key, value);
        } else if (key == "ref_k") {
            if (value == "auto") {
                cfg.ref_k_auto = true;
            } else {
                cfg.ref_k_auto = false;
                cfg.ref_k = parse_double(key, value);
            }
        } else if (key == "chi_min") {
            cfg.chi_min = parse_double(key, value);
        } else if (key == "chi_max") {
            cfg.chi_max = parse_double(key, value);
        } else if (key == "chi_step") {
            cfg.chi_step = parse_double(key, value);
        } else if (key == "N") {
            cfg.n_list = {int(parse_int(key, value))};
        } else if (key == "N_list") {
            cfg.n_list.clear();
            for (const auto& item : split_list(value))
                cfg.n_list.push_back(int(parse_int(key, item)));
        } else if (key == "n_states") {
            cfg.n_states = int(parse_int(key, value));
        } else if (key == "sigma_states") {
            cfg.sigma_states = value;
        } else if (key == "T") {
            cfg.t_steps = int(parse_int(key, value));
        } else if (key == "windows") {
            cfg.windows.clear();
            for (const auto& item : split_list(value))
                cfg.windows.push_back(parse_double(key, item));
        } else if (key == "window_center") {
            if (value == "auto") {
                cfg.window_center_auto = true;
            } else {
                cfg.window_center_auto = false;
                cfg.window_center = parse_double(key, value);
            }
        } else if (key == "seed") {
            cfg.has_seed = true;
            cfg.seed = std::uint64_t(std::stoull(value));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "cache") {
            cfg.cache_dir = value;
        } else if (key == "threads") {
            cfg.threads = int(parse_int(key, value));
        } else if (key == "paper_scale") {
            cfg.paper_scale = parse_bool(key, value);
        } else if (key == "dump_echo") {
            cfg.dump_echo = parse_bool(key, value);
        }
        cfg.explicit_keys.insert(key);
    }
}

// Paper-exact scales: N=2000 ensembles of 200 for echo sweeps, the
// three-N sigma ladder. Explicitly set keys win.
inline void apply_paper_scale(ExperimentConfig& cfg, bool sigma_sweep) {
    if (!cfg.paper_scale) return;
    if (!cfg.explicit_keys.count("N") && !cfg.explicit_keys.count("N_list"))
        cfg.n_list = sigma_sweep ? std::vector<int>{300, 600, 1200} : std::vector<int>{2000};
    if (!cfg.explicit_keys.count("n_states")) cfg.n_states = 200;
}

inline void validate_config(const ExperimentConfig& cfg, bool needs_windows = false) {
    if (!cfg.has_seed) throw ConfigError("seed is mandatory (key 'seed' or --seed)");
    if (!(cfg.chi_step > 0.0)) throw ConfigError("chi_step must be positive");
    if (cfg.chi_max < cfg.chi_min) throw ConfigError("chi grid empty: chi_max < chi_min");
    if (cfg.chi_min < 0.0) throw ConfigError("chi grid must be nonnegative");
    if (cfg.n_list.empty()) throw ConfigError("N list is empty");
    const CatMap& map = cfg.map();
    for (int n : cfg.n_list) {
        if (n < 2) throw ConfigError("N must be >= 2");
        if (map == maps::G1 && n % 2 != 0)
            throw ConfigError("map G1 requires even N, got " + std::to_string(n));
    }
    if (cfg.n_states < 1) throw ConfigError("n_states must be >= 1");
    if (cfg.t_steps < 5) throw ConfigError("T must be >= 5");
    if (cfg.k0 < 0.0) throw ConfigError("k0 must be >= 0");
    for (double w : cfg.windows)
        if (!(w > 0.0 && w <= 1.0)) throw ConfigError("window widths must lie in (0, 1]");
    if (cfg.kind == PerturbationKind::DoubleShear && !cfg.windows.empty())
        throw ConfigError("double shear admits only the global window");
    if (needs_windows && cfg.windows.empty())
        throw ConfigError("this sweep requires a non-empty 'windows' list");
    if (cfg.sigma_states != "auto" && cfg.sigma_states != "full") {
        long long c = detail::parse_int("sigma_states", cfg.sigma_states);
        if (c < 1) throw ConfigError("sigma_states count must be >= 1");
    }
}

// Every effective key, sorted; this text is the config snapshot and the
// input of the provenance hash.
inline std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["map"] = cfg.map_label;
    kv["kind"] = kind_label(cfg.kind);
    kv["k0"] = csv_num(cfg.k0);
    kv["ref_k"] = cfg.ref_k_auto ? "auto" : csv_num(cfg.ref_k);
    kv["chi_min"] = csv_num(cfg.chi_min);
    kv["chi_max"] = csv_num(cfg.chi_max);
    kv["chi_step"] = csv_num(cfg.chi_step);
    {
        std::string ns;
        for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
            ns += (i ? "," : "") + std::to_string(cfg.n_list[i]);
        kv["N_list"] = ns;
    }
    kv["n_states"] = std::to_string(cfg.n_states);
    kv["sigma_states"] = cfg.sigma_states;
    kv["T"] = std::to_string(cfg.t_steps);
    {
        std::string ws;
        for (std::size_t i = 0; i < cfg.windows.size(); ++i)
            ws += (i ? "," : "") + csv_num(cfg.windows[i]);
        kv["windows"] = ws;
    }
    kv["window_center"] = cfg.window_center_auto ? "auto" : csv_num(cfg.window_center);
    kv["seed"] = std::to_string(cfg.seed);
    kv["paper_scale"] = cfg.paper_scale ? "1" : "0";
    kv["dump_echo"] = cfg.dump_echo ? "1" : "0";
    // out/cache/threads affect where and how fast, not what; they stay out
    // of the hash so reruns into other directories compare equal
    std::string text;
    for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
    return text;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    std::string text = canonical_config_text(cfg);
    std::uint64_t h = fnv1a64(text.data(), text.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qcat
