#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtk::runner {

/// Flat configuration shared by every subcommand; unused keys are ignored
/// by the ones that do not need them. Defaults are chosen so each
/// subcommand runs out of the box on the unit disk.
struct RunConfig {
    // domain / grid
    std::string domain = "disk"; // disk | rectangle | polygon
    double radius = 1.0;
    double width = 1.0, height = 1.0;
    std::string vertices;       // polygon: "x y; x y; ..."
    std::string grid = "radial"; // radial | masked
    long n = 129;                // radial node count
    double h = 1.0 / 64.0;       // masked spacing

    // iteration knobs
    double tol = 1e-9;
    long max_iters = 5000;
    double p = 2.0;
    double step0 = 0.1;

    // functional
    std::vector<double> alpha{0.5};
    std::string alpha_mode = "fraction"; // fraction (of lambda1) | absolute

    // bubble table
    double table_min = 1e-2, table_max = 1e3;
    long table_count = 200;

    // shooting
    double gamma = 5.0;
    double a_coeff = 0.0;
    double lambda = 0.0; // 0: derived from mu and gamma
    double mu = 1.0;
    double delta = 0.5;
    double delta_prime = 0.5;
    double r_max = 0.0; // 0: 1.05 * r_delta
    double ode_tol = 1e-11;

    // green
    std::string mode = "closed"; // closed | grid
    long samples = 10000;

    // io / misc
    std::string out = "out";
    std::uint64_t seed = 1;
    long threads = 0; // 0: hardware count, always capped by MT_THREADS
};

/// Set one key; throws ConfigError naming the key on unknown keys or
/// malformed values.
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parse a flat `key = value` file ('#' comments, blank lines allowed).
RunConfig parse_config_file(const std::string& path);

/// Subcommand-aware validation; each finding is "key: problem". Empty
/// means runnable.
std::vector<std::string> validate(const RunConfig& cfg, const std::string& subcommand);

/// Execute one subcommand, writing its CSVs, plot series and manifest.json
/// under cfg.out. Throws ConfigError / NumericError; returns 0 on success.
/// Every output except manifest.json is byte-identical across reruns of
/// the same configuration.
int run(const RunConfig& cfg, const std::string& subcommand);

const std::vector<std::string>& subcommands();

} // namespace mtk::runner
