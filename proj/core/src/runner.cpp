#include "mtk/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "mtk/bubble.hpp"
#include "mtk/diagnostics.hpp"
#include "mtk/errors.hpp"
#include "mtk/functional.hpp"
#include "mtk/greens.hpp"
#include "mtk/mesh.hpp"
#include "mtk/radial.hpp"
#include "mtk/spectral.hpp"
#include "mtk/version.hpp"

namespace mtk::runner {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError(key, "empty numeric value");
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) throw ConfigError(key, "malformed number '" + v + "'");
    if (!std::isfinite(x)) throw ConfigError(key, "value must be finite");
    return x;
}

long parse_long(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError(key, "empty integer value");
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) throw ConfigError(key, "malformed integer '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError(key, "empty integer value");
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) throw ConfigError(key, "malformed integer '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

int resolve_threads(long requested) {
    long t = requested;
    if (t <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        t = std::min<long>(hw == 0 ? 1 : static_cast<long>(hw), 8);
    }
    if (const char* env = std::getenv("MT_THREADS"); env && *env) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) t = std::min(t, cap);
    }
    return static_cast<int>(std::clamp<long>(t, 1, 64));
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content,
                std::vector<std::string>& outputs) {
    std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("out", "cannot write '" + (dir / name).string() + "'");
    os << content;
    outputs.push_back(name);
}

std::string field_csv(const mesh::DomainGrid& g, const std::vector<double>& v) {
    std::ostringstream os;
    mesh::write_field_csv(os, g, v);
    return os.str();
}

std::string series_dat(const std::vector<double>& x, const std::vector<double>& y) {
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out += fmt(x[i]);
        out += ' ';
        out += fmt(y[i]);
        out += '\n';
    }
    return out;
}

mesh::DomainSpec domain_from(const RunConfig& cfg) {
    if (cfg.domain == "disk") return mesh::DomainSpec::disk(cfg.radius);
    if (cfg.domain == "rectangle") return mesh::DomainSpec::rectangle(cfg.width, cfg.height);
    if (cfg.domain == "polygon") {
        std::vector<mesh::Point> pts;
        std::istringstream is(cfg.vertices);
        std::string pair;
        while (std::getline(is, pair, ';')) {
            const std::string t = trim(pair);
            if (t.empty()) continue;
            std::istringstream ps(t);
            mesh::Point q;
            if (!(ps >> q.x >> q.y)) throw ConfigError("vertices", "malformed vertex '" + t + "'");
            std::string rest;
            if (ps >> rest) throw ConfigError("vertices", "trailing tokens in vertex '" + t + "'");
            pts.push_back(q);
        }
        try {
            return mesh::DomainSpec::polygon(pts);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("vertices", e.what());
        }
    }
    throw ConfigError("domain", "unknown domain '" + cfg.domain + "'");
}

mesh::GridPtr grid_from(const RunConfig& cfg) {
    if (cfg.grid == "radial") {
        if (cfg.domain != "disk") throw ConfigError("grid", "radial grids require a disk domain");
        return mesh::build_radial_grid(cfg.radius, static_cast<std::size_t>(cfg.n));
    }
    if (cfg.grid == "masked") return mesh::build_masked_grid(domain_from(cfg), cfg.h);
    throw ConfigError("grid", "unknown grid kind '" + cfg.grid + "'");
}

std::vector<double> resolve_alphas(const RunConfig& cfg, double lambda1) {
    std::vector<double> out;
    for (double a : cfg.alpha) {
        double abs_a = a;
        if (cfg.alpha_mode == "fraction") {
            if (!(a >= 0.0 && a < 1.0))
                throw ConfigError("alpha", "fractions must lie in [0, 1); got " + fmt(a));
            abs_a = a * lambda1;
        } else {
            if (!(a >= 0.0)) throw ConfigError("alpha", "alpha must be >= 0");
            if (!(a < lambda1))
                throw ConfigError("alpha", "alpha " + fmt(a) + " must stay below lambda1 = " +
                                               fmt(lambda1));
        }
        out.push_back(abs_a);
    }
    return out;
}

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_json(const RunConfig& cfg) {
    json j;
    j["domain"] = cfg.domain;
    j["radius"] = cfg.radius;
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    j["vertices"] = cfg.vertices;
    j["grid"] = cfg.grid;
    j["n"] = cfg.n;
    j["h"] = cfg.h;
    j["tol"] = cfg.tol;
    j["max_iters"] = cfg.max_iters;
    j["p"] = cfg.p;
    j["step0"] = cfg.step0;
    j["alpha"] = cfg.alpha;
    j["alpha_mode"] = cfg.alpha_mode;
    j["table_min"] = cfg.table_min;
    j["table_max"] = cfg.table_max;
    j["table_count"] = cfg.table_count;
    j["gamma"] = cfg.gamma;
    j["a_coeff"] = cfg.a_coeff;
    j["lambda"] = cfg.lambda;
    j["mu"] = cfg.mu;
    j["delta"] = cfg.delta;
    j["delta_prime"] = cfg.delta_prime;
    j["r_max"] = cfg.r_max;
    j["ode_tol"] = cfg.ode_tol;
    j["mode"] = cfg.mode;
    j["samples"] = cfg.samples;
    j["out"] = cfg.out;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

// ---- subcommand bodies ----------------------------------------------------

void run_eig(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    mesh::GridPtr grid = grid_from(cfg);
    const spectral::EigenPair eig = spectral::first_eigenpair(grid, cfg.tol, cfg.p, 400);

    std::string summary = "lambda1,residual,iterations,nodes,h\n";
    summary += fmt(eig.lambda) + "," + fmt(eig.residual) + "," + std::to_string(eig.iterations) +
               "," + std::to_string(grid->size()) + "," + fmt(grid->h) + "\n";
    write_file(dir, "summary.csv", summary, outputs);
    write_file(dir, "eigenfunction.csv", field_csv(*grid, eig.v), outputs);

    std::vector<double> xs, ys;
    if (grid->kind == mesh::GridKind::RadialDisk) {
        for (std::size_t i = 0; i < grid->size(); ++i) {
            xs.push_back(grid->px[i]);
            ys.push_back(eig.v[i]);
        }
    } else {
        double x0, y0, x1, y1;
        grid->domain.bounding_box(x0, y0, x1, y1);
        const double ymid = 0.5 * (y0 + y1);
        std::vector<std::size_t> sel;
        for (std::size_t i = 0; i < grid->size(); ++i)
            if (std::abs(grid->py[i] - ymid) <= 0.5 * grid->h + 1e-12) sel.push_back(i);
        std::sort(sel.begin(), sel.end(),
                  [&](std::size_t a, std::size_t b) { return grid->px[a] < grid->px[b]; });
        for (std::size_t i : sel) {
            xs.push_back(grid->px[i]);
            ys.push_back(eig.v[i]);
        }
    }
    write_file(dir, "profile.dat", series_dat(xs, ys), outputs);
}

functional::AscentOptions ascent_options(const RunConfig& cfg) {
    functional::AscentOptions opt;
    opt.tol = cfg.tol;
    opt.max_iters = static_cast<int>(cfg.max_iters);
    opt.step0 = cfg.step0;
    return opt;
}

std::string candidates_header() {
    return "alpha,value,gamma,l2u,beta,a_coeff,lambda_big,el_residual,iterations,"
           "multiplier,converged,min_u,grad_norm\n";
}

std::string candidates_row(const functional::ExtremalCandidate& c) {
    std::string row = fmt(c.alpha);
    for (double x : {c.value, c.peak, c.l2sq, c.beta, c.a_coeff, c.lambda_big, c.el_resid})
        row += "," + fmt(x);
    row += "," + std::to_string(c.iterations);
    row += "," + fmt(c.multiplier);
    row += std::string(",") + (c.converged ? "1" : "0");
    row += "," + fmt(c.min_u) + "," + fmt(c.grad_norm) + "\n";
    return row;
}

void run_maximize(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    mesh::GridPtr grid = grid_from(cfg);
    const spectral::EigenPair eig = spectral::first_eigenpair(grid, std::min(cfg.tol, 1e-9), cfg.p, 400);
    const std::vector<double> alphas = resolve_alphas(cfg, eig.lambda);

    std::string csv = candidates_header();
    std::vector<double> av, vv;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const functional::ExtremalCandidate cand =
            functional::maximize(grid, alphas[k], eig.v, ascent_options(cfg));
        csv += candidates_row(cand);
        av.push_back(cand.alpha);
        vv.push_back(cand.value);
        char name[32];
        std::snprintf(name, sizeof(name), "u_%03zu.csv", k);
        write_file(dir, name, field_csv(*grid, cand.u), outputs);
        if (grid->kind == mesh::GridKind::RadialDisk) {
            std::snprintf(name, sizeof(name), "u_vs_r_%03zu.dat", k);
            std::vector<double> xs(grid->px.begin(), grid->px.end());
            write_file(dir, name, series_dat(xs, cand.u), outputs);
        }
    }
    write_file(dir, "candidates.csv", csv, outputs);
    write_file(dir, "value_vs_alpha.dat", series_dat(av, vv), outputs);
}

void run_bubble_tab(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    const bubble::BubbleTable tab =
        bubble::tabulate(cfg.table_min, cfg.table_max, static_cast<std::size_t>(cfg.table_count));
    std::string csv = "r,t0,s0,aux,ode_residual\n";
    for (std::size_t i = 0; i < tab.r.size(); ++i)
        csv += fmt(tab.r[i]) + "," + fmt(tab.t0[i]) + "," + fmt(tab.s0[i]) + "," +
               fmt(tab.aux[i]) + "," + fmt(tab.ode_residual[i]) + "\n";
    write_file(dir, "bubble.csv", csv, outputs);

    std::string summary =
        "a0_exact,b0_exact,a0_fit,b0_fit,fit_correction,max_ode_residual,mass_plain,"
        "mass_weighted\n";
    summary += fmt(tab.a0_exact) + "," + fmt(tab.b0_exact) + "," + fmt(tab.fit.a0) + "," +
               fmt(tab.fit.b0) + "," + fmt(tab.fit.correction) + "," + fmt(tab.max_ode_residual) +
               "," + fmt(tab.mass_plain) + "," + fmt(tab.mass_weighted) + "\n";
    write_file(dir, "summary.csv", summary, outputs);
    write_file(dir, "t0.dat", series_dat(tab.r, tab.t0), outputs);
    write_file(dir, "s0.dat", series_dat(tab.r, tab.s0), outputs);
}

void run_shoot(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    const double gamma = cfg.gamma;
    const double lambda =
        cfg.lambda > 0.0 ? cfg.lambda : radial::lambda_from_scaling(cfg.mu, gamma);
    const double mu = radial::mu_from_scaling(lambda, gamma);
    const double rd = radial::r_delta(gamma, mu, cfg.delta);
    const double r_max = cfg.r_max > 0.0 ? cfg.r_max : 1.05 * rd;
    const radial::ShotProfile profile =
        radial::shoot_bubble(gamma, cfg.a_coeff, lambda, r_max, cfg.ode_tol);

    std::string prof = "r,b,db,energy\n";
    for (const radial::ShotSample& s : profile.samples)
        prof += fmt(s.r) + "," + fmt(s.b) + "," + fmt(s.db) + "," + fmt(s.energy) + "\n";
    write_file(dir, "profile.csv", prof, outputs);

    const bool expansion_valid = rd <= profile.r_end * (1.0 + 1e-12);
    radial::ExpansionReport rep;
    std::string exp_csv = "r,t,s0,b,prediction,scaled_error,scaled_error_ablated\n";
    if (expansion_valid) {
        rep = radial::compare_expansion(profile, cfg.delta);
        const std::size_t nrows = 2000;
        const double lr0 = std::log(0.02 * mu), lr1 = std::log(rd);
        for (std::size_t i = 0; i < nrows; ++i) {
            const double r = std::exp(lr0 + (lr1 - lr0) * static_cast<double>(i) /
                                                static_cast<double>(nrows - 1));
            const double b = profile.value(r);
            const double t = bubble::t0(r / mu);
            const double s = bubble::s0(r / mu);
            const double pred = gamma - t / gamma + s / (gamma * gamma * gamma);
            const double scale = std::pow(gamma, 5) / (1.0 + t);
            exp_csv += fmt(r) + "," + fmt(t) + "," + fmt(s) + "," + fmt(b) + "," + fmt(pred) +
                       "," + fmt(std::abs(b - pred) * scale) + "," +
                       fmt(std::abs(b - (gamma - t / gamma)) * scale) + "\n";
        }
    }
    write_file(dir, "expansion.csv", exp_csv, outputs);

    std::string summary =
        "gamma,a_coeff,lambda,mu,r_start,r_end,terminated,delta,r_delta,expansion_valid,"
        "max_scaled_error,max_scaled_error_ablated,energy_end\n";
    summary += fmt(gamma) + "," + fmt(cfg.a_coeff) + "," + fmt(lambda) + "," + fmt(mu) + "," +
               fmt(profile.r_start) + "," + fmt(profile.r_end) + "," +
               (profile.terminated == radial::ShotEnd::CrossedZero ? "1" : "0") + "," +
               fmt(cfg.delta) + "," + fmt(rd) + "," + (expansion_valid ? "1" : "0") + "," +
               fmt(rep.max_scaled_error) + "," + fmt(rep.max_scaled_error_ablated) + "," +
               fmt(profile.samples.back().energy) + "\n";
    write_file(dir, "summary.csv", summary, outputs);

    std::vector<double> xs, ys;
    for (const radial::ShotSample& s : profile.samples) {
        xs.push_back(s.r);
        ys.push_back(s.b);
    }
    write_file(dir, "b_vs_r.dat", series_dat(xs, ys), outputs);
}

void run_green(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    greens::GreenOracle oracle = cfg.mode == "closed"
                                     ? greens::GreenOracle::disk(cfg.radius)
                                     : greens::GreenOracle::grid(grid_from(cfg));
    const greens::BoundReport rep = greens::green_bound_check(oracle, cfg.samples, cfg.seed);

    std::string csv = "x1,x2,y1,y2,dist,g,bound_slack\n";
    for (const greens::BoundReport::Row& row : rep.rows) {
        const double slack = std::log(rep.c_log / row.dist) / (2.0 * std::numbers::pi) - row.g;
        csv += fmt(row.x.x) + "," + fmt(row.x.y) + "," + fmt(row.y.x) + "," + fmt(row.y.y) + "," +
               fmt(row.dist) + "," + fmt(row.g) + "," + fmt(slack) + "\n";
    }
    write_file(dir, "samples.csv", csv, outputs);

    std::string summary = "mode,c_log,c_grad,violations,samples,min_g\n";
    summary += cfg.mode + "," + fmt(rep.c_log) + "," + fmt(rep.c_grad) + "," +
               std::to_string(rep.violations) + "," + std::to_string(rep.samples) + "," +
               fmt(rep.min_g) + "\n";
    write_file(dir, "summary.csv", summary, outputs);

    std::vector<double> xs, ys;
    for (const greens::BoundReport::Row& row : rep.rows) {
        xs.push_back(row.dist);
        ys.push_back(row.g);
    }
    write_file(dir, "g_vs_dist.dat", series_dat(xs, ys), outputs);
}

void run_diagnose(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    mesh::GridPtr grid = grid_from(cfg);
    const spectral::EigenPair eig = spectral::first_eigenpair(grid, std::min(cfg.tol, 1e-9), cfg.p, 400);
    const std::vector<double> alphas = resolve_alphas(cfg, eig.lambda);
    const functional::ExtremalCandidate cand =
        functional::maximize(grid, alphas.front(), eig.v, ascent_options(cfg));
    const diagnostics::LedgerRow row =
        diagnostics::expansion_ledger(cand, eig, cfg.delta, cfg.delta_prime);

    write_file(dir, "ledger.csv", diagnostics::ledger_csv_header() + diagnostics::ledger_csv_row(row),
               outputs);
    write_file(dir, "ledger.txt", diagnostics::ledger_text(row), outputs);
    write_file(dir, "u.csv", field_csv(*grid, cand.u), outputs);
    std::vector<double> v(cand.u.size());
    const double sb = std::sqrt(cand.beta);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sb * cand.u[i];
    write_file(dir, "v.csv", field_csv(*grid, v), outputs);
    if (grid->kind == mesh::GridKind::RadialDisk) {
        std::vector<double> xs(grid->px.begin(), grid->px.end());
        write_file(dir, "u_vs_r.dat", series_dat(xs, cand.u), outputs);
    }
}

void run_sweep(const RunConfig& cfg, const fs::path& dir, std::vector<std::string>& outputs) {
    mesh::GridPtr grid = grid_from(cfg);
    const spectral::EigenPair eig = spectral::first_eigenpair(grid, std::min(cfg.tol, 1e-9), cfg.p, 400);
    const std::vector<double> alphas = resolve_alphas(cfg, eig.lambda);

    std::vector<functional::ExtremalCandidate> cands(alphas.size());
    std::vector<diagnostics::LedgerRow> rows(alphas.size());
    std::vector<std::string> errors(alphas.size());

    const int nt = resolve_threads(cfg.threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= alphas.size()) return;
            try {
                cands[k] = functional::maximize(grid, alphas[k], eig.v, ascent_options(cfg));
                rows[k] = diagnostics::expansion_ledger(cands[k], eig, cfg.delta, cfg.delta_prime);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    if (nt <= 1 || alphas.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(nt, static_cast<int>(alphas.size())); ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (std::size_t k = 0; k < alphas.size(); ++k)
        if (!errors[k].empty())
            throw NumericError("functional",
                               "sweep failed at alpha = " + fmt(alphas[k]) + ": " + errors[k]);

    std::string cand_csv = candidates_header();
    std::string ledger_csv = diagnostics::ledger_csv_header();
    std::vector<double> av, vv, gv, lg2, disc;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        cand_csv += candidates_row(cands[k]);
        ledger_csv += diagnostics::ledger_csv_row(rows[k]);
        av.push_back(rows[k].alpha);
        vv.push_back(rows[k].value);
        gv.push_back(rows[k].gamma_v);
        lg2.push_back(rows[k].lambda_gamma2);
        disc.push_back(rows[k].discrepancy_coeff);
    }
    write_file(dir, "candidates.csv", cand_csv, outputs);
    write_file(dir, "ledger.csv", ledger_csv, outputs);
    write_file(dir, "value_vs_alpha.dat", series_dat(av, vv), outputs);
    write_file(dir, "gamma_v_vs_alpha.dat", series_dat(av, gv), outputs);
    write_file(dir, "lambda_gamma2_vs_alpha.dat", series_dat(av, lg2), outputs);
    write_file(dir, "discrepancy_vs_alpha.dat", series_dat(av, disc), outputs);
}

} // namespace

void apply_kv(RunConfig& cfg, const std::string& raw_key, const std::string& value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(value);
    if (key == "domain") cfg.domain = v;
    else if (key == "radius") cfg.radius = parse_double(key, v);
    else if (key == "width") cfg.width = parse_double(key, v);
    else if (key == "height") cfg.height = parse_double(key, v);
    else if (key == "vertices") cfg.vertices = v;
    else if (key == "grid") cfg.grid = v;
    else if (key == "n") cfg.n = parse_long(key, v);
    else if (key == "h") cfg.h = parse_double(key, v);
    else if (key == "tol") cfg.tol = parse_double(key, v);
    else if (key == "max_iters") cfg.max_iters = parse_long(key, v);
    else if (key == "p") cfg.p = parse_double(key, v);
    else if (key == "step0") cfg.step0 = parse_double(key, v);
    else if (key == "alpha") cfg.alpha = parse_double_list(key, v);
    else if (key == "alpha_mode") cfg.alpha_mode = v;
    else if (key == "table_min") cfg.table_min = parse_double(key, v);
    else if (key == "table_max") cfg.table_max = parse_double(key, v);
    else if (key == "table_count") cfg.table_count = parse_long(key, v);
    else if (key == "gamma") cfg.gamma = parse_double(key, v);
    else if (key == "a_coeff") cfg.a_coeff = parse_double(key, v);
    else if (key == "lambda") cfg.lambda = parse_double(key, v);
    else if (key == "mu") cfg.mu = parse_double(key, v);
    else if (key == "delta") cfg.delta = parse_double(key, v);
    else if (key == "delta_prime") cfg.delta_prime = parse_double(key, v);
    else if (key == "r_max") cfg.r_max = parse_double(key, v);
    else if (key == "ode_tol") cfg.ode_tol = parse_double(key, v);
    else if (key == "mode") cfg.mode = v;
    else if (key == "samples") cfg.samples = parse_long(key, v);
    else if (key == "out") cfg.out = v;
    else if (key == "seed") cfg.seed = parse_u64(key, v);
    else if (key == "threads") cfg.threads = parse_long(key, v);
    else throw ConfigError(key, "unknown configuration key");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot open '" + path + "'");
    RunConfig cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config",
                              "line " + std::to_string(lineno) + " has no '=': '" + t + "'");
        apply_kv(cfg, t.substr(0, eq), t.substr(eq + 1));
    }
    return cfg;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"eig",   "maximize", "bubble-tab", "shoot",
                                                "green", "diagnose", "sweep"};
    return names;
}

std::vector<std::string> validate(const RunConfig& cfg, const std::string& subcommand) {
    std::vector<std::string> bad;
    auto flag = [&](const std::string& key, const std::string& msg) {
        bad.push_back(key + ": " + msg);
    };

    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
        flag("subcommand", "unknown subcommand '" + subcommand + "'");
        return bad;
    }
    if (cfg.out.empty()) flag("out", "output directory must not be empty");

    const bool needs_grid = subcommand == "eig" || subcommand == "maximize" ||
                            subcommand == "diagnose" || subcommand == "sweep" ||
                            (subcommand == "green" && cfg.mode == "grid");
    if (needs_grid) {
        if (cfg.domain != "disk" && cfg.domain != "rectangle" && cfg.domain != "polygon")
            flag("domain", "must be disk, rectangle or polygon");
        if (cfg.domain == "disk" && !(cfg.radius > 0.0)) flag("radius", "must be positive");
        if (cfg.domain == "rectangle" && !(cfg.width > 0.0 && cfg.height > 0.0))
            flag(cfg.width > 0.0 ? "height" : "width", "must be positive");
        if (cfg.domain == "polygon" && trim(cfg.vertices).empty())
            flag("vertices", "polygon domains need a vertex list");
        if (cfg.grid == "radial") {
            if (cfg.domain != "disk") flag("grid", "radial grids require a disk domain");
            if (cfg.n < 8) flag("n", "radial grids need at least 8 nodes");
        } else if (cfg.grid == "masked") {
            if (!(cfg.h > 0.0)) flag("h", "must be positive");
        } else {
            flag("grid", "must be radial or masked");
        }
        if (!(cfg.p >= 1.0)) flag("p", "normalization exponent must be >= 1");
        if (!(cfg.tol > 0.0)) flag("tol", "must be positive");
    }

    if (subcommand == "maximize" || subcommand == "diagnose" || subcommand == "sweep") {
        if (cfg.alpha.empty()) flag("alpha", "need at least one value");
        if (cfg.alpha_mode != "fraction" && cfg.alpha_mode != "absolute")
            flag("alpha_mode", "must be fraction or absolute");
        else
            for (double a : cfg.alpha) {
                if (cfg.alpha_mode == "fraction" && !(a >= 0.0 && a < 1.0))
                    flag("alpha", "fractions must lie in [0, 1); got " + fmt(a));
                if (cfg.alpha_mode == "absolute" && !(a >= 0.0))
                    flag("alpha", "must be >= 0; got " + fmt(a));
            }
        if (cfg.max_iters < 1) flag("max_iters", "must be >= 1");
        if (!(cfg.step0 > 0.0)) flag("step0", "must be positive");
    }

    if (subcommand == "diagnose" || subcommand == "sweep") {
        if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) flag("delta", "must lie in (0, 1]");
        if (!(cfg.delta_prime > 0.0 && cfg.delta_prime < 1.0))
            flag("delta_prime", "must lie in (0, 1)");
    }

    if (subcommand == "bubble-tab") {
        if (!(cfg.table_min > 0.0)) flag("table_min", "must be positive");
        if (!(cfg.table_max > cfg.table_min)) flag("table_max", "must exceed table_min");
        if (cfg.table_count < 2) flag("table_count", "need at least two rows");
    }

    if (subcommand == "shoot") {
        if (!(cfg.gamma > 0.0)) flag("gamma", "must be positive");
        else if (cfg.gamma * cfg.gamma > 700.0) flag("gamma", "gamma^2 exceeds the exponent cap 700");
        if (!(cfg.a_coeff >= 0.0)) flag("a_coeff", "must be >= 0");
        if (cfg.lambda < 0.0) flag("lambda", "must be >= 0 (0 derives it from mu)");
        if (cfg.lambda == 0.0 && !(cfg.mu > 0.0)) flag("mu", "must be positive");
        if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) flag("delta", "must lie in (0, 1]");
        if (cfg.r_max < 0.0) flag("r_max", "must be >= 0 (0 selects 1.05 r_delta)");
        if (!(cfg.ode_tol >= 1e-14 && cfg.ode_tol <= 1e-3))
            flag("ode_tol", "must lie in [1e-14, 1e-3]");
        if (cfg.r_max > 0.0 && cfg.a_coeff > 0.0 &&
            cfg.a_coeff > 0.99 * radial::disk_lambda1 / (cfg.r_max * cfg.r_max))
            flag("a_coeff", "too close to the first eigenvalue of the shot window");
    }

    if (subcommand == "green") {
        if (cfg.mode != "closed" && cfg.mode != "grid") flag("mode", "must be closed or grid");
        if (cfg.mode == "closed" && !(cfg.radius > 0.0)) flag("radius", "must be positive");
        if (cfg.samples < 1) flag("samples", "need at least one sample");
    }

    if (cfg.threads < 0 || cfg.threads > 4096) flag("threads", "must lie in [0, 4096]");
    return bad;
}

int run(const RunConfig& cfg, const std::string& subcommand) {
    const std::vector<std::string> findings = validate(cfg, subcommand);
    if (!findings.empty()) {
        const std::string& first = findings.front();
        const std::size_t colon = first.find(':');
        throw ConfigError(first.substr(0, colon), trim(first.substr(colon + 1)));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("out", "cannot create '" + cfg.out + "': " + ec.message());

    std::vector<std::string> outputs;
    if (subcommand == "eig") run_eig(cfg, dir, outputs);
    else if (subcommand == "maximize") run_maximize(cfg, dir, outputs);
    else if (subcommand == "bubble-tab") run_bubble_tab(cfg, dir, outputs);
    else if (subcommand == "shoot") run_shoot(cfg, dir, outputs);
    else if (subcommand == "green") run_green(cfg, dir, outputs);
    else if (subcommand == "diagnose") run_diagnose(cfg, dir, outputs);
    else if (subcommand == "sweep") run_sweep(cfg, dir, outputs);

    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    json manifest;
    manifest["tool"] = "mosertk";
    manifest["version"] = mtk::version;
    manifest["subcommand"] = subcommand;
    manifest["config"] = config_json(cfg);
    manifest["outputs"] = outputs;
    manifest["wall_ms"] = wall_ms;
    manifest["timestamp_utc"] = iso_utc_now();
    std::ofstream os(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    os << manifest.dump(2) << "\n";
    return 0;
}

} // namespace mtk::runner
