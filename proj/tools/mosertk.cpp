#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mtk/errors.hpp"
#include "mtk/runner.hpp"
#include "mtk/version.hpp"

namespace {

std::string dashed(const std::string& key) {
    if (key == "h") return "spacing"; // "--h" would collide with the help flag
    std::string out = key;
    for (char& c : out)
        if (c == '_') c = '-';
    return out;
}

struct SubSpec {
    CLI::App* app = nullptr;
    std::string name;
    std::vector<std::string> keys;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_path;
};

const std::vector<std::string> kCommonKeys = {"out", "seed", "threads"};
const std::vector<std::string> kGridKeys = {"domain", "radius",  "width", "height", "vertices",
                                            "grid",   "n",       "h",     "tol",    "p"};
const std::vector<std::string> kAscentKeys = {"alpha", "alpha_mode", "max_iters", "step0"};

std::vector<std::string> keys_for(const std::string& sub) {
    std::vector<std::string> keys = kCommonKeys;
    auto extend = [&](const std::vector<std::string>& more) {
        keys.insert(keys.end(), more.begin(), more.end());
    };
    if (sub == "eig") {
        extend(kGridKeys);
    } else if (sub == "maximize") {
        extend(kGridKeys);
        extend(kAscentKeys);
    } else if (sub == "bubble-tab") {
        extend({"table_min", "table_max", "table_count"});
    } else if (sub == "shoot") {
        extend({"gamma", "a_coeff", "lambda", "mu", "delta", "r_max", "ode_tol"});
    } else if (sub == "green") {
        extend({"mode", "samples"});
        extend(kGridKeys);
    } else if (sub == "diagnose" || sub == "sweep") {
        extend(kGridKeys);
        extend(kAscentKeys);
        extend({"delta", "delta_prime"});
    }
    return keys;
}

const char* describe(const std::string& sub) {
    if (sub == "eig") return "first Dirichlet eigenpair of the grid Laplacian";
    if (sub == "maximize") return "constrained maximization of the perturbed exponential functional";
    if (sub == "bubble-tab") return "tabulate the bubble profiles T0, S0 and their checks";
    if (sub == "shoot") return "radial shooting of the concentration equation";
    if (sub == "green") return "Green's function bounds and samples";
    if (sub == "diagnose") return "full concentration ledger for one candidate";
    if (sub == "sweep") return "ledger sweep over a list of alpha values";
    return "";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mosertk: toolkit for a perturbed Moser-Trudinger maximization problem "
                 "on planar domains"};
    app.set_version_flag("--version", std::string(mtk::version));
    app.require_subcommand(1);

    std::vector<SubSpec> subs;
    subs.reserve(mtk::runner::subcommands().size());
    for (const std::string& name : mtk::runner::subcommands()) {
        subs.push_back({});
        SubSpec& spec = subs.back();
        spec.name = name;
        spec.app = app.add_subcommand(name, describe(name));
        spec.app->add_option("--config", spec.config_path,
                             "flat key = value configuration file");
        spec.keys = keys_for(name);
        for (const std::string& key : spec.keys) {
            spec.values[key] = "";
            spec.options[key] =
                spec.app->add_option("--" + dashed(key), spec.values[key], "override key '" + key + "'");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    }

    const SubSpec* active = nullptr;
    for (const SubSpec& spec : subs)
        if (spec.app->parsed()) {
            active = &spec;
            break;
        }
    if (!active) {
        std::cerr << "argument error: no subcommand selected\n";
        return 2;
    }

    try {
        mtk::runner::RunConfig cfg;
        if (!active->config_path.empty())
            cfg = mtk::runner::parse_config_file(active->config_path);
        for (const std::string& key : active->keys)
            if (active->options.at(key)->count() > 0)
                mtk::runner::apply_kv(cfg, key, active->values.at(key));

        const std::vector<std::string> findings = mtk::runner::validate(cfg, active->name);
        if (!findings.empty()) {
            for (const std::string& f : findings)
                std::cerr << "configuration error: " << f << "\n";
            return 2;
        }
        return mtk::runner::run(cfg, active->name);
    } catch (const mtk::ConfigError& e) {
        std::cerr << "configuration error in '" << e.field() << "': " << e.what() << "\n";
        return 2;
    } catch (const mtk::NumericError& e) {
        std::cerr << "numerical abort in '" << e.module() << "': " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
