// syklab: batch drivers for SYK spectra, Poissonization, operator sizes,
// correlators, the spectral Metropolis sampler and TFD Gram matrices.
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "syklab/commands.hpp"
#include "syklab/config.hpp"
#include "syklab/errors.hpp"

namespace {

enum Exit { ok = 0, usage = 2, numerical = 3, io = 4 };

struct Command {
    const char* name;
    const char* help;
};

constexpr Command commands[] = {
    {"sample", "draw one SYK Hamiltonian; write coefficients and spectrum"},
    {"poissonize", "swap spectra for pool draws; gap ratios, delta-H and SFF"},
    {"correlators", "two-point functions and OTOC, original vs modified"},
    {"decompose", "Majorana size spectrum and non-local fraction"},
    {"metropolis", "anneal couplings toward a Poisson-like spectrum"},
    {"gram", "TFD Gram matrix rank and cyclic moments"},
};

const std::map<std::string, std::string> key_help{
    {"n", "Majorana fermion count N (even)"},
    {"j-scale", "coupling energy scale J"},
    {"seed", "64-bit seed; every draw is a fixed stream of it"},
    {"out", "output directory"},
    {"jobs", "worker threads for ensemble loops"},
    {"large", "allow N > 16"},
    {"samples", "ensemble members studied"},
    {"pool-size", "Hamiltonians feeding the eigenvalue pool"},
    {"sampling", "pool draws: with | without (replacement)"},
    {"identity-draw", "draw each spectrum from itself (roundtrip check)"},
    {"index", "ensemble member written by sample"},
    {"betas", "comma-separated inverse temperatures"},
    {"t-max", "correlator time window end"},
    {"t-points", "points on time grids"},
    {"fermion-a", "first OTOC fermion"},
    {"fermion-b", "second OTOC fermion"},
    {"bins", "histogram bins of the mean density"},
    {"input", "coefficients.csv to use instead of a draw"},
    {"compare", "second coefficients.csv for correlators"},
    {"n-list", "comma-separated N values for the decompose trend"},
    {"stages", "annealing stages beta:steps,...  ('none' for zero)"},
    {"sigma0", "initial Metropolis step scale"},
    {"scope", "objective eigenvalues: full | sector"},
    {"checkpoint-every", "Metropolis steps between checkpoints"},
    {"resume", "continue from out/checkpoint.txt"},
    {"stop-after", "stop the chain after this many steps (0 = run to the end)"},
    {"gram-beta", "inverse temperature of the TFD states"},
    {"t1", "time spacing of the TFD states"},
    {"omega", "number of TFD states"},
    {"sff-t-max", "SFF time window end"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"syklab: SYK spectral experiments"};
    app.require_subcommand(1);

    // Each subcommand gets every setting; values are collected as raw strings
    // and resolved in one place so that config files and flags share parsing.
    std::map<std::string, std::map<std::string, std::string>> flag_values;
    std::map<std::string, std::map<std::string, bool>> flag_bools;
    std::map<std::string, std::optional<std::string>> config_files;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_files[cmd.name], "key = value settings file");
        for (const auto& key : syklab::config_keys()) {
            if (syklab::is_flag_key(key)) {
                sub->add_flag("--" + key, flag_bools[cmd.name][key], key_help.at(key));
            } else {
                sub->add_option("--" + key, flag_values[cmd.name][key], key_help.at(key));
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    try {
        std::map<std::string, std::string> values;
        if (config_files[name]) values = syklab::read_config_file(*config_files[name]);
        for (const auto& key : syklab::config_keys()) {
            const CLI::Option* opt = chosen->get_option("--" + key);
            if (opt->count() == 0) continue;
            values[key] = syklab::is_flag_key(key) ? "true" : flag_values[name][key];
        }
        const syklab::ExperimentConfig config = syklab::resolve_config(name, values);
        syklab::run_command(config, std::cout);
        std::cout << "outputs in " << config.out.string() << "\n";
        return ok;
    } catch (const syklab::ArgumentError& e) {
        std::cerr << "syklab " << name << ": " << e.what() << "\n";
        return usage;
    } catch (const syklab::IoError& e) {
        std::cerr << "syklab " << name << ": I/O error: " << e.what() << "\n";
        return io;
    } catch (const std::exception& e) {
        std::cerr << "syklab " << name << ": " << e.what() << "\n";
        return numerical;
    }
}
