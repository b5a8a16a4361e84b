#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "syklab/metropolis.hpp"
#include "syklab/poissonize.hpp"

namespace syklab {

// Resolved settings of one command run. Every field has a key (the long flag
// name without dashes); config files hold "key = value" lines and '#'
// comments. Flags override the file, the file overrides command defaults.
struct ExperimentConfig {
    std::string command;
    int n_fermions = 14;
    double j_scale = 1.0;
    std::uint64_t seed = 0;
    std::filesystem::path out = "out";
    int jobs = 1;
    bool large = false;

    std::size_t samples = 64;   // ensemble members under study
    std::size_t pool_size = 64; // Hamiltonians feeding the eigenvalue pool
    PoolSampling sampling = PoolSampling::with_replacement;
    bool identity_draw = false; // pool = own spectrum, drawn as a permutation
    std::size_t index = 0;      // ensemble member written by `sample`

    std::vector<double> betas{0, 1, 2, 3};
    double t_max = 10;
    std::size_t t_points = 512;
    double sff_t_max = 50;
    int fermion_a = 1;
    int fermion_b = 2;
    int bins = 64;

    std::optional<std::filesystem::path> input;   // coefficients.csv
    std::optional<std::filesystem::path> compare; // second coefficients.csv
    std::vector<int> n_list;                      // decompose trend; empty = {n}

    Schedule schedule = Schedule::standard();
    ObjectiveScope scope = ObjectiveScope::full_spectrum;
    std::size_t checkpoint_every = 1000;
    bool resume = false;
    std::size_t stop_after = 0; // 0 = run to the end; otherwise leave the chain unfinished

    double gram_beta = 1;
    double t1 = 10;
    int omega = 32;

    EnsembleParams params() const;
    std::vector<double> times() const;

    // One "key = value" line per field, stable order.
    std::string to_text() const;
    std::map<std::string, std::string> to_map() const;
};

// Keys accepted in config files and as --flags.
const std::vector<std::string>& config_keys();
bool is_flag_key(const std::string& key); // takes no value on the command line

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Applies `values` on top of the command's defaults. Throws ArgumentError for
// unknown keys or malformed values, and for N > 16 without large.
ExperimentConfig resolve_config(const std::string& command,
                                const std::map<std::string, std::string>& values);

} // namespace syklab
