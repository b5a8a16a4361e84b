#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "syklab/pauli.hpp"
#include "syklab/rng.hpp"
#include "syklab/syk.hpp"

namespace syklab {

// Annealing schedule: stages of (beta_D, steps); sigma adapts every `window`
// steps by `factor` when the window's accept count is above `raise_above`
// or below `lower_below`.
struct Schedule {
    struct Stage {
        double beta_d = 0;
        std::size_t steps = 0;
        friend bool operator==(const Stage&, const Stage&) = default;
    };

    std::vector<Stage> stages;
    double sigma0 = 0.001;
    std::size_t window = 100;
    std::size_t raise_above = 50;
    std::size_t lower_below = 5;
    double factor = 1.1;

    static Schedule standard();
    std::size_t total_steps() const;
    void validate() const;

    // "0.5:20000,1:20000"
    std::string stages_text() const;
    static std::vector<Stage> parse_stages(std::string_view text);

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Which eigenvalue pairs enter the log-Vandermonde sum.
enum class ObjectiveScope { full_spectrum, per_sector };

std::string_view scope_name(ObjectiveScope s);
ObjectiveScope parse_scope(std::string_view s);

inline constexpr double gap_clamp = 1e-13; // times the bandwidth

// sum_{i<j} ln max(|l_i - l_j|, gap_clamp * bandwidth) over ascending levels.
double log_vandermonde(std::span<const double> ascending);

// f = -beta_D * sum_{i<j} ln |l_i - l_j| with the clamp above.
double objective(std::span<const double> ascending, double beta_d);
double objective(const DenseOperator& h, double beta_d,
                 ObjectiveScope scope = ObjectiveScope::full_spectrum);

// l = (sigma / 2)(sqrt(1 + 4x^2 / (1 - x^2)) - 1), x in [0, 1).
double step_length(double x, double sigma);

// x uniform on [0, 1), then a Gaussian direction of `current.size()`
// components rescaled to length l, added to `current`.
std::vector<double> propose(std::span<const double> current, double sigma, Rng& rng);
CouplingTensor propose(const CouplingTensor& current, double sigma, Rng& rng);

// What the chain explores: `normalize` projects a proposal back onto the
// constraint surface, and f = beta_D * log_weight(x).
struct ChainModel {
    std::function<void(std::vector<double>&)> normalize;
    std::function<double(const std::vector<double>&)> log_weight;
};

// 4-local SYK couplings at fixed tr(H^2) = target, weighted by
// -sum ln|l_i - l_j|.
ChainModel syk_chain_model(int n_fermions, double target_trace, ObjectiveScope scope);

struct ChainState {
    std::vector<double> couplings;
    double log_weight = 0; // f / beta_D
    double sigma = 0.001;
    std::size_t window_accepts = 0;
    std::size_t window_steps = 0;
    std::size_t total_accepts = 0;
    std::size_t steps = 0;
    Rng rng;

    friend bool operator==(const ChainState&, const ChainState&) = default;
};

// Proposal, normalization, then acceptance with probability
// min(exp(f_new - f_old), 1). A uniform is drawn on every step. Returns
// whether the proposal was taken.
bool metropolis_step(ChainState& state, const ChainModel& model, double beta_d);

// At a window boundary: sigma *= factor above the raise threshold, /= factor
// below the lower one; window counters reset.
void adapt_sigma(ChainState& state, const Schedule& schedule);

struct TrajectoryRow {
    std::size_t step = 0;
    double beta_d = 0;
    double f = 0;
    double sigma = 0;
    double accept_rate = 0;
};

struct RunOptions {
    ObjectiveScope scope = ObjectiveScope::full_spectrum;
    // Written atomically every `checkpoint_every` steps when set.
    std::optional<std::filesystem::path> checkpoint;
    std::size_t checkpoint_every = 1000;
    // Continue from the checkpoint file when it exists.
    bool resume = false;
    // Stop (incomplete) once this many steps are done; for testing restarts.
    std::optional<std::size_t> stop_after;
    // Initial couplings; a fresh draw from Rng(seed, streams::target) otherwise.
    std::optional<CouplingTensor> initial;
};

struct RunResult {
    CouplingTensor initial;
    CouplingTensor final;
    double target_trace = 0;
    double max_trace_drift = 0; // max relative |tr(H^2) - target| over accepted states
    std::vector<TrajectoryRow> trajectory;
    ChainState state;
    bool completed = false;
};

RunResult run_schedule(const EnsembleParams& params, const Schedule& schedule,
                       const RunOptions& options = {});

// "step,beta_D,f,sigma,accept_rate"
std::string trajectory_csv(std::span<const TrajectoryRow> rows);

} // namespace syklab
