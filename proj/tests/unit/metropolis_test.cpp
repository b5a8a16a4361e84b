#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "syklab/errors.hpp"
#include "syklab/io.hpp"
#include "syklab/metropolis.hpp"
#include "syklab/spectral.hpp"

using namespace syklab;

namespace {

Schedule short_schedule() {
    Schedule s;
    s.stages = {{0.5, 300}, {1.0, 250}};
    return s;
}

// A chain whose proposals always land at log weight `g` while the state is
// reset to 0 before each step.
double acceptance_rate(double g, double beta, int steps) {
    ChainModel m{[](std::vector<double>&) {}, [g](const std::vector<double>&) { return g; }};
    ChainState s{{0.0, 0.0, 0.0}, 0.0, 0.1, 0, 0, 0, 0, Rng(12)};
    int taken = 0;
    for (int k = 0; k < steps; ++k) {
        s.log_weight = 0;
        taken += metropolis_step(s, m, beta);
    }
    return static_cast<double>(taken) / steps;
}

} // namespace

TEST_SUITE("metropolis") {

TEST_CASE("objective") {
    const std::vector<double> two{0, 1}, three{0, 1, 2};
    CHECK(objective(two, 1.0) == 0.0);
    CHECK(objective(three, 1.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    std::vector<double> scaled;
    for (double x : three) scaled.push_back(3.0 * x);
    CHECK(objective(scaled, 0.5) == doctest::Approx(objective(three, 0.5) - 0.5 * 3 * std::log(3.0)));
    const std::vector<double> tied{0, 1, 1, 2};
    CHECK(std::isfinite(objective(tied, 1.0)));
    CHECK(log_vandermonde(tied) == doctest::Approx(std::log(2.0) + std::log(1e-13 * 2)));
}

TEST_CASE("objective scopes") {
    Rng rng(1);
    const CouplingTensor c = sample_couplings({10, 1.0, 0}, rng);
    const DenseOperator h = build_hamiltonian(c);
    const Spectra s = diagonalize(h);
    const auto all = s.all_eigenvalues();
    CHECK(objective(h, 1.5) == doctest::Approx(objective(all, 1.5)));
    const std::vector<double> even(s.even.eigenvalues.begin(), s.even.eigenvalues.end());
    const std::vector<double> odd(s.odd.eigenvalues.begin(), s.odd.eigenvalues.end());
    CHECK(objective(h, 1.5, ObjectiveScope::per_sector) ==
          doctest::Approx(objective(even, 1.5) + objective(odd, 1.5)));
    CHECK(parse_scope("sector") == ObjectiveScope::per_sector);
    CHECK(scope_name(ObjectiveScope::full_spectrum) == "full");
    CHECK_THROWS_AS(parse_scope("both"), ArgumentError);
}

TEST_CASE("step length") {
    CHECK(step_length(0.0, 0.3) == 0.0);
    CHECK(step_length(1 / std::sqrt(2.0), 1.0) == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-15));
    CHECK(step_length(0.5, 2.0) == doctest::Approx(2 * step_length(0.5, 1.0)));
}

TEST_CASE("proposal lengths follow the step-length law") {
    Rng rng(3);
    const std::vector<double> origin(7, 0.0);
    const double median = step_length(0.5, 1.0);
    const int draws = 100000;
    int below = 0;
    for (int k = 0; k < draws; ++k) {
        const auto p = propose(origin, 1.0, rng);
        double norm = 0;
        for (double v : p) norm += v * v;
        below += std::sqrt(norm) < median;
    }
    CHECK(std::abs(static_cast<double>(below) / draws - 0.5) < 4 * 0.5 / std::sqrt(draws));
}

TEST_CASE("acceptance rule") {
    CHECK(acceptance_rate(1.0, 1.0, 1000) == 1.0);
    CHECK(acceptance_rate(0.0, 1.0, 1000) == 1.0);
    const int steps = 100000;
    const double p = std::exp(-0.7);
    CHECK(std::abs(acceptance_rate(-0.7, 1.0, steps) - p) < 4 * std::sqrt(p * (1 - p) / steps));
    const double q = std::exp(-0.5 * 1.2);
    CHECK(std::abs(acceptance_rate(-1.2, 0.5, steps) - q) < 4 * std::sqrt(q * (1 - q) / steps));
}

TEST_CASE("sigma adaptation") {
    const Schedule sched = Schedule::standard();
    ChainState s;
    s.sigma = 1.0;
    s.window_steps = 100;
    s.window_accepts = 60;
    adapt_sigma(s, sched);
    CHECK(s.sigma == doctest::Approx(1.1));
    CHECK(s.window_accepts == 0);
    CHECK(s.window_steps == 0);
    s.sigma = 1.0;
    s.window_accepts = 3;
    adapt_sigma(s, sched);
    CHECK(s.sigma == doctest::Approx(1 / 1.1));
    s.sigma = 1.0;
    s.window_accepts = 30;
    adapt_sigma(s, sched);
    CHECK(s.sigma == 1.0);
}

TEST_CASE("detailed balance on the unit circle") {
    // Two couplings on the unit circle, weight exp(beta * g) with
    // g = -ln|x - y|: stationary density |cos(psi)|^{-beta}, psi = theta + pi/4.
    const double beta = 0.5;
    ChainModel m{[](std::vector<double>& v) {
                     const double r = std::hypot(v[0], v[1]);
                     v[0] /= r;
                     v[1] /= r;
                 },
                 [](const std::vector<double>& v) { return -std::log(std::abs(v[0] - v[1])); }};
    ChainState s{{1.0, 0.0}, 0.0, 0.8, 0, 0, 0, 0, Rng(21)};
    s.log_weight = m.log_weight(s.couplings);

    // fold psi onto [0, pi/2]; the density is symmetric under both reflections
    const int bins = 8;
    const double quarter = std::numbers::pi / 2;
    std::vector<double> hist(bins, 0.0);
    const int steps = 400000;
    for (int k = 0; k < steps; ++k) {
        metropolis_step(s, m, beta);
        double psi = std::fmod(std::atan2(s.couplings[1], s.couplings[0]) + std::numbers::pi / 4 + 4 * std::numbers::pi,
                               std::numbers::pi);
        if (psi > quarter) psi = std::numbers::pi - psi;
        hist[std::min(bins - 1, static_cast<int>(psi / quarter * bins))] += 1.0 / steps;
    }

    // exact bin masses; psi = pi/2 - u^2 removes the endpoint singularity
    const auto mass = [&](double a, double b) {
        const double ua = std::sqrt(quarter - b), ub = std::sqrt(quarter - a);
        const int panels = 2000;
        const double h = (ub - ua) / panels;
        const auto f = [&](double u) {
            if (u == 0) return 2.0;
            return 2 * u * std::pow(std::sin(u * u), -beta);
        };
        double sum = f(ua) + f(ub);
        for (int k = 1; k < panels; ++k) sum += f(ua + k * h) * (k % 2 ? 4 : 2);
        return sum * h / 3;
    };
    std::vector<double> exact(bins);
    double total = 0;
    for (int k = 0; k < bins; ++k) total += exact[k] = mass(k * quarter / bins, (k + 1) * quarter / bins);
    for (int k = 0; k < bins; ++k) CHECK(std::abs(hist[k] - exact[k] / total) < 0.01);
}

TEST_CASE("schedule") {
    const Schedule s = Schedule::standard();
    CHECK(s.sigma0 == 0.001);
    CHECK(s.stages_text() == "0.5:20000,1:20000,1.5:20000,2:20000");
    CHECK(s.total_steps() == 80000);
    CHECK(Schedule::parse_stages(s.stages_text()) == s.stages);
    CHECK(Schedule::parse_stages("none").empty());
    CHECK_THROWS_AS(Schedule::parse_stages("0.5"), ArgumentError);
    Schedule bad = s;
    bad.window = 0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("zero-stage schedule returns the initial draw") {
    Schedule s;
    const RunResult r = run_schedule({8, 1.0, 4}, s);
    CHECK(r.completed);
    CHECK(r.final == r.initial);
    Rng rng(4, streams::target);
    CHECK(r.initial == sample_couplings({8, 1.0, 4}, rng));
}

TEST_CASE("short run conserves tr(H^2) and replays exactly") {
    const EnsembleParams p{8, 1.0, 6};
    const RunResult a = run_schedule(p, short_schedule());
    const RunResult b = run_schedule(p, short_schedule());
    CHECK(a.completed);
    CHECK(a.final == b.final);
    CHECK(a.state == b.state);
    CHECK(a.state.steps == 550);
    CHECK(a.state.total_accepts > 0);
    CHECK(a.max_trace_drift <= 1e-8);
    CHECK(std::abs(hamiltonian_trace_square(a.final) / a.target_trace - 1) <= 1e-8);
    CHECK(a.trajectory.size() == 5); // window boundaries at 100..500
    CHECK(a.trajectory[3].beta_d == 1.0);
    CHECK(trajectory_csv(a.trajectory).rfind("step,beta_D,f,sigma,accept_rate\n", 0) == 0);
}

TEST_CASE("restart from a checkpoint is bit-identical") {
    const auto dir = test::scratch_dir("checkpoint");
    const EnsembleParams p{8, 1.0, 7};
    const RunResult full = run_schedule(p, short_schedule());

    RunOptions o;
    o.checkpoint = dir / "cp.txt";
    o.checkpoint_every = 40;
    o.stop_after = 333;
    const RunResult part = run_schedule(p, short_schedule(), o);
    CHECK_FALSE(part.completed);
    CHECK(part.state.steps == 333);

    o.stop_after.reset();
    o.resume = true;
    const RunResult resumed = run_schedule(p, short_schedule(), o);
    CHECK(resumed.completed);
    CHECK(resumed.final == full.final);
    CHECK(resumed.state == full.state);
    CHECK(resumed.initial == full.initial);
    CHECK(resumed.max_trace_drift == full.max_trace_drift);
    CHECK(trajectory_csv(resumed.trajectory) == trajectory_csv(full.trajectory));

    Schedule other = short_schedule();
    other.stages[0].steps = 301;
    CHECK_THROWS_AS(run_schedule(p, other, o), ArgumentError);
    CHECK_THROWS_AS(run_schedule({8, 1.0, 8}, short_schedule(), o), ArgumentError);
}

TEST_CASE("per-sector scope runs") {
    RunOptions o;
    o.scope = ObjectiveScope::per_sector;
    const RunResult r = run_schedule({8, 1.0, 2}, short_schedule(), o);
    CHECK(r.completed);
    CHECK(r.max_trace_drift <= 1e-8);
}

TEST_CASE("initial couplings are honored") {
    Rng rng(1);
    RunOptions o;
    o.initial = sample_couplings({8, 1.0, 0}, rng);
    const RunResult r = run_schedule({8, 1.0, 0}, Schedule{}, o);
    CHECK(r.final == *o.initial);
    o.initial = CouplingTensor::zeros(8);
    CHECK_THROWS_AS(run_schedule({8, 1.0, 0}, Schedule{}, o), DegenerateInputError);
}

}
