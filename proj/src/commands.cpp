#include "syklab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "syklab/correlators.hpp"
#include "syklab/decompose.hpp"
#include "syklab/errors.hpp"
#include "syklab/io.hpp"
#include "syklab/parallel.hpp"

namespace syklab {

namespace {

constexpr std::size_t reference_ratio_count = 200000;
constexpr double parseval_tol = 1e-8;

using Summary = std::vector<std::pair<std::string, std::string>>;

std::string summary_text(const Summary& s) {
    std::string out;
    for (const auto& [k, v] : s) out += fmt::format("{} = {}\n", k, v);
    return out;
}

struct MeanError {
    double mean = 0;
    double std_error = 0;
};

MeanError mean_error(const std::vector<double>& v) {
    MeanError m;
    if (v.empty()) return {std::nan(""), std::nan("")};
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() < 2) return m;
    double var = 0;
    for (double x : v) var += (x - m.mean) * (x - m.mean);
    m.std_error = std::sqrt(var / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    return m;
}

CouplingTensor member_couplings(const ExperimentConfig& c, std::size_t k) {
    Rng rng(c.seed, streams::target + k);
    return sample_couplings(c.params(), rng);
}

CouplingTensor input_or_member(const ExperimentConfig& c, std::size_t k) {
    if (c.input) return read_coefficients(*c.input, c.n_fermions);
    return member_couplings(c, k);
}

std::string spectrum_csv(const Spectra& s) {
    std::string out = "sector,index,eigenvalue\n";
    for (const SectorSpectrum* sec : {&s.even, &s.odd}) {
        for (Eigen::Index k = 0; k < sec->size(); ++k) {
            out += fmt::format("{},{},{}\n", sector_name(sec->sector), k, format_double(sec->eigenvalues[k]));
        }
    }
    return out;
}

std::string sff_csv(const std::vector<SFFSeries>& series) {
    std::string out = "beta,t,value\n";
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            out += fmt::format("{},{},{}\n", format_double(s.beta), format_double(s.times[k]),
                               format_double(s.values[k]));
        }
    }
    return out;
}

std::vector<double> merged(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a);
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

// Sorted i.i.d. draws from the pool, one sector-sized set per sector.
std::vector<double> poisson_levels(const EigenvaluePool& pool, Rng& rng, PoolSampling sampling) {
    const std::size_t half = std::size_t{1} << (pool.n_fermions / 2 - 1);
    return merged(draw_sorted(pool.even, half, rng, sampling), draw_sorted(pool.odd, half, rng, sampling));
}

void append_ratios(std::string& csv, std::string_view series, std::size_t sample, Sector sector,
                   const GapRatioSample& g) {
    for (double r : g.ratios) {
        csv += fmt::format("{},{},{},{}\n", series, sample, sector_name(sector), format_double(r));
    }
}

double parseval_check(const FermionExpansion& e, const DenseOperator& h, std::ostream& log,
                      std::string_view what) {
    const double lhs = e.sum_squares();
    const double rhs = std::real((h.matrix().adjoint() * h.matrix()).trace()) / static_cast<double>(h.dim());
    const double rel = rhs > 0 ? std::abs(lhs - rhs) / rhs : std::abs(lhs);
    log << fmt::format("parseval {}: sum c^2 = {:.12g}, tr(H^2)/2^(N/2) = {:.12g}, rel err {:.2e}\n", what,
                       lhs, rhs, rel);
    if (rel > parseval_tol) throw NumericalError(fmt::format("Parseval check failed for {}", what), rel);
    return rel;
}

} // namespace

// ------------------------------------------------------------------ OutputDir

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", root_.string(), ec.message()));
}

void OutputDir::write(const std::string& name, std::string_view contents) {
    write_text_file(path(name), contents);
    add_existing(name);
}

void OutputDir::add_existing(const std::string& name) {
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void OutputDir::finish(const ExperimentConfig& config) {
    write("config.txt", config.to_text());
    nlohmann::ordered_json manifest;
    manifest["command"] = config.command;
    nlohmann::ordered_json params;
    for (const auto& [k, v] : config.to_map()) params[k] = v;
    manifest["config"] = params;
    manifest["files"] = nlohmann::ordered_json::array();
    for (const auto& name : files_) {
        const std::string data = read_text_file(path(name));
        manifest["files"].push_back({{"path", name}, {"bytes", data.size()}, {"sha256", sha256_hex(data)}});
    }
    write_text_file(path("manifest.json"), manifest.dump(2) + "\n");
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    std::string out;
    for (unsigned int k = 0; k < len; ++k) out += fmt::format("{:02x}", digest[k]);
    return out;
}

// ------------------------------------------------------------------- commands

void run_command(const ExperimentConfig& config, std::ostream& log) {
    if (config.n_fermions > 16 || std::any_of(config.n_list.begin(), config.n_list.end(),
                                              [](int n) { return n > 16; })) {
        log << "warning: large N runs can take hours and several GB of memory\n";
    }
    const std::string& c = config.command;
    if (c == "sample") return cmd_sample(config, log);
    if (c == "poissonize") return cmd_poissonize(config, log);
    if (c == "correlators") return cmd_correlators(config, log);
    if (c == "decompose") return cmd_decompose(config, log);
    if (c == "metropolis") return cmd_metropolis(config, log);
    if (c == "gram") return cmd_gram(config, log);
    throw ArgumentError(fmt::format("unknown command '{}'", c));
}

void cmd_sample(const ExperimentConfig& c, std::ostream& log) {
    OutputDir out(c.out);
    const CouplingTensor couplings = input_or_member(c, c.index);
    const DenseOperator h = build_hamiltonian(couplings);
    const Spectra s = diagonalize(h);
    std::ostringstream coeffs;
    write_coefficients(coeffs, couplings);
    out.write("coefficients.csv", coeffs.str());
    out.write("spectrum.csv", spectrum_csv(s));
    const GapRatioSample g = gap_ratios(s);
    Summary sum{{"n", std::to_string(c.n_fermions)},
                {"dimension", std::to_string(s.dim())},
                {"couplings", std::to_string(couplings.size())},
                {"trace_h2", format_double(hamiltonian_trace_square(couplings))},
                {"mean_min_ratio", format_double(g.mean_min_ratio())},
                {"degenerate_triples", std::to_string(g.degenerate)}};
    out.write("summary.txt", summary_text(sum));
    out.finish(c);
    log << summary_text(sum);
}

void cmd_poissonize(const ExperimentConfig& c, std::ostream& log) {
    OutputDir out(c.out);
    const EnsembleParams params = c.params();
    const std::size_t samples = c.input ? 1 : c.samples;
    std::optional<EigenvaluePool> pool;
    if (!c.identity_draw) {
        log << fmt::format("building pool of {} N={} Hamiltonians\n", c.pool_size, c.n_fermions);
        pool = build_pool(params, c.pool_size, c.jobs);
        std::ostringstream os;
        write_pool(os, *pool);
        out.write("pool.csv", os.str());
    }

    struct Member {
        GapRatioSample ratios[4][2]; // series x sector
        DeltaHReport delta;
        double nonlocal = 0;
        std::vector<double> levels; // poissonized, both sectors
    };
    static constexpr std::string_view series_names[4] = {"poisson", "original", "poissonized", "relocalized"};
    std::vector<Member> members(samples);
    parallel_for(samples, c.jobs, [&](std::size_t k) {
        const DenseOperator h = build_hamiltonian(input_or_member(c, k));
        Spectra spectra = diagonalize(h);
        const EigenvaluePool member_pool =
            c.identity_draw ? pool_from_spectra(std::span<const Spectra>(&spectra, 1)) : *pool;
        const PoolSampling sampling = c.identity_draw ? PoolSampling::without_replacement : c.sampling;
        Rng resample(c.seed, streams::resample + k);
        const PoissonizedPair pair = poissonize(h, spectra, member_pool, resample, sampling);
        const Spectra ps = pair.poissonized_spectra();
        const FermionExpansion e = fermion_expansion(pair.poissonized);
        const Spectra reloc = diagonalize(truncate_local(e).local);
        Rng ref(c.seed, streams::reference + k);
        const std::size_t half = std::size_t{1} << (c.n_fermions / 2 - 1);
        Member& m = members[k];
        for (int s = 0; s < 2; ++s) {
            const Sector sec = s == 0 ? Sector::even : Sector::odd;
            m.ratios[0][s] = gap_ratios(draw_sorted(member_pool.sector(sec), half, ref, sampling));
            m.ratios[1][s] = gap_ratios(spectra.sector(sec));
            m.ratios[2][s] = gap_ratios(ps.sector(sec));
            m.ratios[3][s] = gap_ratios(reloc.sector(sec));
        }
        m.delta = delta_h_diagnostics(pair);
        m.nonlocal = nonlocal_fraction(e);
        m.levels = ps.all_eigenvalues();
    });

    std::string ratios_csv = "series,sample,sector,ratio\n";
    std::string delta_csv =
        "sample,max_shift_even,max_shift_odd,commutator_norm,delta_norm,relative_norm,nonlocal_fraction\n";
    GapRatioSample pooled[4];
    for (std::size_t k = 0; k < samples; ++k) {
        const Member& m = members[k];
        for (int series = 0; series < 4; ++series)
            for (int s = 0; s < 2; ++s) {
                append_ratios(ratios_csv, series_names[series], k, s == 0 ? Sector::even : Sector::odd,
                              m.ratios[series][s]);
                pooled[series].append(m.ratios[series][s]);
            }
        const DeltaHReport& d = m.delta;
        delta_csv += fmt::format("{},{},{},{},{},{},{}\n", k, format_double(d.max_shift_even),
                                 format_double(d.max_shift_odd), format_double(d.commutator_norm),
                                 format_double(d.delta_norm), format_double(d.relative_norm),
                                 format_double(m.nonlocal));
    }
    out.write("gap_ratios.csv", ratios_csv);
    out.write("delta_h.csv", delta_csv);

    // spectral form factor: ensemble average against the Poisson prediction
    const std::vector<double> sff_times = linear_grid(0, c.sff_t_max, c.t_points);
    std::vector<double> density_source;
    if (pool) {
        density_source = merged(pool->even, pool->odd);
    } else {
        for (const auto& m : members) density_source.insert(density_source.end(), m.levels.begin(), m.levels.end());
    }
    const MeanDensity rho = MeanDensity::from_samples(density_source, c.bins);
    const double dim = std::ldexp(1.0, c.n_fermions / 2);
    std::vector<SFFSeries> averaged, predicted;
    for (double beta : c.betas) {
        SFFSeries avg{beta, sff_times, std::vector<double>(sff_times.size(), 0.0)};
        for (const auto& m : members) {
            const SFFSeries s = sff(m.levels, beta, sff_times);
            for (std::size_t i = 0; i < s.values.size(); ++i) avg.values[i] += s.values[i] / samples;
        }
        averaged.push_back(std::move(avg));
        predicted.push_back(sff_poisson_average(rho, beta, sff_times, dim));
    }
    out.write("sff.csv", sff_csv(averaged));
    out.write("sff_poisson_average.csv", sff_csv(predicted));

    Rng ref_rng(c.seed, streams::reference + (std::uint64_t{1} << 31));
    const RatioReference poisson_ref = reference_ratio_statistic(ReferenceKind::poisson, reference_ratio_count, ref_rng);
    const RatioReference gue_ref = reference_ratio_statistic(ReferenceKind::gue, reference_ratio_count, ref_rng);
    double max_delta_rel = 0, max_comm = 0;
    std::vector<double> nl;
    for (const auto& m : members) {
        max_comm = std::max(max_comm, m.delta.commutator_norm);
        max_delta_rel = std::max(max_delta_rel, m.delta.relative_norm);
        nl.push_back(m.nonlocal);
    }
    Summary sum{{"n", std::to_string(c.n_fermions)},
                {"samples", std::to_string(samples)},
                {"pool_size", pool ? std::to_string(pool->sources) : "own spectrum"},
                {"reference_poisson", fmt::format("{:.4f} +- {:.4f}", poisson_ref.mean, poisson_ref.std_error)},
                {"reference_gue", fmt::format("{:.4f} +- {:.4f}", gue_ref.mean, gue_ref.std_error)}};
    for (int series = 0; series < 4; ++series) {
        sum.emplace_back(fmt::format("mean_min_ratio_{}", series_names[series]),
                         fmt::format("{:.4f} ({} ratios, {} degenerate)", pooled[series].mean_min_ratio(),
                                     pooled[series].ratios.size(), pooled[series].degenerate));
    }
    const MeanError nlm = mean_error(nl);
    sum.emplace_back("nonlocal_fraction", fmt::format("{:.6g} +- {:.2g}", nlm.mean, nlm.std_error));
    sum.emplace_back("max_delta_relative_norm", format_double(max_delta_rel));
    sum.emplace_back("max_commutator_norm", format_double(max_comm));
    out.write("summary.txt", summary_text(sum));
    out.finish(c);
    log << summary_text(sum);
}

void cmd_correlators(const ExperimentConfig& c, std::ostream& log) {
    OutputDir out(c.out);
    const int n = c.n_fermions;
    const DenseOperator h0 = build_hamiltonian(input_or_member(c, c.index));
    const Spectra s0 = diagonalize(h0);
    Spectra s1;
    std::string modified_label;
    if (c.compare) {
        s1 = diagonalize(build_hamiltonian(read_coefficients(*c.compare, n)));
        modified_label = c.compare->string();
    } else {
        log << fmt::format("building pool of {} N={} Hamiltonians\n", c.pool_size, n);
        const EigenvaluePool pool = build_pool(c.params(), c.pool_size, c.jobs);
        Rng rng(c.seed, streams::resample + c.index);
        s1 = poissonize(h0, s0, pool, rng, c.sampling).poissonized_spectra();
        modified_label = "poissonized";
    }
    const EnergyBasis b0(s0), b1(s1);
    const std::vector<double> times = c.times();

    // task t: beta index t / (n + 1); observable t % (n + 1), n = OTOC
    const std::size_t per_beta = static_cast<std::size_t>(n) + 1;
    const std::size_t tasks = c.betas.size() * per_beta;
    std::vector<CorrelatorSeries> orig(tasks), mod(tasks);
    parallel_for(tasks, c.jobs, [&](std::size_t t) {
        const double beta = c.betas[t / per_beta];
        const int obs = static_cast<int>(t % per_beta);
        if (obs == n) {
            orig[t] = otoc(b0, c.fermion_a, c.fermion_b, beta, times);
            mod[t] = otoc(b1, c.fermion_a, c.fermion_b, beta, times);
        } else {
            const DenseOperator psi = majorana_matrix(obs, n);
            orig[t] = two_point(b0, psi, beta, times);
            mod[t] = two_point(b1, psi, beta, times);
            orig[t].label = mod[t].label = fmt::format("psi{}", obs);
        }
    });

    std::string dev_csv = "observable,beta,max_deviation\n";
    std::string dev_t_csv = "observable,beta,t,deviation\n";
    double max_two = 0, max_otoc = 0;
    for (int obs = 0; obs <= n; ++obs) {
        std::vector<CorrelatorSeries> o, m;
        for (std::size_t b = 0; b < c.betas.size(); ++b) {
            const std::size_t t = b * per_beta + static_cast<std::size_t>(obs);
            o.push_back(orig[t]);
            m.push_back(mod[t]);
            const SeriesComparison cmp = compare_series(orig[t], mod[t]);
            (obs == n ? max_otoc : max_two) = std::max(obs == n ? max_otoc : max_two, cmp.max_deviation);
            dev_csv += fmt::format("{},{},{}\n", orig[t].label, format_double(c.betas[b]),
                                   format_double(cmp.max_deviation));
            for (std::size_t i = 0; i < times.size(); ++i) {
                dev_t_csv += fmt::format("{},{},{},{}\n", orig[t].label, format_double(c.betas[b]),
                                         format_double(times[i]), format_double(cmp.deviations[i]));
            }
        }
        const std::string stem = obs == n ? "otoc" : fmt::format("two_point_psi{}", obs);
        std::ostringstream os0, os1;
        write_series(os0, o);
        write_series(os1, m);
        out.write(stem + "_original.csv", os0.str());
        out.write(stem + "_modified.csv", os1.str());
    }
    out.write("deviation.csv", dev_csv);
    out.write("deviation_vs_time.csv", dev_t_csv);

    Summary sum{{"n", std::to_string(n)},
                {"modified", modified_label},
                {"time_window", fmt::format("[0, {}] in units of 1/J, {} points", format_double(c.t_max), times.size())},
                {"otoc_fermions", fmt::format("{},{}", c.fermion_a, c.fermion_b)},
                {"max_deviation_otoc", format_double(max_otoc)},
                {"max_deviation_two_point", format_double(max_two)}};
    const auto beta0 = std::find(c.betas.begin(), c.betas.end(), 0.0);
    if (beta0 != c.betas.end() && !times.empty() && times.front() == 0.0) {
        const std::size_t t = static_cast<std::size_t>(beta0 - c.betas.begin()) * per_beta + n;
        sum.emplace_back("otoc_t0_beta0", format_double(orig[t].values.front().real()));
    }
    out.write("summary.txt", summary_text(sum));
    out.finish(c);
    log << summary_text(sum);
}

void cmd_decompose(const ExperimentConfig& c, std::ostream& log) {
    OutputDir out(c.out);
    std::string spectrum_rows = "n,p,absolute,fraction\n";
    Summary sum;

    if (c.input) {
        const DenseOperator h = build_hamiltonian(read_coefficients(*c.input, c.n_fermions));
        const FermionExpansion e = fermion_expansion(h);
        const double rel = parseval_check(e, h, log, c.input->string());
        std::ostringstream os;
        write_expansion(os, e);
        out.write("expansion.csv", os.str());
        const SizeSpectrum ss = size_spectrum(e);
        for (std::size_t p = 0; p < ss.absolute.size(); ++p) {
            spectrum_rows += fmt::format("{},{},{},{}\n", c.n_fermions, p, format_double(ss.absolute[p]),
                                         format_double(ss.fraction[p]));
        }
        sum = {{"n", std::to_string(c.n_fermions)},
               {"terms", std::to_string(e.size())},
               {"parseval_relative_error", format_double(rel)},
               {"nonlocal_fraction", format_double(nonlocal_fraction(e))}};
    } else {
        const std::vector<int> sizes = c.n_list.empty() ? std::vector<int>{c.n_fermions} : c.n_list;
        std::string samples_csv = "n,sample,nonlocal_fraction,delta_relative_norm\n";
        std::string trend_csv =
            "n,samples,mean_nonlocal_fraction,std_error,mean_delta_relative_norm,ratio_to_previous,two_pow_minus_n_over_4\n";
        double previous = std::nan("");
        for (int n : sizes) {
            ExperimentConfig cn = c;
            cn.n_fermions = n;
            log << fmt::format("N={}: pool of {}, {} Poissonized samples\n", n, c.pool_size, c.samples);
            const EigenvaluePool pool = build_pool(cn.params(), c.pool_size, c.jobs);
            std::vector<double> nl(c.samples), dr(c.samples), parseval(c.samples);
            std::vector<SizeSpectrum> spectra(c.samples);
            parallel_for(c.samples, c.jobs, [&](std::size_t k) {
                const DenseOperator h = build_hamiltonian(member_couplings(cn, k));
                Rng rng(c.seed, streams::resample + k);
                const PoissonizedPair pair = poissonize(h, pool, rng, c.sampling);
                const FermionExpansion e = fermion_expansion(pair.poissonized);
                const double lhs = e.sum_squares();
                const double rhs = std::pow(pair.poissonized.frobenius_norm(), 2) / static_cast<double>(h.dim());
                parseval[k] = std::abs(lhs - rhs) / rhs;
                nl[k] = nonlocal_fraction(e);
                dr[k] = delta_h_diagnostics(pair).relative_norm;
                spectra[k] = size_spectrum(e);
            });
            const double worst = *std::max_element(parseval.begin(), parseval.end());
            log << fmt::format("parseval N={}: worst relative error {:.2e} over {} samples\n", n, worst, c.samples);
            if (worst > parseval_tol) throw NumericalError(fmt::format("Parseval check failed at N={}", n), worst);
            for (std::size_t k = 0; k < c.samples; ++k) {
                samples_csv += fmt::format("{},{},{},{}\n", n, k, format_double(nl[k]), format_double(dr[k]));
            }
            for (int p = 0; p <= n; ++p) {
                double a = 0, f = 0;
                for (const auto& s : spectra) {
                    a += s.absolute[p] / c.samples;
                    f += s.fraction[p] / c.samples;
                }
                spectrum_rows += fmt::format("{},{},{},{}\n", n, p, format_double(a), format_double(f));
            }
            const MeanError m = mean_error(nl);
            const MeanError d = mean_error(dr);
            trend_csv += fmt::format("{},{},{},{},{},{},{}\n", n, c.samples, format_double(m.mean),
                                     format_double(m.std_error), format_double(d.mean),
                                     format_double(m.mean / previous), format_double(std::pow(2.0, -n / 4.0)));
            sum.emplace_back(fmt::format("nonlocal_fraction_n{}", n), fmt::format("{:.6g} +- {:.2g}", m.mean, m.std_error));
            sum.emplace_back(fmt::format("parseval_worst_n{}", n), format_double(worst));
            previous = m.mean;
        }
        out.write("nonlocal.csv", samples_csv);
        out.write("trend.csv", trend_csv);
    }
    out.write("size_spectrum.csv", spectrum_rows);
    out.write("summary.txt", summary_text(sum));
    out.finish(c);
    log << summary_text(sum);
}

void cmd_metropolis(const ExperimentConfig& c, std::ostream& log) {
    OutputDir out(c.out);
    RunOptions o;
    o.scope = c.scope;
    o.checkpoint = out.path("checkpoint.txt");
    o.checkpoint_every = c.checkpoint_every;
    o.resume = c.resume;
    if (c.stop_after > 0) o.stop_after = c.stop_after;
    if (c.input) o.initial = read_coefficients(*c.input, c.n_fermions);
    log << fmt::format("metropolis N={} stages {} sigma0 {} scope {}{}\n", c.n_fermions,
                       c.schedule.stages_text(), format_double(c.schedule.sigma0), scope_name(c.scope),
                       c.resume ? " (resuming)" : "");
    const RunResult r = run_schedule(c.params(), c.schedule, o);
    if (std::filesystem::exists(out.path("checkpoint.txt"))) out.add_existing("checkpoint.txt");

    std::ostringstream init;
    write_coefficients(init, r.initial);
    out.write("initial_coefficients.csv", init.str());
    out.write("trajectory.csv", trajectory_csv(r.trajectory));
    if (!r.completed) {
        log << fmt::format("stopped after {} steps; rerun with --resume to continue\n", r.state.steps);
        out.finish(c);
        return;
    }
    std::ostringstream fin;
    write_coefficients(fin, r.final);
    out.write("coefficients.csv", fin.str());

    const Spectra s0 = diagonalize(build_hamiltonian(r.initial));
    const Spectra s1 = diagonalize(build_hamiltonian(r.final));
    out.write("spectrum_initial.csv", spectrum_csv(s0));
    out.write("spectrum_final.csv", spectrum_csv(s1));
    const auto e0 = s0.all_eigenvalues(), e1 = s1.all_eigenvalues();
    std::string stats = "quantity,initial,final\n";
    stats += fmt::format("mean_min_ratio,{},{}\n", format_double(gap_ratios(s0).mean_min_ratio()),
                         format_double(gap_ratios(s1).mean_min_ratio()));
    // f at beta_D = 1, i.e. minus the log-Vandermonde
    stats += fmt::format("objective_beta1,{},{}\n", format_double(objective(build_hamiltonian(r.initial), 1.0, c.scope)),
                         format_double(objective(build_hamiltonian(r.final), 1.0, c.scope)));
    stats += fmt::format("trace_h2,{},{}\n", format_double(hamiltonian_trace_square(r.initial)),
                         format_double(hamiltonian_trace_square(r.final)));
    stats += fmt::format("ks_distance,0,{}\n", format_double(ks_distance(e0, e1)));
    stats += fmt::format("max_trace_drift,0,{}\n", format_double(r.max_trace_drift));
    stats += fmt::format("accepted_steps,0,{}\n", r.state.total_accepts);
    out.write("statistics.csv", stats);
    out.finish(c);
    log << stats;
}

void cmd_gram(const ExperimentConfig& c, std::ostream& log) {
    OutputDir out(c.out);
    std::vector<std::vector<double>> spectra;
    if (c.input) {
        spectra.push_back(diagonalize(build_hamiltonian(read_coefficients(*c.input, c.n_fermions))).all_eigenvalues());
    } else {
        log << fmt::format("building pool of {} N={} Hamiltonians\n", c.pool_size, c.n_fermions);
        const EigenvaluePool pool = build_pool(c.params(), c.pool_size, c.jobs);
        for (std::size_t k = 0; k < c.samples; ++k) {
            Rng rng(c.seed, streams::resample + k);
            spectra.push_back(poisson_levels(pool, rng, c.sampling));
        }
    }
    std::vector<GramReport> reports(spectra.size());
    parallel_for(spectra.size(), c.jobs,
                 [&](std::size_t k) { reports[k] = tfd_gram(spectra[k], c.gram_beta, c.t1, c.omega); });

    std::ostringstream g;
    write_gram(g, reports.front().gram);
    out.write("gram.csv", g.str());
    std::string sv = "k,value\n";
    for (std::size_t k = 0; k < reports.front().singular_values.size(); ++k) {
        sv += fmt::format("{},{}\n", k, format_double(reports.front().singular_values[k]));
    }
    out.write("singular_values.csv", sv);
    std::string rep = "sample,rank,distinct_levels,moment2,target2,moment3,target3\n";
    std::vector<double> r2, r3;
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const GramReport& r = reports[k];
        const std::size_t distinct = distinct_levels(spectra[k]);
        rep += fmt::format("{},{},{},{},{},{},{}\n", k, r.rank, distinct, format_double(r.moment2),
                           format_double(r.target2), format_double(r.moment3), format_double(r.target3));
        if (std::isfinite(r.moment2)) r2.push_back(r.moment2 / r.target2);
        if (std::isfinite(r.moment3)) r3.push_back(r.moment3 / r.target3);
    }
    out.write("gram_report.csv", rep);
    const MeanError m2 = mean_error(r2), m3 = mean_error(r3);
    Summary sum{{"n", std::to_string(c.n_fermions)},
                {"dimension", std::to_string(spectra.front().size())},
                {"omega", std::to_string(c.omega)},
                {"beta", format_double(c.gram_beta)},
                {"t1", format_double(c.t1)},
                {"rank_sample0", std::to_string(reports.front().rank)},
                {"moment2_over_target", fmt::format("{:.5f} +- {:.5f}", m2.mean, m2.std_error)},
                {"moment3_over_target", fmt::format("{:.5f} +- {:.5f}", m3.mean, m3.std_error)}};
    out.write("summary.txt", summary_text(sum));
    out.finish(c);
    log << summary_text(sum);
}

} // namespace syklab
