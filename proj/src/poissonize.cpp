#include "syklab/poissonize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "syklab/errors.hpp"
#include "syklab/io.hpp"
#include "syklab/parallel.hpp"

namespace syklab {

namespace {

Matrix rotate_diagonal(const SectorSpectrum& s, const Eigen::VectorXd& diag) {
    return s.eigenvectors * diag.asDiagonal() * s.eigenvectors.adjoint();
}

} // namespace

EigenvaluePool build_pool(const EnsembleParams& params, std::size_t members, int jobs) {
    params.validate();
    if (members < 1) throw ArgumentError("pool needs at least one source Hamiltonian");
    std::vector<Spectra> spectra(members);
    parallel_for(members, jobs, [&](std::size_t k) {
        Rng rng(params.seed, streams::pool + k);
        const DenseOperator h = build_hamiltonian(sample_couplings(params, rng));
        const SectorBlocks blocks = sector_split(h);
        Spectra s;
        s.n_fermions = params.n_fermions;
        s.even.sector = Sector::even;
        s.odd.sector = Sector::odd;
        Eigen::SelfAdjointEigenSolver<Matrix> even(blocks.even, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Matrix> odd(blocks.odd, Eigen::EigenvaluesOnly);
        s.even.eigenvalues = even.eigenvalues();
        s.odd.eigenvalues = odd.eigenvalues();
        spectra[k] = std::move(s);
    });
    return pool_from_spectra(spectra);
}

EigenvaluePool pool_from_spectra(std::span<const Spectra> spectra) {
    if (spectra.empty()) throw ArgumentError("pool needs at least one spectrum");
    EigenvaluePool pool;
    pool.n_fermions = spectra.front().n_fermions;
    pool.sources = spectra.size();
    for (const Spectra& s : spectra) {
        if (s.n_fermions != pool.n_fermions) throw ArgumentError("pool spectra of mixed N");
        pool.even.insert(pool.even.end(), s.even.eigenvalues.begin(), s.even.eigenvalues.end());
        pool.odd.insert(pool.odd.end(), s.odd.eigenvalues.begin(), s.odd.eigenvalues.end());
    }
    std::sort(pool.even.begin(), pool.even.end());
    std::sort(pool.odd.begin(), pool.odd.end());
    return pool;
}

void write_pool(std::ostream& os, const EigenvaluePool& pool) {
    os << "sector,eigenvalue\n";
    for (Sector s : {Sector::even, Sector::odd}) {
        for (double e : pool.sector(s)) os << sector_name(s) << ',' << format_double(e) << '\n';
    }
}

void write_pool(const std::filesystem::path& path, const EigenvaluePool& pool) {
    std::ostringstream os;
    write_pool(os, pool);
    write_text_file(path, os.str());
}

EigenvaluePool read_pool(std::istream& is, int n_fermions) {
    check_fermion_count(n_fermions);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "sector,eigenvalue") {
        throw ArgumentError("pool file must start with 'sector,eigenvalue'");
    }
    EigenvaluePool pool;
    pool.n_fermions = n_fermions;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(trim(line), ',');
        if (f.size() != 2) throw ArgumentError(fmt::format("malformed pool row '{}'", line));
        const double e = parse_double(f[1]);
        if (f[0] == "even") {
            pool.even.push_back(e);
        } else if (f[0] == "odd") {
            pool.odd.push_back(e);
        } else {
            throw ArgumentError(fmt::format("unknown sector '{}'", f[0]));
        }
    }
    const std::size_t half = std::size_t{1} << (n_fermions / 2 - 1);
    if (pool.even.empty() || pool.even.size() != pool.odd.size() || pool.even.size() % half != 0) {
        throw ArgumentError(fmt::format("pool sizes {}/{} do not fit N={}", pool.even.size(),
                                        pool.odd.size(), n_fermions));
    }
    std::sort(pool.even.begin(), pool.even.end());
    std::sort(pool.odd.begin(), pool.odd.end());
    return pool;
}

EigenvaluePool read_pool(const std::filesystem::path& path, int n_fermions) {
    std::istringstream is(read_text_file(path));
    return read_pool(is, n_fermions);
}

std::vector<double> draw_sorted(std::span<const double> pool, std::size_t count, Rng& rng,
                                PoolSampling sampling) {
    if (pool.empty()) throw ArgumentError("empty eigenvalue pool");
    std::vector<double> out;
    out.reserve(count);
    if (sampling == PoolSampling::with_replacement) {
        for (std::size_t k = 0; k < count; ++k) out.push_back(pool[rng.below(pool.size())]);
    } else {
        if (count > pool.size()) {
            throw ArgumentError(fmt::format(
                "cannot draw {} values without replacement from a pool of {}", count, pool.size()));
        }
        std::vector<double> scratch(pool.begin(), pool.end());
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t j = k + rng.below(scratch.size() - k);
            std::swap(scratch[k], scratch[j]);
            out.push_back(scratch[k]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Spectra PoissonizedPair::poissonized_spectra() const {
    Spectra s = spectra;
    s.even.eigenvalues = even_replacement;
    s.odd.eigenvalues = odd_replacement;
    return s;
}

PoissonizedPair poissonize(const DenseOperator& h, const EigenvaluePool& pool, Rng& rng,
                           PoolSampling sampling) {
    return poissonize(h, diagonalize(h), pool, rng, sampling);
}

PoissonizedPair poissonize(const DenseOperator& h, Spectra spectra, const EigenvaluePool& pool,
                           Rng& rng, PoolSampling sampling) {
    if (pool.n_fermions != h.fermions() || spectra.n_fermions != h.fermions()) {
        throw ArgumentError(fmt::format("pool for N={} applied to an N={} Hamiltonian",
                                        pool.n_fermions, h.fermions()));
    }
    SectorBlocks delta;
    delta.n_fermions = h.fermions();
    delta.even_basis = spectra.even.basis;
    delta.odd_basis = spectra.odd.basis;
    Eigen::VectorXd replaced[2];
    for (Sector s : {Sector::even, Sector::odd}) {
        const SectorSpectrum& sec = spectra.sector(s);
        const auto draws = draw_sorted(pool.sector(s), static_cast<std::size_t>(sec.size()), rng,
                                       sampling);
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(draws.data(), sec.size());
        (s == Sector::even ? delta.even : delta.odd) = rotate_diagonal(sec, d - sec.eigenvalues);
        replaced[s == Sector::even ? 0 : 1] = std::move(d);
    }
    DenseOperator h_prime = h + reassemble(delta);
    return PoissonizedPair{h, std::move(h_prime), std::move(spectra), std::move(replaced[0]),
                           std::move(replaced[1])};
}

DeltaHReport delta_h_diagnostics(const PoissonizedPair& pair) {
    DeltaHReport r;
    r.max_shift_even =
        (pair.even_replacement - pair.spectra.even.eigenvalues).cwiseAbs().maxCoeff();
    r.max_shift_odd = (pair.odd_replacement - pair.spectra.odd.eigenvalues).cwiseAbs().maxCoeff();
    const Matrix& h = pair.original.matrix();
    const Matrix dh = pair.poissonized.matrix() - h;
    r.delta_norm = dh.norm();
    r.commutator_norm = (h * dh - dh * h).norm();
    const double hp = pair.poissonized.frobenius_norm();
    r.relative_norm = hp > 0 ? r.delta_norm / hp : 0.0;
    return r;
}

} // namespace syklab
