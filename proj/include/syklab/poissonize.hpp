#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "syklab/spectral.hpp"
#include "syklab/syk.hpp"

namespace syklab {

// Sorted per-sector eigenvalues pooled over `sources` independent draws.
struct EigenvaluePool {
    int n_fermions = 0;
    std::size_t sources = 0;
    std::vector<double> even;
    std::vector<double> odd;

    const std::vector<double>& sector(Sector s) const { return s == Sector::even ? even : odd; }
};

// Member k is drawn from Rng(params.seed, streams::pool + k), so the pool does
// not depend on `jobs`.
EigenvaluePool build_pool(const EnsembleParams& params, std::size_t members, int jobs = 1);

// Pool from spectra already at hand (M = spectra.size()).
EigenvaluePool pool_from_spectra(std::span<const Spectra> spectra);

void write_pool(std::ostream& os, const EigenvaluePool& pool);
void write_pool(const std::filesystem::path& path, const EigenvaluePool& pool);
// Header "sector,eigenvalue"; `sources` is not recorded and is set to 0.
EigenvaluePool read_pool(std::istream& is, int n_fermions);
EigenvaluePool read_pool(const std::filesystem::path& path, int n_fermions);

enum class PoolSampling { with_replacement, without_replacement };

// `count` values from the pool, sorted ascending.
std::vector<double> draw_sorted(std::span<const double> pool, std::size_t count, Rng& rng,
                                PoolSampling sampling);

struct PoissonizedPair {
    DenseOperator original;
    DenseOperator poissonized;
    // U and D of the original per sector.
    Spectra spectra;
    Eigen::VectorXd even_replacement; // D' per sector, ascending
    Eigen::VectorXd odd_replacement;

    const Eigen::VectorXd& replacement(Sector s) const {
        return s == Sector::even ? even_replacement : odd_replacement;
    }
    // Same eigenvectors with D' in place of D.
    Spectra poissonized_spectra() const;
};

// Even sector first, then odd, each with its own draws. The rank-k eigenvalue
// of a sector is replaced by the rank-k draw, and H' = H + U (D' - D) U^dagger,
// so an unchanged spectrum returns H itself.
PoissonizedPair poissonize(const DenseOperator& h, const EigenvaluePool& pool, Rng& rng,
                           PoolSampling sampling = PoolSampling::with_replacement);
PoissonizedPair poissonize(const DenseOperator& h, Spectra spectra, const EigenvaluePool& pool,
                           Rng& rng, PoolSampling sampling = PoolSampling::with_replacement);

struct DeltaHReport {
    double max_shift_even = 0; // max |D' - D|
    double max_shift_odd = 0;
    double commutator_norm = 0; // ||[H, dH]||_F
    double delta_norm = 0;      // ||dH||_F
    double relative_norm = 0;   // ||dH||_F / ||H'||_F
};

DeltaHReport delta_h_diagnostics(const PoissonizedPair& pair);

} // namespace syklab
