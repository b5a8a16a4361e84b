#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "syklab/spectral.hpp"

namespace syklab {

// sum_n exp(-z E_n)
cplx partition_function(std::span<const double> levels, cplx z);
cplx partition_function(const Spectra& spectra, cplx z);

// Full-space eigenbasis assembled from the sector blocks: the columns of U
// are the even-sector eigenvectors followed by the odd ones, embedded at
// their basis rows. Needed because single Majoranas connect the sectors.
class EnergyBasis {
public:
    explicit EnergyBasis(const Spectra& spectra);

    int fermions() const { return n_; }
    Eigen::Index dim() const { return energies_.size(); }
    const Eigen::VectorXd& energies() const { return energies_; }
    const Matrix& unitary() const { return u_; }

    // U^dagger O U
    Matrix to_energy_basis(const DenseOperator& o) const;

private:
    int n_;
    Eigen::VectorXd energies_;
    Matrix u_;
};

struct CorrelatorSeries {
    std::string label;
    double beta = 0;
    std::vector<double> times;
    std::vector<cplx> values;
};

// (1/Z) tr(e^{-beta H} O(t) O(0)) with O(t) = e^{iHt} O e^{-iHt}.
CorrelatorSeries two_point(const EnergyBasis& basis, const DenseOperator& o, double beta,
                           std::span<const double> times);

// (1/Z) tr(W psi_a(t) W psi_b W psi_a(t) W psi_b), W = e^{-beta H / 4}.
CorrelatorSeries otoc(const EnergyBasis& basis, int a, int b, double beta,
                      std::span<const double> times);

struct SeriesComparison {
    double max_deviation = 0;
    std::vector<double> deviations; // |x(t) - y(t)| per grid point
};

SeriesComparison compare_series(const CorrelatorSeries& x, const CorrelatorSeries& y);

// Normalized overlaps of time-evolved TFD states,
// G_jk = Z_{beta - i(t_j - t_k)} / Z_beta with t_j = j * t1.
struct GramReport {
    double beta = 0;
    double t1 = 0;
    int omega = 0;
    Matrix gram;
    std::vector<double> singular_values; // descending
    int rank = 0;                        // singular values > 1e-8 * largest
    // Cyclic moments G_{j1 j2} G_{j2 j3} ... G_{jn j1} averaged over tuples of
    // distinct indices, with their targets Z_{n beta} / Z_beta^n. NaN when
    // omega < n.
    double moment2 = 0, target2 = 0;
    double moment3 = 0, target3 = 0;
};

inline constexpr double gram_rank_threshold = 1e-8;

GramReport tfd_gram(std::span<const double> levels, double beta, double t1, int omega);

// "beta,t,re,im" rows.
void write_series(std::ostream& os, std::span<const CorrelatorSeries> series);
void write_series(const std::filesystem::path& path, std::span<const CorrelatorSeries> series);
// "j,k,re,im" rows.
void write_gram(std::ostream& os, const Matrix& gram);
void write_gram(const std::filesystem::path& path, const Matrix& gram);

} // namespace syklab
