#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "syklab/pauli.hpp"
#include "syklab/rng.hpp"

namespace syklab {

// Eigen-decomposition of one parity block: block = V diag(E) V^dagger with
// eigenvalues ascending and column k of V paired with E[k]. `basis` lists the
// full-space basis states spanned by the block, in block order.
struct SectorSpectrum {
    Sector sector = Sector::even;
    Eigen::VectorXd eigenvalues;
    Matrix eigenvectors;
    std::vector<Eigen::Index> basis;

    Eigen::Index size() const { return eigenvalues.size(); }
};

struct Spectra {
    int n_fermions = 0;
    SectorSpectrum even;
    SectorSpectrum odd;

    const SectorSpectrum& sector(Sector s) const { return s == Sector::even ? even : odd; }
    Eigen::Index dim() const { return even.size() + odd.size(); }
    // Both sectors merged, ascending.
    std::vector<double> all_eigenvalues() const;
};

// Full Hermitian decomposition of each parity block. Throws ArgumentError for
// non-Hermitian input, StructureError for parity-odd input and
// NumericalError when ||V D V^dagger - block||_F / ||block||_F > 1e-10.
Spectra diagonalize(const DenseOperator& h);

// Eigenvalues only (both sectors merged, ascending); skips the residual check.
std::vector<double> eigenvalues_only(const DenseOperator& h);
std::vector<double> sector_eigenvalues(const DenseOperator& h, Sector s);

// ------------------------------------------------------------ gap ratios

// r_i = (l_{i+1} - l_i) / (l_i - l_{i-1}) over consecutive triples of one
// ascending level sequence. A triple whose gaps fall below
// degeneracy_floor * bandwidth is left out and counted.
struct GapRatioSample {
    std::vector<double> ratios;
    std::size_t degenerate = 0;

    void append(const GapRatioSample& other);
    // <min(r, 1/r)>
    double mean_min_ratio() const;
};

inline constexpr double degeneracy_floor = 1e-14;

GapRatioSample gap_ratios(std::span<const double> ascending);
GapRatioSample gap_ratios(const SectorSpectrum& s);
// Per-sector ratios of both sectors, pooled afterwards.
GapRatioSample gap_ratios(const Spectra& s);

enum class ReferenceKind { poisson, gue };

struct RatioReference {
    double mean = 0;
    double std_error = 0;
    std::size_t count = 0;
};

// Monte Carlo estimate of <min(r, 1/r)>. Poisson: sorted i.i.d. uniform
// levels. GUE: complex Hermitian Gaussian matrices of size gue_matrix_size.
RatioReference reference_ratio_statistic(ReferenceKind kind, std::size_t min_ratios, Rng& rng);

inline constexpr int gue_matrix_size = 12;

// Number of levels left after merging each ascending level into its
// predecessor when closer than rel_tol * bandwidth.
std::size_t distinct_levels(std::span<const double> ascending, double rel_tol = 1e-10);

// Largest |F_a - F_b| over the two empirical distribution functions.
double ks_distance(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------- mean density

// Normalized histogram density, linearly interpolated between bin centers
// (flat within the outer half bins) and renormalized to unit mass.
class MeanDensity {
public:
    static constexpr int default_bins = 64;

    static MeanDensity from_samples(std::span<const double> samples, int bins = default_bins);
    // Bin values over [lo, hi]; the interpolant must integrate to 1 within
    // 1e-9 or ArgumentError is thrown.
    static MeanDensity from_table(double lo, double hi, std::vector<double> bin_values);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int bins() const { return static_cast<int>(bin_values_.size()); }
    const std::vector<double>& bin_values() const { return bin_values_; }

    double pdf(double e) const;
    double mass() const;
    // int rho(E) exp(-z E) dE for complex z.
    cplx transform(cplx z) const;

private:
    MeanDensity(double lo, double hi, std::vector<double> bin_values);

    double lo_, hi_;
    std::vector<double> bin_values_;
    std::vector<double> nodes_x_, nodes_y_;
};

// ------------------------------------------------------------------ SFF

struct SFFSeries {
    double beta = 0;
    std::vector<double> times;
    std::vector<double> values;
};

// |sum_n exp(-(beta + i t) E_n)|^2 over the given levels.
SFFSeries sff(std::span<const double> levels, double beta, std::span<const double> times);
SFFSeries sff(const Spectra& spectra, double beta, std::span<const double> times);

// |dim * rho_hat(beta - i t)|^2 + dim * rho_hat(2 beta): the Poisson-ensemble
// average with the disconnected and plateau terms both taken under the mean
// density.
SFFSeries sff_poisson_average(const MeanDensity& density, double beta,
                              std::span<const double> times, double dim);

// Evenly spaced grid of `points` values on [t0, t1].
std::vector<double> linear_grid(double t0, double t1, std::size_t points);

// ------------------------------------------- Poisson n-point combinatorics

// One coincidence pattern of the n level indices: a set partition of
// {0..n-1}. Each block contributes rho(E_first) times deltas tying the other
// members of the block to E_first.
struct PartitionTerm {
    std::vector<std::vector<int>> blocks;
    double weight = 0; // (dim)_r / dim^n, r = number of blocks
};

struct MomentDecomposition {
    int order = 0;
    double dim = 0;
    std::vector<PartitionTerm> terms;

    double total_weight() const;
    // Weight of the single-block (fully connected) term: dim^{1-n}.
    double connected_weight() const;
    // Probability that n levels picked from a Poisson spectrum with discrete
    // mean density `atoms` land on the given atom indices.
    double atom_probability(std::span<const double> atoms, std::span<const int> which) const;
};

inline constexpr int max_analytic_moment = 4;

// Throws ArgumentError for n > 4 (use Monte Carlo) or n < 1.
MomentDecomposition poisson_moment(int n, double dim);

} // namespace syklab
