#include "syklab/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "syklab/errors.hpp"
#include "syklab/io.hpp"

namespace syklab {

namespace {

void check_beta(double beta) {
    if (!(beta >= 0) || !std::isfinite(beta)) throw ArgumentError("beta must be finite and >= 0");
}

// exp(-beta (E - E_min)); the shift cancels in every normalized quantity.
Eigen::VectorXd boltzmann(const Eigen::VectorXd& e, double beta) {
    const double e0 = e.minCoeff();
    return (-beta * (e.array() - e0)).exp().matrix();
}

Eigen::VectorXcd phases(const Eigen::VectorXd& e, double t) {
    Eigen::VectorXcd p(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) p[k] = std::polar(1.0, e[k] * t);
    return p;
}

} // namespace

cplx partition_function(std::span<const double> levels, cplx z) {
    cplx sum = 0;
    for (double e : levels) sum += std::exp(-z * e);
    return sum;
}

cplx partition_function(const Spectra& spectra, cplx z) {
    const auto levels = spectra.all_eigenvalues();
    return partition_function(levels, z);
}

// --------------------------------------------------------------- EnergyBasis

EnergyBasis::EnergyBasis(const Spectra& spectra) : n_(spectra.n_fermions) {
    const Eigen::Index dim = spectra.dim();
    const Eigen::Index ne = spectra.even.size();
    if (spectra.even.eigenvectors.cols() != ne || spectra.odd.eigenvectors.cols() != spectra.odd.size()) {
        throw ArgumentError("energy basis needs eigenvectors for both sectors");
    }
    energies_.resize(dim);
    energies_ << spectra.even.eigenvalues, spectra.odd.eigenvalues;
    u_ = Matrix::Zero(dim, dim);
    for (const SectorSpectrum* s : {&spectra.even, &spectra.odd}) {
        const Eigen::Index offset = s->sector == Sector::even ? 0 : ne;
        for (std::size_t r = 0; r < s->basis.size(); ++r) {
            u_.block(s->basis[r], offset, 1, s->size()) =
                s->eigenvectors.row(static_cast<Eigen::Index>(r));
        }
    }
}

Matrix EnergyBasis::to_energy_basis(const DenseOperator& o) const {
    if (o.dim() != dim()) {
        throw ArgumentError(fmt::format("operator of dimension {} on a {}-dimensional basis", o.dim(), dim()));
    }
    return u_.adjoint() * o.matrix() * u_;
}

// ---------------------------------------------------------------- correlators

CorrelatorSeries two_point(const EnergyBasis& basis, const DenseOperator& o, double beta,
                           std::span<const double> times) {
    check_beta(beta);
    const Matrix oe = basis.to_energy_basis(o);
    const Matrix weights = oe.cwiseProduct(oe.transpose()); // O_mn O_nm
    const Eigen::VectorXd& e = basis.energies();
    const Eigen::VectorXd w = boltzmann(e, beta);
    const double z = w.sum();
    CorrelatorSeries out;
    out.beta = beta;
    out.times.assign(times.begin(), times.end());
    for (double t : times) {
        const Eigen::VectorXcd v = weights * phases(e, -t);
        const Eigen::VectorXcd left = w.cast<cplx>().cwiseProduct(phases(e, t));
        out.values.push_back(left.cwiseProduct(v).sum() / z);
    }
    return out;
}

CorrelatorSeries otoc(const EnergyBasis& basis, int a, int b, double beta,
                      std::span<const double> times) {
    check_beta(beta);
    if (a == b) throw ArgumentError(fmt::format("OTOC needs two distinct fermions, got {} twice", a));
    const int n = basis.fermions();
    const Matrix ae = basis.to_energy_basis(majorana_matrix(a, n));
    const Matrix be = basis.to_energy_basis(majorana_matrix(b, n));
    const Eigen::VectorXd& e = basis.energies();
    const Eigen::VectorXd w4 = boltzmann(e, beta / 4);
    const double z = w4.array().pow(4).sum();
    CorrelatorSeries out;
    out.label = fmt::format("otoc_{}_{}", a, b);
    out.beta = beta;
    out.times.assign(times.begin(), times.end());
    for (double t : times) {
        const Eigen::VectorXcd left = w4.cast<cplx>().cwiseProduct(phases(e, t));
        const Eigen::VectorXcd right = w4.cast<cplx>().cwiseProduct(phases(e, -t));
        const Matrix x = (left.asDiagonal() * ae * right.asDiagonal()) * be;
        out.values.push_back(x.cwiseProduct(x.transpose()).sum() / z);
    }
    return out;
}

SeriesComparison compare_series(const CorrelatorSeries& x, const CorrelatorSeries& y) {
    if (x.times != y.times || x.values.size() != x.times.size() || y.values.size() != y.times.size()) {
        throw ArgumentError("series are not on the same time grid");
    }
    SeriesComparison c;
    for (std::size_t k = 0; k < x.values.size(); ++k) {
        const double d = std::abs(x.values[k] - y.values[k]);
        c.deviations.push_back(d);
        c.max_deviation = std::max(c.max_deviation, d);
    }
    return c;
}

// ----------------------------------------------------------------------- Gram

GramReport tfd_gram(std::span<const double> levels, double beta, double t1, int omega) {
    check_beta(beta);
    if (!(t1 > 0)) throw ArgumentError("Gram time spacing must be positive");
    if (omega < 1) throw ArgumentError("Gram matrix needs at least one state");
    if (levels.empty()) throw ArgumentError("Gram matrix of an empty spectrum");
    const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(levels.data(), levels.size());
    const Eigen::VectorXd w = boltzmann(e, beta);
    const double z = w.sum();

    GramReport r;
    r.beta = beta;
    r.t1 = t1;
    r.omega = omega;
    // G = V^dagger diag(w) V / Z with V_{m j} = exp(-i E_m t_j)
    Matrix v(e.size(), omega);
    for (int j = 0; j < omega; ++j) v.col(j) = phases(e, -t1 * j);
    r.gram = v.adjoint() * (w / z).cast<cplx>().asDiagonal() * v;
    r.gram = 0.5 * (r.gram + r.gram.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> solver(r.gram, Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
        r.singular_values.push_back(std::abs(solver.eigenvalues()[k]));
    }
    std::sort(r.singular_values.rbegin(), r.singular_values.rend());
    const double cut = gram_rank_threshold * r.singular_values.front();
    r.rank = static_cast<int>(std::count_if(r.singular_values.begin(), r.singular_values.end(),
                                            [cut](double s) { return s > cut; }));

    r.target2 = w.array().square().sum() / (z * z);
    r.target3 = w.array().cube().sum() / (z * z * z);
    const Matrix& g = r.gram;
    if (omega >= 2) {
        double s = 0;
        for (int j = 0; j < omega; ++j)
            for (int k = 0; k < omega; ++k)
                if (j != k) s += std::norm(g(j, k));
        r.moment2 = s / (static_cast<double>(omega) * (omega - 1));
    } else {
        r.moment2 = std::numeric_limits<double>::quiet_NaN();
    }
    if (omega >= 3) {
        double s = 0;
        for (int j = 0; j < omega; ++j)
            for (int k = 0; k < omega; ++k) {
                if (k == j) continue;
                const cplx gjk = g(j, k);
                for (int l = 0; l < omega; ++l) {
                    if (l == j || l == k) continue;
                    s += std::real(gjk * g(k, l) * g(l, j));
                }
            }
        r.moment3 = s / (static_cast<double>(omega) * (omega - 1) * (omega - 2));
    } else {
        r.moment3 = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

// ---------------------------------------------------------------------- export

void write_series(std::ostream& os, std::span<const CorrelatorSeries> series) {
    os << "beta,t,re,im\n";
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            os << format_double(s.beta) << ',' << format_double(s.times[k]) << ','
               << format_double(s.values[k].real()) << ',' << format_double(s.values[k].imag()) << '\n';
        }
    }
}

void write_series(const std::filesystem::path& path, std::span<const CorrelatorSeries> series) {
    std::ostringstream os;
    write_series(os, series);
    write_text_file(path, os.str());
}

void write_gram(std::ostream& os, const Matrix& gram) {
    os << "j,k,re,im\n";
    for (Eigen::Index j = 0; j < gram.rows(); ++j)
        for (Eigen::Index k = 0; k < gram.cols(); ++k)
            os << j << ',' << k << ',' << format_double(gram(j, k).real()) << ','
               << format_double(gram(j, k).imag()) << '\n';
}

void write_gram(const std::filesystem::path& path, const Matrix& gram) {
    std::ostringstream os;
    write_gram(os, gram);
    write_text_file(path, os.str());
}

} // namespace syklab
