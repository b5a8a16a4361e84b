#include "syklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "syklab/errors.hpp"

namespace syklab {

namespace {

constexpr double hermitian_tol = 1e-12;
constexpr double residual_tol = 1e-10;

SectorSpectrum solve_block(const Matrix& block, Sector sector, std::vector<Eigen::Index> basis) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(block);
    if (solver.info() != Eigen::Success) {
        throw NumericalError(fmt::format("eigensolver failed on the {} sector", sector_name(sector)),
                             std::nan(""));
    }
    SectorSpectrum s;
    s.sector = sector;
    s.eigenvalues = solver.eigenvalues();
    s.eigenvectors = solver.eigenvectors();
    s.basis = std::move(basis);

    const double norm = block.norm();
    const double residual =
        (s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.adjoint() - block).norm();
    if (residual > residual_tol * std::max(norm, 1.0)) {
        throw NumericalError(fmt::format("{} sector reconstruction residual {:.3e}",
                                         sector_name(sector), residual / std::max(norm, 1.0)),
                             residual);
    }
    return s;
}

void require_hermitian(const DenseOperator& h) {
    if (!h.is_hermitian(hermitian_tol)) {
        throw ArgumentError(fmt::format(
            "operator is not Hermitian: ||H - H^dagger||_F = {:.3e}",
            (h.matrix() - h.matrix().adjoint()).norm()));
    }
}

// phi1(w) = (1 - e^{-w}) / w,  phi2(w) = (1 - e^{-w}(1 + w)) / w^2
void phi_functions(cplx w, cplx& phi1, cplx& phi2) {
    if (std::abs(w) < 0.5) {
        cplx term = 1.0; // (-w)^k / k!
        phi1 = 0;
        phi2 = 0;
        for (int k = 0; k < 24; ++k) {
            phi1 += term / static_cast<double>(k + 1);
            phi2 += term / static_cast<double>(k + 2);
            term *= -w / static_cast<double>(k + 1);
        }
        return;
    }
    const cplx e = std::exp(-w);
    phi1 = (1.0 - e) / w;
    phi2 = (1.0 - e * (1.0 + w)) / (w * w);
}

void set_partitions(int n, std::vector<int>& labels, int next, int used,
                    std::vector<std::vector<std::vector<int>>>& out) {
    if (next == n) {
        std::vector<std::vector<int>> blocks(used);
        for (int i = 0; i < n; ++i) blocks[labels[i]].push_back(i);
        out.push_back(std::move(blocks));
        return;
    }
    for (int b = 0; b <= used; ++b) {
        labels[next] = b;
        set_partitions(n, labels, next + 1, std::max(used, b + 1), out);
    }
}

} // namespace

std::vector<double> Spectra::all_eigenvalues() const {
    std::vector<double> out(even.eigenvalues.begin(), even.eigenvalues.end());
    out.insert(out.end(), odd.eigenvalues.begin(), odd.eigenvalues.end());
    std::sort(out.begin(), out.end());
    return out;
}

Spectra diagonalize(const DenseOperator& h) {
    require_hermitian(h);
    SectorBlocks blocks = sector_split(h);
    Spectra out;
    out.n_fermions = h.fermions();
    out.even = solve_block(blocks.even, Sector::even, std::move(blocks.even_basis));
    out.odd = solve_block(blocks.odd, Sector::odd, std::move(blocks.odd_basis));
    return out;
}

std::vector<double> sector_eigenvalues(const DenseOperator& h, Sector s) {
    const SectorBlocks blocks = sector_split(h);
    const Matrix& b = s == Sector::even ? blocks.even : blocks.odd;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(b, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = solver.eigenvalues();
    return {ev.begin(), ev.end()};
}

std::vector<double> eigenvalues_only(const DenseOperator& h) {
    const SectorBlocks blocks = sector_split(h);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(h.dim()));
    for (const Matrix* b : {&blocks.even, &blocks.odd}) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(*b, Eigen::EigenvaluesOnly);
        out.insert(out.end(), solver.eigenvalues().begin(), solver.eigenvalues().end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------- gap ratios

void GapRatioSample::append(const GapRatioSample& other) {
    ratios.insert(ratios.end(), other.ratios.begin(), other.ratios.end());
    degenerate += other.degenerate;
}

double GapRatioSample::mean_min_ratio() const {
    if (ratios.empty()) return std::nan("");
    double s = 0;
    for (double r : ratios) s += std::min(r, 1.0 / r);
    return s / static_cast<double>(ratios.size());
}

GapRatioSample gap_ratios(std::span<const double> l) {
    if (l.size() < 3) throw ArgumentError("gap ratios need at least 3 levels");
    const double floor = degeneracy_floor * (l.back() - l.front());
    GapRatioSample out;
    out.ratios.reserve(l.size() - 2);
    for (std::size_t i = 1; i + 1 < l.size(); ++i) {
        const double below = l[i] - l[i - 1];
        const double above = l[i + 1] - l[i];
        if (below < 0 || above < 0) throw ArgumentError("gap ratios need ascending levels");
        if (below <= floor || above <= floor) {
            ++out.degenerate;
            continue;
        }
        out.ratios.push_back(above / below);
    }
    return out;
}

GapRatioSample gap_ratios(const SectorSpectrum& s) {
    return gap_ratios(std::span<const double>(s.eigenvalues.data(), s.eigenvalues.size()));
}

GapRatioSample gap_ratios(const Spectra& s) {
    GapRatioSample out = gap_ratios(s.even);
    out.append(gap_ratios(s.odd));
    return out;
}

RatioReference reference_ratio_statistic(ReferenceKind kind, std::size_t min_ratios, Rng& rng) {
    // Batch means: correlations between neighbouring ratios stay inside a batch.
    std::vector<double> batch_means;
    std::size_t count = 0;
    double batch_sum = 0;
    std::size_t batch_count = 0;
    constexpr std::size_t batch_size = 1000;

    auto consume = [&](const GapRatioSample& g) {
        for (double r : g.ratios) {
            batch_sum += std::min(r, 1.0 / r);
            ++batch_count;
            ++count;
            if (batch_count == batch_size) {
                batch_means.push_back(batch_sum / batch_size);
                batch_sum = 0;
                batch_count = 0;
            }
        }
    };

    if (kind == ReferenceKind::poisson) {
        std::vector<double> levels(batch_size + 2);
        while (count < min_ratios || batch_count != 0) {
            for (double& x : levels) x = rng.uniform();
            std::sort(levels.begin(), levels.end());
            consume(gap_ratios(levels));
        }
    } else {
        const int m = gue_matrix_size;
        Matrix a(m, m);
        std::vector<double> z(2 * m * m);
        while (count < min_ratios || batch_count != 0) {
            rng.fill_normal(z);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) a(i, j) = cplx(z[2 * (j * m + i)], z[2 * (j * m + i) + 1]);
            const Matrix h = (a + a.adjoint()) * 0.5;
            Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
            const Eigen::VectorXd& ev = solver.eigenvalues();
            GapRatioSample g = gap_ratios(std::span<const double>(ev.data(), ev.size()));
            // keep batches aligned to whole matrices
            if (batch_count + g.ratios.size() > batch_size && batch_count != 0) {
                batch_means.push_back(batch_sum / static_cast<double>(batch_count));
                batch_sum = 0;
                batch_count = 0;
            }
            consume(g);
        }
    }

    const double n = static_cast<double>(batch_means.size());
    const double mean = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / n;
    double var = 0;
    for (double b : batch_means) var += (b - mean) * (b - mean);
    var /= std::max(n - 1, 1.0);
    return {mean, std::sqrt(var / n), count};
}

std::size_t distinct_levels(std::span<const double> l, double rel_tol) {
    if (l.empty()) return 0;
    const double tol = rel_tol * (l.back() - l.front());
    std::size_t n = 1;
    for (std::size_t k = 1; k < l.size(); ++k) {
        if (l[k] < l[k - 1]) throw ArgumentError("distinct_levels needs ascending levels");
        n += l[k] - l[k - 1] > tol;
    }
    return n;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("KS distance of an empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
    }
    return d;
}

// --------------------------------------------------------------- MeanDensity

MeanDensity::MeanDensity(double lo, double hi, std::vector<double> bin_values)
    : lo_(lo), hi_(hi), bin_values_(std::move(bin_values)) {
    const int b = bins();
    const double w = (hi_ - lo_) / b;
    nodes_x_.push_back(lo_);
    nodes_y_.push_back(bin_values_.front());
    for (int k = 0; k < b; ++k) {
        nodes_x_.push_back(lo_ + (k + 0.5) * w);
        nodes_y_.push_back(bin_values_[k]);
    }
    nodes_x_.push_back(hi_);
    nodes_y_.push_back(bin_values_.back());
    double m = 0;
    for (std::size_t k = 0; k + 1 < nodes_x_.size(); ++k) {
        m += 0.5 * (nodes_y_[k] + nodes_y_[k + 1]) * (nodes_x_[k + 1] - nodes_x_[k]);
    }
    for (double& y : nodes_y_) y /= m;
}

MeanDensity MeanDensity::from_samples(std::span<const double> samples, int bins) {
    if (samples.empty()) throw ArgumentError("mean density of an empty sample");
    if (bins < 1) throw ArgumentError("mean density needs at least one bin");
    auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    double lo = *mn, hi = *mx;
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / bins;
    std::vector<double> v(bins, 0.0);
    for (double s : samples) {
        const int k = std::min(static_cast<int>((s - lo) / w), bins - 1);
        v[k] += 1.0;
    }
    for (double& x : v) x /= static_cast<double>(samples.size()) * w;
    return MeanDensity(lo, hi, std::move(v));
}

MeanDensity MeanDensity::from_table(double lo, double hi, std::vector<double> bin_values) {
    if (!(hi > lo) || bin_values.empty()) throw ArgumentError("density table needs lo < hi and bins");
    const double w = (hi - lo) / static_cast<double>(bin_values.size());
    double mass = 0;
    for (double v : bin_values) {
        if (v < 0 || !std::isfinite(v)) throw ArgumentError("density table values must be >= 0");
        mass += v * w;
    }
    if (std::abs(mass - 1.0) > 1e-9) {
        throw ArgumentError(fmt::format("density table is not normalized (mass {:.12g})", mass));
    }
    return MeanDensity(lo, hi, std::move(bin_values));
}

double MeanDensity::pdf(double e) const {
    if (e < lo_ || e > hi_) return 0.0;
    const auto it = std::upper_bound(nodes_x_.begin(), nodes_x_.end(), e);
    const std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - nodes_x_.begin(), 1),
                                                nodes_x_.size() - 1);
    const double x0 = nodes_x_[k - 1], x1 = nodes_x_[k];
    const double f = x1 > x0 ? (e - x0) / (x1 - x0) : 0.0;
    return nodes_y_[k - 1] + f * (nodes_y_[k] - nodes_y_[k - 1]);
}

double MeanDensity::mass() const { return std::real(transform(0.0)); }

cplx MeanDensity::transform(cplx z) const {
    cplx total = 0;
    for (std::size_t k = 0; k + 1 < nodes_x_.size(); ++k) {
        const double a = nodes_x_[k];
        const double h = nodes_x_[k + 1] - a;
        if (h <= 0) continue;
        const double ya = nodes_y_[k];
        const double slope = (nodes_y_[k + 1] - ya) / h;
        cplx phi1, phi2;
        phi_functions(z * h, phi1, phi2);
        total += std::exp(-z * a) * (ya * h * phi1 + slope * h * h * phi2);
    }
    return total;
}

// ----------------------------------------------------------------------- SFF

std::vector<double> linear_grid(double t0, double t1, std::size_t points) {
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = t0;
        return out;
    }
    for (std::size_t k = 0; k < points; ++k) {
        out[k] = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    return out;
}

SFFSeries sff(std::span<const double> levels, double beta, std::span<const double> times) {
    SFFSeries out;
    out.beta = beta;
    out.times.assign(times.begin(), times.end());
    out.values.reserve(times.size());
    std::vector<double> w(levels.size());
    for (std::size_t n = 0; n < levels.size(); ++n) w[n] = std::exp(-beta * levels[n]);
    for (double t : times) {
        double re = 0, im = 0;
        for (std::size_t n = 0; n < levels.size(); ++n) {
            re += w[n] * std::cos(t * levels[n]);
            im -= w[n] * std::sin(t * levels[n]);
        }
        out.values.push_back(re * re + im * im);
    }
    return out;
}

SFFSeries sff(const Spectra& spectra, double beta, std::span<const double> times) {
    const std::vector<double> levels = spectra.all_eigenvalues();
    return sff(levels, beta, times);
}

SFFSeries sff_poisson_average(const MeanDensity& density, double beta,
                              std::span<const double> times, double dim) {
    SFFSeries out;
    out.beta = beta;
    out.times.assign(times.begin(), times.end());
    const double plateau = dim * std::real(density.transform(2.0 * beta));
    for (double t : times) {
        const cplx z = dim * density.transform(cplx(beta, -t));
        out.values.push_back(std::norm(z) + plateau);
    }
    return out;
}

// ------------------------------------------------------------ Poisson moments

double MomentDecomposition::total_weight() const {
    double s = 0;
    for (const auto& t : terms) s += t.weight;
    return s;
}

double MomentDecomposition::connected_weight() const {
    for (const auto& t : terms) {
        if (t.blocks.size() == 1) return t.weight;
    }
    return 0.0;
}

double MomentDecomposition::atom_probability(std::span<const double> atoms,
                                             std::span<const int> which) const {
    if (static_cast<int>(which.size()) != order) throw ArgumentError("atom tuple size != order");
    double total = 0;
    for (const auto& term : terms) {
        double p = term.weight;
        for (const auto& block : term.blocks) {
            const int a = which[block.front()];
            for (int member : block) {
                if (which[member] != a) {
                    p = 0;
                    break;
                }
            }
            if (p == 0) break;
            p *= atoms[a];
        }
        total += p;
    }
    return total;
}

MomentDecomposition poisson_moment(int n, double dim) {
    if (n < 1 || n > max_analytic_moment) {
        throw ArgumentError(fmt::format(
            "analytic Poisson moments are available for 1 <= n <= {}, got {}; use Monte Carlo",
            max_analytic_moment, n));
    }
    if (!(dim >= 1)) throw ArgumentError("spectrum size must be >= 1");
    MomentDecomposition out;
    out.order = n;
    out.dim = dim;
    std::vector<std::vector<std::vector<int>>> partitions;
    std::vector<int> labels(n, 0);
    set_partitions(n, labels, 0, 0, partitions);
    for (auto& blocks : partitions) {
        // (dim)_r distinct index assignments out of dim^n
        double w = 1.0;
        for (std::size_t k = 0; k < blocks.size(); ++k) w *= (dim - static_cast<double>(k)) / dim;
        w /= std::pow(dim, n - static_cast<int>(blocks.size()));
        out.terms.push_back({std::move(blocks), std::max(w, 0.0)});
    }
    return out;
}

} // namespace syklab
