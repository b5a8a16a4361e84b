#include "syklab/decompose.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "syklab/errors.hpp"
#include "syklab/io.hpp"

namespace syklab {

namespace {

constexpr double imaginary_tol = 1e-10;

int spins_for_dim(Eigen::Index dim) {
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        throw ArgumentError(fmt::format("dimension {} is not a power of two >= 2", dim));
    }
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

// Majorana index set whose monomial has the letters (x, z).
std::uint32_t majorana_mask(std::uint32_t x, std::uint32_t z, int spins) {
    std::uint32_t mask = 0;
    int later = 0;
    for (int s = spins - 1; s >= 0; --s) {
        const std::uint32_t b = 1U << (spins - 1 - s);
        const bool xb = x & b, zb = z & b;
        bool lo, hi; // psi_{2s}, psi_{2s+1}
        if (later % 2 == 0) {
            // I -> {}, X -> {2s}, Y -> {2s+1}, Z -> both
            lo = (xb && !zb) || (!xb && zb);
            hi = zb;
        } else {
            // Z -> {}, Y -> {2s}, X -> {2s+1}, I -> both
            lo = (xb && zb) || (!xb && !zb);
            hi = !zb;
        }
        if (lo) mask |= 1U << (2 * s);
        if (hi) mask |= 1U << (2 * s + 1);
        later += static_cast<int>(lo) + static_cast<int>(hi);
    }
    return mask;
}

} // namespace

// ------------------------------------------------------------ PauliExpansion

PauliExpansion::PauliExpansion(int n_fermions, Matrix table) : n_(n_fermions), table_(std::move(table)) {
    check_fermion_count(n_fermions);
    const Eigen::Index dim = Eigen::Index{1} << (n_fermions / 2);
    if (table_.rows() != dim || table_.cols() != dim) {
        throw ArgumentError(fmt::format("Pauli table for N={} must be {}x{}", n_fermions, dim, dim));
    }
}

cplx PauliExpansion::coefficient(const PauliString& p) const {
    if (p.spins() != spins()) throw ArgumentError("Pauli string has the wrong spin count");
    return coefficient(p.x_mask(), p.z_mask());
}

std::vector<std::pair<PauliString, cplx>> PauliExpansion::terms(double threshold) const {
    std::vector<std::pair<PauliString, cplx>> out;
    for (Eigen::Index c = 0; c < table_.cols(); ++c) {
        for (Eigen::Index r = 0; r < table_.rows(); ++r) {
            const cplx a = table_(r, c);
            if (std::abs(a) <= threshold) continue;
            const auto z = static_cast<std::uint32_t>(r);
            const auto x = static_cast<std::uint32_t>(c) ^ z;
            out.emplace_back(PauliString(spins(), x, z), a);
        }
    }
    return out;
}

PauliExpansion pauli_decompose(const DenseOperator& a, std::uint64_t* operation_count) {
    const Eigen::Index n = a.dim();
    spins_for_dim(n);
    Matrix m = a.matrix();
    std::uint64_t ops = 0;
    const cplx i(0, 1);
    for (Eigen::Index h = n / 2; h >= 1; h /= 2) {
        for (Eigen::Index c0 = 0; c0 < n; c0 += 2 * h) {
            for (Eigen::Index r0 = 0; r0 < n; r0 += 2 * h) {
                for (Eigen::Index c = c0; c < c0 + h; ++c) {
                    for (Eigen::Index r = r0; r < r0 + h; ++r) {
                        const cplx h1 = m(r, c), h2 = m(r, c + h);
                        const cplx h3 = m(r + h, c), h4 = m(r + h, c + h);
                        m(r, c) = 0.5 * (h1 + h4);
                        m(r, c + h) = 0.5 * (h2 + h3);
                        m(r + h, c) = 0.5 * i * (h2 - h3);
                        m(r + h, c + h) = 0.5 * (h1 - h4);
                    }
                }
                ops += static_cast<std::uint64_t>(4 * h * h);
            }
        }
    }
    if (operation_count) *operation_count = ops;
    return PauliExpansion(a.fermions(), std::move(m));
}

DenseOperator pauli_compose(const PauliExpansion& e) {
    Matrix m = e.table();
    const Eigen::Index n = m.rows();
    const cplx i(0, 1);
    for (Eigen::Index h = 1; h < n; h *= 2) {
        for (Eigen::Index c0 = 0; c0 < n; c0 += 2 * h) {
            for (Eigen::Index r0 = 0; r0 < n; r0 += 2 * h) {
                for (Eigen::Index c = c0; c < c0 + h; ++c) {
                    for (Eigen::Index r = r0; r < r0 + h; ++r) {
                        const cplx id = m(r, c), x = m(r, c + h);
                        const cplx y = m(r + h, c), z = m(r + h, c + h);
                        m(r, c) = id + z;
                        m(r, c + h) = x - i * y;
                        m(r + h, c) = x + i * y;
                        m(r + h, c + h) = id - z;
                    }
                }
            }
        }
    }
    return DenseOperator(e.fermions(), std::move(m));
}

// ---------------------------------------------------------- FermionExpansion

FermionExpansion::FermionExpansion(int n_fermions, std::vector<Term> terms)
    : n_(n_fermions), terms_(std::move(terms)) {
    check_fermion_count(n_fermions);
    for (const auto& t : terms_) {
        if (t.first.fermions() != n_fermions) {
            throw ArgumentError("expansion term belongs to a different fermion count");
        }
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.first < b.first; });
    for (std::size_t k = 1; k < terms_.size(); ++k) {
        if (terms_[k].first == terms_[k - 1].first) {
            throw ArgumentError(fmt::format("duplicate expansion term '{}'", terms_[k].first.to_string()));
        }
    }
}

double FermionExpansion::coefficient(const MajoranaIndexSet& set) const {
    const auto it = std::lower_bound(terms_.begin(), terms_.end(), set,
                                     [](const Term& t, const MajoranaIndexSet& s) { return t.first < s; });
    return it != terms_.end() && it->first == set ? it->second : 0.0;
}

double FermionExpansion::sum_squares() const {
    double s = 0;
    for (const auto& t : terms_) s += t.second * t.second;
    return s;
}

PauliExpansion FermionExpansion::to_pauli() const {
    const Eigen::Index dim = Eigen::Index{1} << (n_ / 2);
    Matrix table = Matrix::Zero(dim, dim);
    for (const auto& [set, c] : terms_) {
        const PauliString h = hermitian_monomial(set);
        table(h.z_mask(), h.x_mask() ^ h.z_mask()) += c * h.phase();
    }
    return PauliExpansion(n_, std::move(table));
}

FermionExpansion majorana_coefficients(const PauliExpansion& e, double threshold) {
    const int n = e.fermions();
    const int spins = e.spins();
    const Matrix& t = e.table();
    const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
    std::vector<FermionExpansion::Term> terms;
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            const cplx a = t(r, c);
            if (std::abs(a) <= threshold) continue;
            const auto z = static_cast<std::uint32_t>(r);
            const auto x = static_cast<std::uint32_t>(c) ^ z;
            const MajoranaIndexSet set = MajoranaIndexSet::from_mask(majorana_mask(x, z, spins), n);
            const PauliString h = hermitian_monomial(set);
            const cplx coeff = a / h.phase();
            if (std::abs(coeff.imag()) > imaginary_tol * scale) {
                throw NumericalError(
                    fmt::format("coefficient of '{}' has imaginary part {:.3e}: input is not Hermitian",
                                set.to_string(), coeff.imag()),
                    std::abs(coeff.imag()));
            }
            terms.emplace_back(set, coeff.real());
        }
    }
    return FermionExpansion(n, std::move(terms));
}

FermionExpansion fermion_expansion(const DenseOperator& a, double threshold) {
    return majorana_coefficients(pauli_decompose(a), threshold);
}

FermionExpansion fermion_expansion(const CouplingTensor& couplings) {
    const int n = couplings.fermions();
    const auto& q = quartets(n);
    std::vector<FermionExpansion::Term> terms;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (couplings[k] == 0.0) continue;
        terms.emplace_back(MajoranaIndexSet({q[k][0], q[k][1], q[k][2], q[k][3]}, n), -couplings[k]);
    }
    return FermionExpansion(n, std::move(terms));
}

CouplingTensor quartic_couplings(const FermionExpansion& e) {
    CouplingTensor out = CouplingTensor::zeros(e.fermions());
    const auto& q = quartets(e.fermions());
    for (std::size_t k = 0; k < q.size(); ++k) {
        out[k] = -e.coefficient(MajoranaIndexSet({q[k][0], q[k][1], q[k][2], q[k][3]}, e.fermions()));
    }
    return out;
}

SizeSpectrum size_spectrum(const FermionExpansion& e) {
    SizeSpectrum s;
    s.absolute.assign(static_cast<std::size_t>(e.fermions()) + 1, 0.0);
    for (const auto& [set, c] : e.terms()) s.absolute[set.size()] += c * c;
    for (double v : s.absolute) s.total += v;
    s.fraction.reserve(s.absolute.size());
    for (double v : s.absolute) s.fraction.push_back(s.total > 0 ? v / s.total : 0.0);
    return s;
}

LocalSplit truncate_local(const FermionExpansion& e, int k) {
    return {e.filter([k](int p) { return p <= k; }).to_operator(),
            e.filter([k](int p) { return p > k; }).to_operator()};
}

double nonlocal_fraction(const FermionExpansion& e, int k) {
    const SizeSpectrum s = size_spectrum(e);
    double tail = 0;
    for (std::size_t p = static_cast<std::size_t>(std::max(k + 1, 0)); p < s.absolute.size(); ++p) {
        tail += s.absolute[p];
    }
    return s.total > 0 ? std::sqrt(tail / s.total) : 0.0;
}

void write_expansion(std::ostream& os, const FermionExpansion& e) {
    os << "indices,value\n";
    for (const auto& [set, c] : e.terms()) os << set.to_string() << ',' << format_double(c) << '\n';
}

void write_expansion(const std::filesystem::path& path, const FermionExpansion& e) {
    std::ostringstream os;
    write_expansion(os, e);
    write_text_file(path, os.str());
}

FermionExpansion read_expansion(std::istream& is, int n_fermions) {
    check_fermion_count(n_fermions);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "indices,value") {
        throw ArgumentError("expansion file must start with 'indices,value'");
    }
    std::vector<FermionExpansion::Term> terms;
    while (std::getline(is, line)) {
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto f = split(row, ',');
        if (f.size() != 2) throw ArgumentError(fmt::format("malformed expansion row '{}'", row));
        terms.emplace_back(MajoranaIndexSet::parse(f[0], n_fermions), parse_double(f[1]));
    }
    return FermionExpansion(n_fermions, std::move(terms));
}

FermionExpansion read_expansion(const std::filesystem::path& path, int n_fermions) {
    std::istringstream is(read_text_file(path));
    return read_expansion(is, n_fermions);
}

} // namespace syklab
