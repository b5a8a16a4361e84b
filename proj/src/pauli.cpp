#include "syklab/pauli.hpp"

#include <bit>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "syklab/errors.hpp"

namespace syklab {

namespace {

int mod4(int k) { return ((k % 4) + 4) % 4; }

int popcount(std::uint32_t v) { return std::popcount(v); }

const cplx i_powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

std::uint32_t spin_bit(int spins, int s) { return 1U << (spins - 1 - s); }

} // namespace

void check_fermion_count(int n) {
    if (n < 2 || n > max_fermions || n % 2 != 0) {
        throw ArgumentError(fmt::format(
            "fermion count must be even and in [2, {}], got {}", max_fermions, n));
    }
}

char letter_char(Letter l) {
    switch (l) {
    case Letter::I: return 'I';
    case Letter::X: return 'X';
    case Letter::Y: return 'Y';
    case Letter::Z: return 'Z';
    }
    return '?';
}

// --------------------------------------------------------------- PauliString

PauliString::PauliString(int spins) : PauliString(spins, 0, 0) {}

PauliString::PauliString(int spins, std::uint32_t x_mask, std::uint32_t z_mask,
                         int phase_exponent, double scale)
    : spins_(spins), x_(x_mask), z_(z_mask), phase_(mod4(phase_exponent)), scale_(scale) {
    if (spins < 1 || spins > max_fermions / 2) {
        throw ArgumentError(fmt::format("spin count {} out of range", spins));
    }
    const std::uint32_t all = (spins == 32) ? ~0U : ((1U << spins) - 1);
    if ((x_ & ~all) != 0 || (z_ & ~all) != 0) {
        throw ArgumentError("Pauli masks exceed the spin count");
    }
    if (scale_ < 0) {
        scale_ = -scale_;
        phase_ = mod4(phase_ + 2);
    }
}

PauliString PauliString::from_letters(std::string_view letters, int phase_exponent,
                                      double scale) {
    const int spins = static_cast<int>(letters.size());
    std::uint32_t x = 0, z = 0;
    for (int s = 0; s < spins; ++s) {
        const std::uint32_t b = 1U << (spins - 1 - s);
        switch (letters[s]) {
        case 'I': break;
        case 'X': x |= b; break;
        case 'Y': x |= b; z |= b; break;
        case 'Z': z |= b; break;
        default:
            throw ArgumentError(fmt::format("invalid Pauli letter '{}'", letters[s]));
        }
    }
    return PauliString(spins, x, z, phase_exponent, scale);
}

PauliString PauliString::parse(std::string_view text) {
    const auto space = text.find(' ');
    if (space == std::string_view::npos || space == 0) {
        throw ArgumentError(fmt::format("malformed Pauli string '{}'", text));
    }
    std::string_view token = text.substr(0, space);
    const std::string_view letters = text.substr(space + 1);

    int phase = 0;
    if (token[0] == '-') {
        phase = 2;
    } else if (token[0] != '+') {
        throw ArgumentError(fmt::format("Pauli phase token must start with a sign: '{}'", text));
    }
    token.remove_prefix(1);
    if (!token.empty() && token.back() == 'i') {
        phase += 1;
        token.remove_suffix(1);
    }
    double scale = 1.0;
    if (!token.empty()) {
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), scale);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw ArgumentError(fmt::format("malformed Pauli scale in '{}'", text));
        }
    }
    return from_letters(letters, phase, scale);
}

cplx PauliString::phase() const { return scale_ * i_powers[phase_]; }

Letter PauliString::letter(int spin) const {
    const std::uint32_t b = spin_bit(spins_, spin);
    const bool x = x_ & b, z = z_ & b;
    if (x && z) return Letter::Y;
    if (x) return Letter::X;
    if (z) return Letter::Z;
    return Letter::I;
}

bool PauliString::same_letters(const PauliString& other) const {
    return spins_ == other.spins_ && x_ == other.x_ && z_ == other.z_;
}

std::string PauliString::to_string() const {
    std::string out(1, phase_ >= 2 ? '-' : '+');
    if (scale_ != 1.0) out += fmt::format("{:.17g}", scale_);
    if (phase_ % 2 == 1) out += 'i';
    out += ' ';
    for (int s = 0; s < spins_; ++s) out += letter_char(letter(s));
    return out;
}

Matrix PauliString::dense() const {
    const Eigen::Index dim = Eigen::Index{1} << spins_;
    Matrix m = Matrix::Zero(dim, dim);
    // letters = i^{|x&z|} X^x Z^z
    const cplx base = phase() * i_powers[popcount(x_ & z_) % 4];
    for (Eigen::Index c = 0; c < dim; ++c) {
        const auto uc = static_cast<std::uint32_t>(c);
        const double sign = (popcount(z_ & uc) % 2) ? -1.0 : 1.0;
        m(static_cast<Eigen::Index>(uc ^ x_), c) = sign * base;
    }
    return m;
}

PauliString operator*(const PauliString& a, const PauliString& b) {
    if (a.spins_ != b.spins_) throw ArgumentError("Pauli product of mismatched lengths");
    const std::uint32_t x = a.x_ ^ b.x_;
    const std::uint32_t z = a.z_ ^ b.z_;
    const int k = a.phase_ + popcount(a.x_ & a.z_) + b.phase_ + popcount(b.x_ & b.z_)
                  + 2 * popcount(a.z_ & b.x_) - popcount(x & z);
    return PauliString(a.spins_, x, z, k, a.scale_ * b.scale_);
}

// ---------------------------------------------------------- MajoranaIndexSet

MajoranaIndexSet::MajoranaIndexSet(const std::vector<int>& indices, int n_fermions)
    : n_(n_fermions) {
    check_fermion_count(n_fermions);
    int prev = -1;
    for (int i : indices) {
        if (i <= prev || i >= n_fermions) {
            throw ArgumentError(fmt::format(
                "Majorana indices must be strictly ascending in [0, {})", n_fermions));
        }
        mask_ |= 1U << i;
        prev = i;
    }
}

MajoranaIndexSet MajoranaIndexSet::from_mask(std::uint32_t mask, int n_fermions) {
    check_fermion_count(n_fermions);
    if (n_fermions < 32 && (mask >> n_fermions) != 0) {
        throw ArgumentError("Majorana mask exceeds the fermion count");
    }
    MajoranaIndexSet s;
    s.mask_ = mask;
    s.n_ = n_fermions;
    return s;
}

int MajoranaIndexSet::size() const { return popcount(mask_); }

std::vector<int> MajoranaIndexSet::indices() const {
    std::vector<int> out;
    out.reserve(size());
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
}

std::string MajoranaIndexSet::to_string() const {
    std::string out;
    for (int i : indices()) {
        if (!out.empty()) out += '-';
        out += std::to_string(i);
    }
    return out;
}

MajoranaIndexSet MajoranaIndexSet::parse(std::string_view text, int n_fermions) {
    std::vector<int> idx;
    while (!text.empty()) {
        const auto dash = text.find('-');
        const auto part = text.substr(0, dash);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size()) {
            throw ArgumentError(fmt::format("malformed index list '{}'", text));
        }
        idx.push_back(v);
        if (dash == std::string_view::npos) break;
        text.remove_prefix(dash + 1);
    }
    return MajoranaIndexSet(idx, n_fermions);
}

bool operator<(const MajoranaIndexSet& a, const MajoranaIndexSet& b) {
    const int sa = a.size(), sb = b.size();
    if (sa != sb) return sa < sb;
    const std::uint32_t d = a.mask_ ^ b.mask_;
    if (d == 0) return false;
    // The set holding the lowest differing index precedes lexicographically.
    return (a.mask_ & (d & (~d + 1))) != 0;
}

// ------------------------------------------------------------- DenseOperator

DenseOperator::DenseOperator(int n_fermions, Matrix m) : n_(n_fermions), m_(std::move(m)) {
    check_fermion_count(n_fermions);
    const Eigen::Index dim = Eigen::Index{1} << (n_fermions / 2);
    if (m_.rows() != dim || m_.cols() != dim) {
        throw ArgumentError(fmt::format("operator for N={} must be {}x{}, got {}x{}",
                                        n_fermions, dim, dim, m_.rows(), m_.cols()));
    }
}

DenseOperator DenseOperator::identity(int n_fermions) {
    check_fermion_count(n_fermions);
    const Eigen::Index dim = Eigen::Index{1} << (n_fermions / 2);
    return DenseOperator(n_fermions, Matrix::Identity(dim, dim));
}

DenseOperator DenseOperator::zero(int n_fermions) {
    check_fermion_count(n_fermions);
    const Eigen::Index dim = Eigen::Index{1} << (n_fermions / 2);
    return DenseOperator(n_fermions, Matrix::Zero(dim, dim));
}

bool DenseOperator::is_hermitian(double rel_tol) const {
    const double scale = m_.norm();
    return (m_ - m_.adjoint()).norm() <= rel_tol * std::max(scale, 1e-300);
}

DenseOperator DenseOperator::adjoint() const { return DenseOperator(n_, m_.adjoint()); }

DenseOperator& DenseOperator::operator+=(const DenseOperator& o) {
    if (o.n_ != n_) throw ArgumentError("operator sum of mismatched fermion counts");
    m_ += o.m_;
    return *this;
}

DenseOperator& DenseOperator::operator-=(const DenseOperator& o) {
    if (o.n_ != n_) throw ArgumentError("operator difference of mismatched fermion counts");
    m_ -= o.m_;
    return *this;
}

DenseOperator& DenseOperator::operator*=(cplx s) {
    m_ *= s;
    return *this;
}

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
    if (a.n_ != b.n_) throw ArgumentError("operator product of mismatched fermion counts");
    return DenseOperator(a.n_, a.m_ * b.m_);
}

// ------------------------------------------------------------ Jordan-Wigner

PauliString majorana_string(int i, int n_fermions) {
    check_fermion_count(n_fermions);
    if (i < 0 || i >= n_fermions) {
        throw ArgumentError(fmt::format("Majorana index {} out of range for N={}", i, n_fermions));
    }
    const int spins = n_fermions / 2;
    const int site = i / 2;
    std::uint32_t z = 0;
    for (int s = 0; s < site; ++s) z |= spin_bit(spins, s);
    const std::uint32_t x = spin_bit(spins, site);
    if (i % 2 == 1) z |= x;
    return PauliString(spins, x, z);
}

DenseOperator majorana_matrix(int i, int n_fermions) {
    return to_operator(majorana_string(i, n_fermions));
}

PauliString majorana_monomial(const MajoranaIndexSet& set) {
    const int n = set.fermions();
    check_fermion_count(n);
    PauliString p(n / 2);
    for (int i : set.indices()) p = p * majorana_string(i, n);
    return p;
}

cplx hermitian_monomial_phase(int size) {
    const int r = size % 4;
    return (r == 2 || r == 3) ? cplx(0, 1) : cplx(1, 0);
}

PauliString hermitian_monomial(const MajoranaIndexSet& set) {
    PauliString p = majorana_monomial(set);
    const int r = set.size() % 4;
    const int extra = (r == 2 || r == 3) ? 1 : 0;
    return PauliString(p.spins(), p.x_mask(), p.z_mask(), p.phase_exponent() + extra, p.scale());
}

DenseOperator to_operator(const PauliString& p) {
    return DenseOperator(2 * p.spins(), p.dense());
}

// ------------------------------------------------------------------- parity

std::string_view sector_name(Sector s) { return s == Sector::even ? "even" : "odd"; }

bool is_odd_parity(std::uint64_t basis_state) { return std::popcount(basis_state) % 2 == 1; }

std::vector<Eigen::Index> sector_basis(int spins, Sector s) {
    const Eigen::Index dim = Eigen::Index{1} << spins;
    std::vector<Eigen::Index> out;
    out.reserve(static_cast<std::size_t>(dim / 2));
    for (Eigen::Index b = 0; b < dim; ++b) {
        if (is_odd_parity(static_cast<std::uint64_t>(b)) == (s == Sector::odd)) out.push_back(b);
    }
    return out;
}

DenseOperator parity_operator(int n_fermions) {
    DenseOperator id = DenseOperator::identity(n_fermions);
    Matrix m = id.matrix();
    for (Eigen::Index b = 0; b < m.rows(); ++b) {
        if (is_odd_parity(static_cast<std::uint64_t>(b))) m(b, b) = -1.0;
    }
    return DenseOperator(n_fermions, std::move(m));
}

double parity_leak(const DenseOperator& a) {
    const Matrix& m = a.matrix();
    double sum = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const bool pc = is_odd_parity(static_cast<std::uint64_t>(c));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (is_odd_parity(static_cast<std::uint64_t>(r)) != pc) sum += std::norm(m(r, c));
        }
    }
    return std::sqrt(sum);
}

SectorBlocks sector_split(const DenseOperator& a, double rel_tol) {
    const double leaked = parity_leak(a);
    const double norm = a.frobenius_norm();
    if (leaked > rel_tol * norm) {
        throw StructureError(
            fmt::format("operator is not parity block-diagonal: off-sector norm {:.3e} "
                        "(total {:.3e})", leaked, norm),
            leaked);
    }
    const int spins = a.fermions() / 2;
    SectorBlocks out;
    out.n_fermions = a.fermions();
    out.even_basis = sector_basis(spins, Sector::even);
    out.odd_basis = sector_basis(spins, Sector::odd);
    const auto half = static_cast<Eigen::Index>(out.even_basis.size());
    out.even.resize(half, half);
    out.odd.resize(half, half);
    const Matrix& m = a.matrix();
    for (Eigen::Index j = 0; j < half; ++j) {
        for (Eigen::Index i = 0; i < half; ++i) {
            out.even(i, j) = m(out.even_basis[i], out.even_basis[j]);
            out.odd(i, j) = m(out.odd_basis[i], out.odd_basis[j]);
        }
    }
    return out;
}

DenseOperator reassemble(const SectorBlocks& blocks) {
    DenseOperator out = DenseOperator::zero(blocks.n_fermions);
    Matrix m = out.matrix();
    const auto half = static_cast<Eigen::Index>(blocks.even_basis.size());
    if (blocks.even.rows() != half || blocks.odd.rows() != half
        || static_cast<Eigen::Index>(blocks.odd_basis.size()) != half) {
        throw ArgumentError("sector blocks do not match their basis lists");
    }
    for (Eigen::Index j = 0; j < half; ++j) {
        for (Eigen::Index i = 0; i < half; ++i) {
            m(blocks.even_basis[i], blocks.even_basis[j]) = blocks.even(i, j);
            m(blocks.odd_basis[i], blocks.odd_basis[j]) = blocks.odd(i, j);
        }
    }
    return DenseOperator(blocks.n_fermions, std::move(m));
}

} // namespace syklab
