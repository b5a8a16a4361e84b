#pragma once

// Jordan-Wigner representation of Majorana fermions over N/2 spins.
//
// Basis convention: a computational basis state is an integer b in
// [0, 2^{N/2}); spin s lives on bit (N/2 - 1 - s), so spin 0 is the most
// significant bit and the leftmost tensor factor. A set bit is a spin-up.
//
//   psi_{2s}   = Z x ... x Z x X x 1 x ... x 1     (s copies of Z)
//   psi_{2s+1} = Z x ... x Z x Y x 1 x ... x 1

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace syklab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr int max_fermions = 26;

// Throws ArgumentError unless n is even and within [2, max_fermions].
void check_fermion_count(int n);

enum class Letter : std::uint8_t { I, X, Y, Z };

char letter_char(Letter l);

// A tensor product of single-spin Paulis times i^k * scale.
//
// Stored in symplectic form: spin s carries (x, z) bits at position
// (spins - 1 - s) of the two masks, with X = (1,0), Z = (0,1) and Y = (1,1).
// The phase is kept relative to the Hermitian letters, so the string
// "+ XYZ" is exactly X (x) Y (x) Z. Products are reduced eagerly, which makes
// the representation canonical.
class PauliString {
public:
    explicit PauliString(int spins);
    PauliString(int spins, std::uint32_t x_mask, std::uint32_t z_mask,
                int phase_exponent = 0, double scale = 1.0);

    static PauliString from_letters(std::string_view letters,
                                    int phase_exponent = 0, double scale = 1.0);

    // Parses the text form produced by to_string(), e.g. "+i XZY", "-2.5 ZZ".
    static PauliString parse(std::string_view text);

    int spins() const { return spins_; }
    std::uint32_t x_mask() const { return x_; }
    std::uint32_t z_mask() const { return z_; }
    int phase_exponent() const { return phase_; }
    double scale() const { return scale_; }
    cplx phase() const;

    Letter letter(int spin) const;
    bool same_letters(const PauliString& other) const;
    bool is_identity() const { return x_ == 0 && z_ == 0; }

    // Sign token, an optional magnitude when scale != 1, an optional 'i',
    // then the letters: "+i XZY".
    std::string to_string() const;

    // 2^spins square matrix.
    Matrix dense() const;

    friend PauliString operator*(const PauliString& a, const PauliString& b);
    friend bool operator==(const PauliString& a, const PauliString& b) = default;

private:
    int spins_;
    std::uint32_t x_ = 0;
    std::uint32_t z_ = 0;
    int phase_ = 0;
    double scale_ = 1.0;
};

// Strictly ascending subset of {0, ..., n-1}, stored as a bit mask
// (bit i <=> index i). Ordered by size, then lexicographically.
class MajoranaIndexSet {
public:
    MajoranaIndexSet() = default;
    MajoranaIndexSet(const std::vector<int>& indices, int n_fermions);

    static MajoranaIndexSet from_mask(std::uint32_t mask, int n_fermions);

    int fermions() const { return n_; }
    std::uint32_t mask() const { return mask_; }
    int size() const;
    bool contains(int i) const { return (mask_ >> i) & 1U; }
    std::vector<int> indices() const;

    // Dash-separated ascending list, empty for the identity: "0-3-7".
    std::string to_string() const;
    static MajoranaIndexSet parse(std::string_view text, int n_fermions);

    friend bool operator==(const MajoranaIndexSet& a, const MajoranaIndexSet& b) {
        return a.mask_ == b.mask_;
    }
    friend bool operator<(const MajoranaIndexSet& a, const MajoranaIndexSet& b);

private:
    std::uint32_t mask_ = 0;
    int n_ = 0;
};

// Square operator on the 2^{N/2}-dimensional spin space of N Majoranas.
class DenseOperator {
public:
    DenseOperator(int n_fermions, Matrix m);

    static DenseOperator identity(int n_fermions);
    static DenseOperator zero(int n_fermions);

    int fermions() const { return n_; }
    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

    double frobenius_norm() const { return m_.norm(); }
    cplx trace() const { return m_.trace(); }

    // ||A - A^dagger||_F <= rel_tol * ||A||_F.
    bool is_hermitian(double rel_tol = 1e-12) const;

    DenseOperator adjoint() const;

    DenseOperator& operator+=(const DenseOperator& o);
    DenseOperator& operator-=(const DenseOperator& o);
    DenseOperator& operator*=(cplx s);

    friend DenseOperator operator+(DenseOperator a, const DenseOperator& b) { return a += b; }
    friend DenseOperator operator-(DenseOperator a, const DenseOperator& b) { return a -= b; }
    friend DenseOperator operator*(cplx s, DenseOperator a) { return a *= s; }
    friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b);

private:
    int n_;
    Matrix m_;
};

// psi_i as a symbolic string (phase +1).
PauliString majorana_string(int i, int n_fermions);

// Dense psi_i for N fermions.
DenseOperator majorana_matrix(int i, int n_fermions);

// Ordered product psi_{i1} ... psi_{ip}, reduced symbolically.
PauliString majorana_monomial(const MajoranaIndexSet& set);

// Phase eta with eta * psi_{i1}...psi_{ip} Hermitian: 1 when p mod 4 is 0
// or 1, i otherwise. Expansion coefficients are stored against this
// Hermitian-normalized monomial.
cplx hermitian_monomial_phase(int size);
PauliString hermitian_monomial(const MajoranaIndexSet& set);

DenseOperator to_operator(const PauliString& p);

// ---------------------------------------------------------------------------
// Parity sectors. The even sector holds basis states with an even number of
// set bits.

enum class Sector { even, odd };

std::string_view sector_name(Sector s);

bool is_odd_parity(std::uint64_t basis_state);

// Ascending basis indices of one sector for the given number of spins.
std::vector<Eigen::Index> sector_basis(int spins, Sector s);

// Z x Z x ... x Z, diagonal with entries (-1)^{popcount(b)}.
DenseOperator parity_operator(int n_fermions);

struct SectorBlocks {
    int n_fermions = 0;
    Matrix even;
    Matrix odd;
    std::vector<Eigen::Index> even_basis;
    std::vector<Eigen::Index> odd_basis;
};

// Frobenius norm of the entries coupling the two sectors.
double parity_leak(const DenseOperator& a);

// Throws StructureError when the off-sector part exceeds
// rel_tol * ||A||_F.
SectorBlocks sector_split(const DenseOperator& a, double rel_tol = 1e-12);
DenseOperator reassemble(const SectorBlocks& blocks);

} // namespace syklab
