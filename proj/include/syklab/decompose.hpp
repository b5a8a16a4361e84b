#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "syklab/pauli.hpp"
#include "syklab/syk.hpp"

namespace syklab {

// Complete Pauli expansion A = sum_P a_P P over the 4^{N/2} Hermitian letter
// strings. The coefficient of the string with masks (x, z) is stored at
// table(z, x ^ z), which is where the in-place block recursion leaves it.
class PauliExpansion {
public:
    PauliExpansion(int n_fermions, Matrix table);

    int fermions() const { return n_; }
    int spins() const { return n_ / 2; }
    const Matrix& table() const { return table_; }

    cplx coefficient(std::uint32_t x_mask, std::uint32_t z_mask) const {
        return table_(z_mask, x_mask ^ z_mask);
    }
    // Coefficient of the letters of p (its phase and scale are ignored).
    cplx coefficient(const PauliString& p) const;

    // (letters, a_P) for every |a_P| > threshold.
    std::vector<std::pair<PauliString, cplx>> terms(double threshold = 1e-14) const;

private:
    int n_;
    Matrix table_;
};

// Recursive block decomposition on the leading tensor factor,
//   [[H1, H2], [H3, H4]] = 1 (x) (H1+H4)/2 + Z (x) (H1-H4)/2
//                        + X (x) (H2+H3)/2 + Y (x) i(H2-H3)/2,
// done in place: log2(n) sweeps over n^2 entries. `operation_count`, when
// given, receives the number of complex additions performed.
PauliExpansion pauli_decompose(const DenseOperator& a, std::uint64_t* operation_count = nullptr);
DenseOperator pauli_compose(const PauliExpansion& e);

// Real coefficients c_I of the Hermitian-normalized monomials h_I (see
// hermitian_monomial), sorted by index set.
class FermionExpansion {
public:
    using Term = std::pair<MajoranaIndexSet, double>;

    FermionExpansion(int n_fermions, std::vector<Term> terms);

    int fermions() const { return n_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    double coefficient(const MajoranaIndexSet& set) const;
    double sum_squares() const;

    // Keeps terms whose size satisfies the predicate.
    template <class Pred>
    FermionExpansion filter(Pred keep) const {
        std::vector<Term> out;
        for (const auto& t : terms_) {
            if (keep(t.first.size())) out.push_back(t);
        }
        return FermionExpansion(n_, std::move(out));
    }

    PauliExpansion to_pauli() const;
    DenseOperator to_operator() const { return pauli_compose(to_pauli()); }

private:
    int n_;
    std::vector<Term> terms_;
};

inline constexpr double default_coefficient_threshold = 1e-14;

// Relabels every Pauli string as a Majorana monomial (right to left, the
// running count of indices on later spins decides whether the letters swap).
// Throws NumericalError when an imaginary part exceeds 1e-10 (non-Hermitian
// input).
FermionExpansion majorana_coefficients(const PauliExpansion& e,
                                       double threshold = default_coefficient_threshold);

FermionExpansion fermion_expansion(const DenseOperator& a,
                                   double threshold = default_coefficient_threshold);

// The expansion of an SYK Hamiltonian built from these couplings.
FermionExpansion fermion_expansion(const CouplingTensor& couplings);
// Size-4 slice back to couplings (J_I = -c_I).
CouplingTensor quartic_couplings(const FermionExpansion& e);

struct SizeSpectrum {
    std::vector<double> absolute; // S_p = sum_{|I|=p} c_I^2, p = 0..N
    std::vector<double> fraction; // S_p / sum_p S_p
    double total = 0;
};

SizeSpectrum size_spectrum(const FermionExpansion& e);

struct LocalSplit {
    DenseOperator local;
    DenseOperator nonlocal;
};

LocalSplit truncate_local(const FermionExpansion& e, int k = 4);

// ||nonlocal||_F / ||total||_F, from the size spectrum.
double nonlocal_fraction(const FermionExpansion& e, int k = 4);

// "indices,value" rows, dash-separated indices (empty for the identity).
void write_expansion(std::ostream& os, const FermionExpansion& e);
void write_expansion(const std::filesystem::path& path, const FermionExpansion& e);
FermionExpansion read_expansion(std::istream& is, int n_fermions);
FermionExpansion read_expansion(const std::filesystem::path& path, int n_fermions);

} // namespace syklab
