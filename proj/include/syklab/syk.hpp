#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "syklab/pauli.hpp"
#include "syklab/rng.hpp"

namespace syklab {

// Parameters of the q=4 SYK ensemble.
struct EnsembleParams {
    static constexpr int p = 4;
    static constexpr int min_fermions = 6;
    static constexpr int max_supported = 26;

    int n_fermions = 14;
    double j_scale = 1.0;
    std::uint64_t seed = 0;

    // lambda = 2 p^2 / N
    double lambda() const { return 2.0 * p * p / n_fermions; }
    // <J^2> = (1/lambda) C(N,4)^{-1} J^2
    double coupling_variance() const;

    void validate() const;
};

std::uint64_t binomial(int n, int k);

// All 4-subsets of {0..n-1} in lexicographic order.
const std::vector<std::array<int, 4>>& quartets(int n);

// Couplings J_{i1 i2 i3 i4}, one value per 4-subset in lexicographic order.
class CouplingTensor {
public:
    CouplingTensor(int n_fermions, std::vector<double> values);
    static CouplingTensor zeros(int n_fermions);

    int fermions() const { return n_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double at(const std::array<int, 4>& q) const;

    double sum_squares() const;

    CouplingTensor& operator*=(double s);
    CouplingTensor& operator+=(const CouplingTensor& o);
    friend CouplingTensor operator*(double s, CouplingTensor c) { return c *= s; }
    friend CouplingTensor operator+(CouplingTensor a, const CouplingTensor& b) { return a += b; }
    friend bool operator==(const CouplingTensor&, const CouplingTensor&) = default;

private:
    int n_;
    std::vector<double> values_;
};

CouplingTensor sample_couplings(const EnsembleParams& params, Rng& rng);

// H = i^{p/2} sum_I J_I psi_{i1} psi_{i2} psi_{i3} psi_{i4} = -sum_I J_I m_I.
DenseOperator build_hamiltonian(const CouplingTensor& couplings);

// tr(H^2) = 2^{N/2} sum_I J_I^2 (fermion strings are trace-orthogonal).
double hamiltonian_trace_square(const CouplingTensor& couplings);

// Multiplies by the positive scalar giving tr(H^2) == target.
CouplingTensor rescale_to_trace(const CouplingTensor& couplings, double target);

// coefficients.csv: header "i1,i2,i3,i4,value", rows in lexicographic order,
// 17 significant digits. The reader accepts any row order but requires every
// 4-subset exactly once.
void write_coefficients(std::ostream& os, const CouplingTensor& c);
void write_coefficients(const std::filesystem::path& path, const CouplingTensor& c);
CouplingTensor read_coefficients(std::istream& is, int n_fermions);
CouplingTensor read_coefficients(const std::filesystem::path& path, int n_fermions);

} // namespace syklab
