#include "syklab/syk.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "syklab/errors.hpp"
#include "syklab/io.hpp"

namespace syklab {

namespace {

// A 4-fermion monomial in the form the dense builder wants:
// -m_I |c> = unit * (-1)^{|z & c|} |c ^ x>.
struct QuartetTerm {
    std::uint32_t x;
    std::uint32_t z;
    cplx unit;
};

struct QuartetTable {
    std::vector<std::array<int, 4>> subsets;
    std::vector<QuartetTerm> terms;
    std::unordered_map<std::uint32_t, std::size_t> rank;
};

const QuartetTable& quartet_table(int n) {
    static std::mutex mu;
    static std::map<int, QuartetTable> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    QuartetTable t;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
                for (int d = c + 1; d < n; ++d) t.subsets.push_back({a, b, c, d});
    t.terms.reserve(t.subsets.size());
    for (std::size_t k = 0; k < t.subsets.size(); ++k) {
        const auto& q = t.subsets[k];
        const MajoranaIndexSet set({q[0], q[1], q[2], q[3]}, n);
        const PauliString m = majorana_monomial(set);
        static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const cplx unit = -m.phase() * ipow[std::popcount(m.x_mask() & m.z_mask()) % 4];
        t.terms.push_back({m.x_mask(), m.z_mask(), unit});
        t.rank.emplace(set.mask(), k);
    }
    return cache.emplace(n, std::move(t)).first->second;
}

void check_params_n(int n) {
    check_fermion_count(n);
    if (n < EnsembleParams::min_fermions) {
        throw ArgumentError(fmt::format("SYK needs at least {} fermions, got {}",
                                        EnsembleParams::min_fermions, n));
    }
}

} // namespace

double EnsembleParams::coupling_variance() const {
    return j_scale * j_scale / (lambda() * static_cast<double>(binomial(n_fermions, p)));
}

void EnsembleParams::validate() const {
    check_params_n(n_fermions);
    if (n_fermions > max_supported) {
        throw ArgumentError(fmt::format("N={} exceeds the supported maximum {}", n_fermions,
                                        max_supported));
    }
    if (!(j_scale > 0) || !std::isfinite(j_scale)) {
        throw ArgumentError("J scale must be positive and finite");
    }
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

const std::vector<std::array<int, 4>>& quartets(int n) {
    check_params_n(n);
    return quartet_table(n).subsets;
}

// ------------------------------------------------------------ CouplingTensor

CouplingTensor::CouplingTensor(int n_fermions, std::vector<double> values)
    : n_(n_fermions), values_(std::move(values)) {
    check_params_n(n_fermions);
    const auto expected = binomial(n_fermions, 4);
    if (values_.size() != expected) {
        throw ArgumentError(fmt::format("coupling tensor for N={} needs {} entries, got {}",
                                        n_fermions, expected, values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ArgumentError("coupling tensor holds a non-finite value");
    }
}

CouplingTensor CouplingTensor::zeros(int n_fermions) {
    check_params_n(n_fermions);
    return CouplingTensor(n_fermions, std::vector<double>(binomial(n_fermions, 4), 0.0));
}

double CouplingTensor::at(const std::array<int, 4>& q) const {
    const MajoranaIndexSet set({q[0], q[1], q[2], q[3]}, n_);
    return values_.at(quartet_table(n_).rank.at(set.mask()));
}

double CouplingTensor::sum_squares() const {
    double s = 0;
    for (double v : values_) s += v * v;
    return s;
}

CouplingTensor& CouplingTensor::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

CouplingTensor& CouplingTensor::operator+=(const CouplingTensor& o) {
    if (o.n_ != n_) throw ArgumentError("coupling sum of mismatched fermion counts");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

// ------------------------------------------------------------------ sampling

CouplingTensor sample_couplings(const EnsembleParams& params, Rng& rng) {
    params.validate();
    std::vector<double> v(binomial(params.n_fermions, 4));
    rng.fill_normal(v);
    const double sd = std::sqrt(params.coupling_variance());
    for (double& x : v) x *= sd;
    return CouplingTensor(params.n_fermions, std::move(v));
}

DenseOperator build_hamiltonian(const CouplingTensor& couplings) {
    const int n = couplings.fermions();
    const auto& table = quartet_table(n);
    if (couplings.size() != table.terms.size()) {
        throw ArgumentError("incomplete coupling tensor");
    }
    const Eigen::Index dim = Eigen::Index{1} << (n / 2);
    Matrix h = Matrix::Zero(dim, dim);
    for (std::size_t k = 0; k < table.terms.size(); ++k) {
        const double j = couplings[k];
        if (j == 0.0) continue;
        const QuartetTerm& t = table.terms[k];
        const cplx a = j * t.unit;
        for (Eigen::Index c = 0; c < dim; ++c) {
            const auto uc = static_cast<std::uint32_t>(c);
            const Eigen::Index r = static_cast<Eigen::Index>(uc ^ t.x);
            if (std::popcount(t.z & uc) & 1) {
                h(r, c) -= a;
            } else {
                h(r, c) += a;
            }
        }
    }
    return DenseOperator(n, std::move(h));
}

double hamiltonian_trace_square(const CouplingTensor& couplings) {
    return std::ldexp(couplings.sum_squares(), couplings.fermions() / 2);
}

CouplingTensor rescale_to_trace(const CouplingTensor& couplings, double target) {
    if (!(target > 0) || !std::isfinite(target)) {
        throw ArgumentError("target tr(H^2) must be positive and finite");
    }
    const double current = hamiltonian_trace_square(couplings);
    if (current == 0.0) {
        throw DegenerateInputError("cannot rescale an all-zero coupling tensor");
    }
    return std::sqrt(target / current) * couplings;
}

// ----------------------------------------------------------------------- CSV

void write_coefficients(std::ostream& os, const CouplingTensor& c) {
    const auto& subsets = quartets(c.fermions());
    os << "i1,i2,i3,i4,value\n";
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        const auto& q = subsets[k];
        os << q[0] << ',' << q[1] << ',' << q[2] << ',' << q[3] << ',' << format_double(c[k])
           << '\n';
    }
}

void write_coefficients(const std::filesystem::path& path, const CouplingTensor& c) {
    std::ostringstream os;
    write_coefficients(os, c);
    write_text_file(path, os.str());
}

CouplingTensor read_coefficients(std::istream& is, int n_fermions) {
    check_params_n(n_fermions);
    const auto& table = quartet_table(n_fermions);
    std::vector<double> values(table.subsets.size(), 0.0);
    std::vector<bool> seen(values.size(), false);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "i1,i2,i3,i4,value") {
        throw ArgumentError("coefficients file must start with 'i1,i2,i3,i4,value'");
    }
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split(trim(line), ',');
        if (fields.size() != 5) {
            throw ArgumentError(fmt::format("coefficients row {} has {} fields", row, fields.size()));
        }
        std::vector<int> idx;
        for (int f = 0; f < 4; ++f) idx.push_back(static_cast<int>(parse_int(fields[f])));
        const MajoranaIndexSet set(idx, n_fermions);
        const std::size_t k = table.rank.at(set.mask());
        if (seen[k]) throw ArgumentError(fmt::format("duplicate coupling at row {}", row));
        seen[k] = true;
        values[k] = parse_double(fields[4]);
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
        if (!seen[k]) {
            const auto& q = table.subsets[k];
            throw ArgumentError(fmt::format("incomplete coupling tensor: missing {},{},{},{}",
                                            q[0], q[1], q[2], q[3]));
        }
    }
    return CouplingTensor(n_fermions, std::move(values));
}

CouplingTensor read_coefficients(const std::filesystem::path& path, int n_fermions) {
    std::istringstream is(read_text_file(path));
    return read_coefficients(is, n_fermions);
}

} // namespace syklab
