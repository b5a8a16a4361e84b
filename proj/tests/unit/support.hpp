#pragma once

#include <filesystem>
#include <string>

#include "syklab/pauli.hpp"
#include "syklab/rng.hpp"

namespace test {

inline syklab::Matrix random_hermitian(Eigen::Index dim, syklab::Rng& rng) {
    syklab::Matrix a(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = {rng.normal(), rng.normal()};
    return (a + a.adjoint()) / 2.0;
}

// Random operator that commutes with the parity.
inline syklab::Matrix random_even_hermitian(int n, syklab::Rng& rng) {
    syklab::Matrix a = random_hermitian(Eigen::Index{1} << (n / 2), rng);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            if (syklab::is_odd_parity(r) != syklab::is_odd_parity(c)) a(r, c) = 0;
    return a;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("syklab_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace test
