#include "syklab/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "syklab/errors.hpp"

namespace syklab {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void Rng::fill_normal(std::span<double> out) {
    std::size_t k = 0;
    for (; k + 1 < out.size(); k += 2) {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        out[k] = r * std::cos(2.0 * std::numbers::pi * u2);
        out[k + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    if (k < out.size()) out[k] = normal();
}

std::uint64_t Rng::below(std::uint64_t n) {
    const unsigned __int128 wide = static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
}

std::string Rng::state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::restore(const std::string& state) {
    std::istringstream is(state);
    std::mt19937_64 e;
    is >> e;
    if (!is) throw ArgumentError("malformed RNG state");
    engine_ = e;
}

} // namespace syklab
