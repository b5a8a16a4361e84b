#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace syklab {

// Reproducible random source.
//
// Each (seed, stream) pair seeds an independent mt19937_64 through
// std::seed_seq; both algorithms are fully specified by the standard, so a
// stream replays bit-for-bit on any conforming platform. Ensemble member k of
// an experiment draws from its own stream, which makes member k reproducible
// regardless of the order (or thread) in which members are generated.
//
// Gaussian variates come from Box-Muller on two uniforms: exactly two engine
// outputs per normal, no rejection loop.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal.
    double normal();
    void fill_normal(std::span<double> out);

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Text snapshot of the engine (standard mt19937_64 stream format).
    std::string state() const;
    void restore(const std::string& state);

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

// Stream layout shared by the experiment drivers. Index k within a family
// is added to the family base.
namespace streams {
inline constexpr std::uint64_t target = 0;                 // Hamiltonians under study
inline constexpr std::uint64_t pool = 1ULL << 32;          // eigenvalue pool members
inline constexpr std::uint64_t resample = 2ULL << 32;      // Poissonization draws
inline constexpr std::uint64_t chain = 3ULL << 32;         // Metropolis chains
inline constexpr std::uint64_t reference = 4ULL << 32;     // reference statistics
} // namespace streams

} // namespace syklab
