#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace equivcheck {

/// SplitMix64 finalizer. Used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over the bytes of `text`, folded into `seed`. Stable across
/// platforms and builds, unlike std::hash.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

/// Derive a sub-seed from a master seed and a list of identifiers, e.g.
/// derive_seed(master, {"fit", "t_nr", "reference", "gamma"}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> parts) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Random stream with distribution algorithms implemented here rather than
/// taken from <random>, whose distributions are implementation-defined. The
/// engine (mt19937_64) output sequence is fixed by the standard, so draws are
/// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on (0, 1), never exactly 0 or 1.
    double uniform();
    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double exponential(double rate);
    /// Marsaglia-Tsang; shape > 0, unit scale.
    double gamma(double shape);
    double beta(double a, double b);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace equivcheck
