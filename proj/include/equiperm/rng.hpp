#pragma once

#include <cmath>
#include <cstdint>

namespace equiperm::rng {

/// splitmix64 finalizer (Steele/Lea/Vigna). Used both to key sub-streams and
/// as the per-stream engine, so every (seed, id...) tuple opens an independent
/// reproducible stream regardless of evaluation order or thread count.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derive a stream key from a seed and a chain of identifiers.
template <class... Ids>
constexpr std::uint64_t derive(std::uint64_t seed, Ids... ids) {
    ((seed = mix64(seed ^ static_cast<std::uint64_t>(ids))), ...);
    return seed;
}

// stream tags; distinct constants keep data/permutation/replicate draws apart
inline constexpr std::uint64_t tag_row = 0x524f575f54414721ull;
inline constexpr std::uint64_t tag_data = 0x444154415f544147ull;
inline constexpr std::uint64_t tag_perm = 0x5045524d5f544147ull;
inline constexpr std::uint64_t tag_boundary_lower = 0x424f554e445f4c4full;
inline constexpr std::uint64_t tag_boundary_upper = 0x424f554e445f5550ull;
inline constexpr std::uint64_t tag_power = 0x504f5745525f5441ull;
inline constexpr std::uint64_t tag_calibration = 0x43414c49425f5441ull;
inline constexpr std::uint64_t tag_design = 0x44455349474e5f54ull;

/// Counter-keyed deterministic generator (splitmix64 sequence). Value type,
/// cheap to construct per replicate/row; identical key -> identical draws.
class Stream {
public:
    constexpr explicit Stream(std::uint64_t key) : state_(key) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// uniform on [0,1), 53-bit resolution
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// uniform on (0,1]; safe as a log() argument
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// unbiased integer in [0, n) (Lemire multiply-shift with rejection)
    std::uint32_t below(std::uint32_t n) {
        std::uint64_t x = next() >> 32;
        std::uint64_t m = x * n;
        auto low = static_cast<std::uint32_t>(m);
        if (low < n) {
            std::uint32_t threshold = (0u - n) % n;
            while (low < threshold) {
                x = next() >> 32;
                m = x * n;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    /// standard normal via Box-Muller; two uniforms per value, no carry-over
    /// state so draws are a pure function of the stream position
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::uint64_t state_;
};

}  // namespace equiperm::rng
