#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>

namespace cvqc {

inline constexpr double pi = std::numbers::pi;

/// Reduce an angle to the interval (-pi, pi].
inline double wrap_to_pi(double angle) {
    double w = std::remainder(angle, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

/// SplitMix64 step; also used to whiten user-provided seeds.
inline std::uint64_t split_mix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic sub-stream seed from a base seed and up to two stream labels.
/// Independent labels give statistically independent streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = base;
    std::uint64_t h = split_mix64(s);
    s ^= a * 0xd6e8feb86659fd93ULL;
    h ^= split_mix64(s);
    s ^= b * 0xa5cb3d4b7e3c925fULL;
    h ^= split_mix64(s);
    return h;
}

/// FNV-1a 64-bit content checksum (stable across platforms and runs).
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes);

/// Shortest round-trip decimal rendering of a double (locale independent,
/// byte-stable across runs). Used for all emitted CSV/JSON numbers.
std::string format_double(double value);

/// Run fn(i) for i in [0, n) on up to `workers` threads. Blocks until done.
/// Work items must be independent; exceptions are rethrown on the caller.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

}  // namespace cvqc
