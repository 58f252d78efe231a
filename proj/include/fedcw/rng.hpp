#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fedcw {

/// SplitMix64 mixing step; used to derive well-separated stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for a named per-entity stream, e.g. derive_seed(seed, "backoff", sta).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    }
    return splitmix64(master ^ splitmix64(h ^ splitmix64(index)));
}

/// Uniform draw in [0, range) from a u64 source, rejection + modulo. Exact
/// (bias-free) whenever range divides 2^64, which covers every CW range used
/// by the MAC; the residual bias for other ranges is below 2^-63.
template <typename U64Source>
std::uint64_t bounded_u64(U64Source&& next, std::uint64_t range) {
    if (range == 0) {
        return 0;
    }
    const std::uint64_t residue = -range % range;  // 2^64 mod range
    const std::uint64_t limit = 0ULL - residue;    // largest multiple of range
    std::uint64_t x = next();
    while (limit != 0 && x >= limit) {
        x = next();
    }
    return x % range;
}

/// Deterministic random stream with pinned draw algorithms. std::mt19937_64
/// is fully specified by the standard and the distribution transforms are
/// implemented here, so identical seeds give identical draws on any platform.
class RngStream {
  public:
    RngStream() : gen_(0x853c49e6748fea9bULL) {}
    explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return bounded_u64([this] { return gen_(); }, n);
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Standard normal via Box-Muller, spare value cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        double mag = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fedcw
