/// @file core.hpp
/// @brief Shared scalar aliases, deterministic random numbers, and a
///        deterministic parallel loop.
///
/// Everything downstream is required to be bit-reproducible for a fixed seed,
/// independent of thread count.  Two rules make that possible:
///
///   1. Random streams are derived per work item (splitmix64 of seed and item
///      index), never shared across items, and normal deviates are produced
///      by an explicit Box-Muller transform.  std::normal_distribution is
///      implementation-defined and would tie results to a libstdc++ version.
///
///   2. parallel_for partitions the index range; each worker writes only to
///      slots owned by its indices.  Reductions happen afterwards, serially,
///      in index order, so the schedule can never reorder a floating-point
///      sum.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace nsbh {

using real = double;
using complexd = std::complex<double>;

inline constexpr real pi = 3.14159265358979323846264338327950288;
inline constexpr real inf = std::numeric_limits<real>::infinity();

inline real sq(real x) { return x * x; }

// ===========================================================================
// Deterministic RNG
// ===========================================================================

/// splitmix64: the standard 64-bit finalizer, used to derive independent
/// stream seeds from (seed, index) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic Gaussian source: xoshiro-free, relies only on the fixed
/// semantics of splitmix64 and IEEE doubles.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    /// Derive an independent stream for work item `index` of stream `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix64(seed) ^ splitmix64(0x9e3779b97f4a7c15ULL + index));
    }

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    /// Uniform in [0,1) with 53 random bits.
    real uniform() { return static_cast<real>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (explicit, platform-independent).
    real normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        real u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const real r = std::sqrt(-2.0 * std::log(u1));
        const real a = 2.0 * pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    complexd complex_normal() {
        const real re = normal();
        const real im = normal();
        return {re, im};
    }

  private:
    std::uint64_t state_;
    real spare_ = 0.0;
    bool have_spare_ = false;
};

// ===========================================================================
// Deterministic parallelism
// ===========================================================================

namespace threads {

inline int& count_ref() {
    static int n = 1;
    return n;
}
inline int count() { return count_ref(); }
inline void set_count(int n) { count_ref() = n < 1 ? 1 : n; }

} // namespace threads

/// Run fn(i) for i in [0,n).  Work is split into contiguous chunks, one per
/// worker.  fn must only write to state owned by index i; any reduction is
/// the caller's job and must run serially afterwards.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int nt = threads::count();
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// FNV-1a digest of a byte range; used to fingerprint worst-case ensemble
/// members in reports.
inline std::string digest_bytes(const void* data, std::size_t nbytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < nbytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace nsbh
