/// @file random_fields.hpp
/// @brief Deterministic Gaussian random fields with prescribed spectral
///        envelopes, used to drive the inequality ensembles.
///
/// Construction: draw one iid complex Gaussian g(k) per grid frequency in a
/// fixed traversal order from a counter-based stream seeded by
/// (ensemble seed, sample index), then symmetrize
///     c(k) = (g(k) + conj(g(-k))) / 2 * A(kappa),
/// which is exactly Hermitian for any even envelope A, so the physical field
/// is real by construction.  DC and Nyquist planes are zeroed (derivatives
/// and dealiasing both want them empty), and the result is dealiased so
/// products of samples stay alias-free.  Identical input (seed, index,
/// grid, profile) gives byte-identical coefficients on every platform run
/// and thread count: the draw is a pure serial function of the stream.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsbh/field.hpp"
#include "nsbh/filterbank.hpp"

namespace nsbh {

enum class ProfileKind { white, power_law, single_block, anisotropic };

/// Which random ensemble to draw and how many samples.
struct EnsembleSpec {
    ProfileKind kind = ProfileKind::white;
    real gamma = 0.0;    ///< power_law decay exponent
    real gamma_h = 0.0;  ///< anisotropic horizontal exponent
    real gamma_v = 0.0;  ///< anisotropic vertical exponent
    int block_q = 0;     ///< single_block vertical block index (>= -1)
    int count = 100;     ///< number of samples
    std::uint64_t seed = 1;

    /// Spectral envelope A(kappa); even in every argument.
    real amplitude(real kh_mod, real kv) const {
        switch (kind) {
            case ProfileKind::white:
                return 1.0;
            case ProfileKind::power_law:
                return std::pow(1.0 + sq(kh_mod) + sq(kv), -0.5 * gamma);
            case ProfileKind::single_block:
                return block_q < 0 ? profile::psi(std::abs(kv))
                                   : profile::phi(std::ldexp(std::abs(kv), -block_q));
            case ProfileKind::anisotropic:
                return std::pow(1.0 + sq(kh_mod), -0.5 * gamma_h) *
                       std::pow(1.0 + sq(kv), -0.5 * gamma_v);
        }
        return 1.0;
    }

    static EnsembleSpec white_noise(int count, std::uint64_t seed) {
        EnsembleSpec e;
        e.kind = ProfileKind::white;
        e.count = count;
        e.seed = seed;
        return e;
    }
    static EnsembleSpec power(real gamma, int count, std::uint64_t seed) {
        EnsembleSpec e;
        e.kind = ProfileKind::power_law;
        e.gamma = gamma;
        e.count = count;
        e.seed = seed;
        return e;
    }
    static EnsembleSpec block(int q, int count, std::uint64_t seed) {
        EnsembleSpec e;
        e.kind = ProfileKind::single_block;
        e.block_q = q;
        e.count = count;
        e.seed = seed;
        return e;
    }
    static EnsembleSpec aniso(real gh, real gv, int count, std::uint64_t seed) {
        EnsembleSpec e;
        e.kind = ProfileKind::anisotropic;
        e.gamma_h = gh;
        e.gamma_v = gv;
        e.count = count;
        e.seed = seed;
        return e;
    }
};

namespace detail {

/// Raw iid complex Gaussian cube in fixed (i1,i2,i3) order.
inline std::vector<complexd> gaussian_cube(const AnisoGrid& g, Rng& rng) {
    std::vector<complexd> out(g.size());
    for (auto& c : out) c = rng.complex_normal();
    return out;
}

} // namespace detail

/// One scalar sample: Hermitian-symmetrized enveloped Gaussian noise,
/// DC/Nyquist-free and dealiased.
inline SpectralField random_scalar(const AnisoGrid& g, const EnsembleSpec& spec,
                                   int sample_index, int component = 0) {
    Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(sample_index) * 8 +
                                         static_cast<std::uint64_t>(component));
    const auto raw = detail::gaussian_cube(g, rng);
    SpectralField f(g);
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const int j1 = (g.Nh - i1) % g.Nh;
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const int j2 = (g.Nh - i2) % g.Nh;
            for (int i3 = 0; i3 < g.Nv; ++i3) {
                const int j3 = (g.Nv - i3) % g.Nv;
                // Nyquist planes and the mean are left empty.
                if (i1 == g.Nh / 2 || i2 == g.Nh / 2 || i3 == g.Nv / 2) continue;
                if (i1 == 0 && i2 == 0 && i3 == 0) continue;
                const real a = spec.amplitude(g.kappa_h_mod(i1, i2), g.kappa_v(i3));
                if (a == 0.0) continue;
                const complexd gk = raw[g.idx(i1, i2, i3)];
                const complexd gmk = raw[g.idx(j1, j2, j3)];
                f.coeffs()[g.idx(i1, i2, i3)] = 0.5 * (gk + std::conj(gmk)) * a;
            }
        }
    }
    return dealias_23(f);
}

/// One vector sample; components use disjoint sub-streams.  With
/// `divergence_free` the sample is Leray-projected (exactly solenoidal).
inline VectorField random_vector(const AnisoGrid& g, const EnsembleSpec& spec,
                                 int sample_index, bool divergence_free) {
    VectorField v{random_scalar(g, spec, sample_index, 0),
                  random_scalar(g, spec, sample_index, 1),
                  random_scalar(g, spec, sample_index, 2), false};
    if (divergence_free) v = leray_project(v);
    return v;
}

/// Stable 16-hex digest of a field's coefficients (worst-case reporting).
inline std::string field_digest(const SpectralField& f) {
    return digest_bytes(f.coeffs().data(), f.coeffs().size() * sizeof(complexd));
}

inline std::string field_digest(const VectorField& v) {
    const std::string cat = field_digest(v.c1) + field_digest(v.c2) + field_digest(v.c3);
    return digest_bytes(cat.data(), cat.size());
}

} // namespace nsbh
