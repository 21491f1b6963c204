/// @file field.hpp
/// @brief Spectral scalar and vector fields plus the differential operators
///        every estimate downstream is built from.
///
/// A SpectralField stores the full complex coefficient cube with the
/// normalization  f(x) = sum_k fhat(k) exp(i kappa.x),  i.e. forward()
/// divides the DFT by the point count, so the DC coefficient of a constant
/// field c is exactly c.  With that normalization Parseval reads
///
///     ||f||_{L^2}^2 = volume * sum_k |fhat(k)|^2 .
///
/// Real fields correspond to Hermitian coefficient cubes
/// (fhat(-k) = conj(fhat(k))); inverse() enforces this before transforming.
///
/// Nyquist convention: the derivative multiplier i*kappa is odd, which a
/// self-conjugate Nyquist plane cannot represent, so derivative() zeroes the
/// Nyquist plane of its axis.  Every field the generators and the solver
/// produce is dealiased (|k| <= N/3 < N/2), so this convention is only ever
/// visible to raw forward() round-trips.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsbh/fft.hpp"
#include "nsbh/grid.hpp"

namespace nsbh {

class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(const AnisoGrid& g) : grid_(g), c_(g.size(), complexd{0.0, 0.0}) {}

    const AnisoGrid& grid() const { return grid_; }
    const std::vector<complexd>& coeffs() const { return c_; }
    std::vector<complexd>& coeffs() { return c_; }

    complexd& at(int i1, int i2, int i3) { return c_[grid_.idx(i1, i2, i3)]; }
    const complexd& at(int i1, int i2, int i3) const { return c_[grid_.idx(i1, i2, i3)]; }

    bool empty() const { return c_.empty(); }

    /// Physical L^2 norm via Parseval: sqrt(volume * sum |coeff|^2).
    real l2_norm() const {
        real s = 0.0;
        for (const auto& z : c_) s += std::norm(z);
        return std::sqrt(s * grid_.volume());
    }

    real linf_coeff() const {
        real m = 0.0;
        for (const auto& z : c_) m = std::max(m, std::abs(z));
        return m;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    SpectralField& operator*=(real a) {
        for (auto& z : c_) z *= a;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(real a, SpectralField f) { return f *= a; }

    void check_same_grid(const SpectralField& o) const {
        if (grid_ != o.grid_)
            throw std::invalid_argument("SpectralField: operands live on different grids");
    }

  private:
    AnisoGrid grid_;
    std::vector<complexd> c_;
};

// ===========================================================================
// Transforms
// ===========================================================================

/// Physical samples -> spectral coefficients (with the 1/N normalization).
inline SpectralField forward(const std::vector<real>& phys, const AnisoGrid& g) {
    if (phys.size() != g.size())
        throw std::invalid_argument(
            "forward: physical array has " + std::to_string(phys.size()) +
            " samples but the grid is " + std::to_string(g.Nh) + "x" +
            std::to_string(g.Nh) + "x" + std::to_string(g.Nv) + " = " +
            std::to_string(g.size()));
    std::vector<complexd> in(g.size());
    for (std::size_t i = 0; i < phys.size(); ++i) in[i] = complexd{phys[i], 0.0};
    SpectralField out(g);
    dft3(g, in.data(), out.coeffs().data(), FFTW_FORWARD);
    const real scale = 1.0 / static_cast<real>(g.size());
    for (auto& z : out.coeffs()) z *= scale;
    return out;
}

namespace detail {

/// Max Hermitian-symmetry violation |c(-k) - conj(c(k))| over the cube.
inline real hermitian_violation(const SpectralField& f) {
    const AnisoGrid& g = f.grid();
    real worst = 0.0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const int j1 = (g.Nh - i1) % g.Nh;
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const int j2 = (g.Nh - i2) % g.Nh;
            for (int i3 = 0; i3 < g.Nv; ++i3) {
                const int j3 = (g.Nv - i3) % g.Nv;
                const complexd d = f.at(j1, j2, j3) - std::conj(f.at(i1, i2, i3));
                worst = std::max(worst, std::abs(d));
            }
        }
    }
    return worst;
}

/// Inverse transform without the Hermitian check (hot path for norms whose
/// inputs are products of already-validated fields).
inline std::vector<real> inverse_unchecked(const SpectralField& f) {
    const AnisoGrid& g = f.grid();
    std::vector<complexd> out(g.size());
    dft3(g, f.coeffs().data(), out.data(), FFTW_BACKWARD);
    std::vector<real> phys(g.size());
    for (std::size_t i = 0; i < phys.size(); ++i) phys[i] = out[i].real();
    return phys;
}

} // namespace detail

/// Spectral coefficients -> physical samples.  Rejects coefficient cubes
/// that are not Hermitian (they do not describe a real field).
inline std::vector<real> inverse(const SpectralField& f) {
    const real scale = std::max(1.0, f.linf_coeff());
    if (detail::hermitian_violation(f) > 1e-10 * scale)
        throw std::invalid_argument(
            "inverse: coefficients break Hermitian symmetry; field is not real");
    return detail::inverse_unchecked(f);
}

// ===========================================================================
// Pointwise multiplier helpers
// ===========================================================================

/// Apply a multiplier m(kappa1, kappa2, kappa3) given as a callable on the
/// scaled wavenumbers.  Purely diagonal in frequency space.
template <typename Fn>
inline SpectralField apply_multiplier(const SpectralField& f, Fn&& m) {
    const AnisoGrid& g = f.grid();
    SpectralField out(g);
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real k1 = g.kappa_h(i1);
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real k2 = g.kappa_h(i2);
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                out.coeffs()[p] = f.coeffs()[p] * m(k1, k2, g.kappa_v(i3));
            }
        }
    }
    return out;
}

/// d/dx_axis: multiply by i*kappa_axis; the Nyquist plane of that axis is
/// zeroed (see file header).
inline SpectralField derivative(const SpectralField& f, int axis) {
    if (axis < 1 || axis > 3) throw std::invalid_argument("derivative: axis must be 1, 2 or 3");
    const AnisoGrid& g = f.grid();
    SpectralField out(g);
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                const int idx = axis == 1 ? i1 : (axis == 2 ? i2 : i3);
                const int N = axis == 3 ? g.Nv : g.Nh;
                if (idx == N / 2) continue; // Nyquist: no faithful odd multiplier
                const real k = axis == 1 ? g.kappa_h(i1)
                             : axis == 2 ? g.kappa_h(i2)
                                         : g.kappa_v(i3);
                out.coeffs()[p] = f.coeffs()[p] * complexd{0.0, k};
            }
        }
    }
    return out;
}

/// exp(t * Laplacian_h): each mode is damped by exp(-t |kappa_h|^2); modes
/// with kappa_h = 0 are untouched — the defining anisotropy of the model.
inline SpectralField horizontal_laplacian_semigroup(const SpectralField& f, real t) {
    if (t < 0.0) throw std::invalid_argument("horizontal_laplacian_semigroup: t must be >= 0");
    return apply_multiplier(f, [t](real k1, real k2, real) {
        return std::exp(-t * (sq(k1) + sq(k2)));
    });
}

/// ||grad_h f||_{L^2}^2 by Parseval (no transform needed).
inline real grad_h_l2sq(const SpectralField& f) {
    const AnisoGrid& g = f.grid();
    real s = 0.0;
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real k1 = g.kappa_h(i1);
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real kh2 = sq(k1) + sq(g.kappa_h(i2));
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) s += kh2 * std::norm(f.coeffs()[p]);
        }
    }
    return s * g.volume();
}

/// Zero every mode outside the 2/3-rule cube |k_i| <= N_i/3.
inline SpectralField dealias_23(const SpectralField& f) {
    const AnisoGrid& g = f.grid();
    const int kh = g.dealias_kmax_h(), kv = g.dealias_kmax_v();
    SpectralField out(g);
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const bool ok1 = std::abs(AnisoGrid::freq(i1, g.Nh)) <= kh;
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const bool ok2 = ok1 && std::abs(AnisoGrid::freq(i2, g.Nh)) <= kh;
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                if (ok2 && std::abs(AnisoGrid::freq(i3, g.Nv)) <= kv)
                    out.coeffs()[p] = f.coeffs()[p];
            }
        }
    }
    return out;
}

/// Pointwise physical product without dealiasing (aliased images retained).
inline SpectralField product_raw(const SpectralField& a, const SpectralField& b) {
    a.check_same_grid(b);
    const auto pa = detail::inverse_unchecked(a);
    const auto pb = detail::inverse_unchecked(b);
    std::vector<real> prod(pa.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = pa[i] * pb[i];
    return forward(prod, a.grid());
}

/// Pointwise physical product of two spectral fields, dealiased by the 2/3
/// rule.  For band-limited inputs (|k| <= N/3) the retained modes equal the
/// exact convolution: aliased images land outside the cube and are removed.
inline SpectralField product_dealiased(const SpectralField& a, const SpectralField& b) {
    a.check_same_grid(b);
    const auto pa = detail::inverse_unchecked(a);
    const auto pb = detail::inverse_unchecked(b);
    std::vector<real> prod(pa.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = pa[i] * pb[i];
    return dealias_23(forward(prod, a.grid()));
}

// ===========================================================================
// Vector fields and the Leray projection
// ===========================================================================

struct VectorField {
    SpectralField c1, c2, c3;
    bool divergence_free = false;

    VectorField() = default;
    explicit VectorField(const AnisoGrid& g) : c1(g), c2(g), c3(g) {}
    VectorField(SpectralField a, SpectralField b, SpectralField c, bool df = false)
        : c1(std::move(a)), c2(std::move(b)), c3(std::move(c)), divergence_free(df) {}

    const AnisoGrid& grid() const { return c1.grid(); }
    SpectralField& comp(int i) { return i == 1 ? c1 : (i == 2 ? c2 : c3); }
    const SpectralField& comp(int i) const { return i == 1 ? c1 : (i == 2 ? c2 : c3); }

    VectorField& operator-=(const VectorField& o) {
        c1 -= o.c1; c2 -= o.c2; c3 -= o.c3;
        return *this;
    }
    friend VectorField operator-(VectorField a, const VectorField& b) {
        a -= b;
        a.divergence_free = a.divergence_free && b.divergence_free;
        return a;
    }

    real l2_norm() const {
        return std::sqrt(sq(c1.l2_norm()) + sq(c2.l2_norm()) + sq(c3.l2_norm()));
    }
};

inline SpectralField divergence(const VectorField& v) {
    SpectralField d = derivative(v.c1, 1);
    d += derivative(v.c2, 2);
    d += derivative(v.c3, 3);
    return d;
}

/// max_k |kappa . vhat(k)| / |vhat(k)| over modes with |vhat(k)| > 0.
/// Uses the same multiplier convention as derivative(): the Nyquist row of an
/// axis carries no faithful odd multiplier, so it contributes zero to the
/// discrete divergence (otherwise curl-built fields would be charged for
/// content the derivative operator cannot act on).
inline real divergence_residual(const VectorField& v) {
    const AnisoGrid& g = v.grid();
    real worst = 0.0;
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real k1 = i1 == g.Nh / 2 ? 0.0 : g.kappa_h(i1);
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real k2 = i2 == g.Nh / 2 ? 0.0 : g.kappa_h(i2);
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                const real k3 = i3 == g.Nv / 2 ? 0.0 : g.kappa_v(i3);
                const complexd dot = k1 * v.c1.coeffs()[p] + k2 * v.c2.coeffs()[p] +
                                     k3 * v.c3.coeffs()[p];
                const real mag = std::sqrt(std::norm(v.c1.coeffs()[p]) +
                                           std::norm(v.c2.coeffs()[p]) +
                                           std::norm(v.c3.coeffs()[p]));
                if (mag > 0.0) worst = std::max(worst, std::abs(dot) / mag);
            }
        }
    }
    return worst;
}

/// Leray projection onto divergence-free fields:
/// vhat -> vhat - kappa (kappa . vhat)/|kappa|^2, mean passed through.
/// Nyquist rows use the derivative()/divergence convention (multiplier 0
/// on that axis), so the output is annihilated by the discrete divergence.
inline VectorField leray_project(const VectorField& v) {
    if (v.c1.grid() != v.c2.grid() || v.c1.grid() != v.c3.grid())
        throw std::invalid_argument("leray_project: components on different grids");
    const AnisoGrid& g = v.grid();
    VectorField out(g);
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real k1 = i1 == g.Nh / 2 ? 0.0 : g.kappa_h(i1);
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real k2 = i2 == g.Nh / 2 ? 0.0 : g.kappa_h(i2);
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                const real k3 = i3 == g.Nv / 2 ? 0.0 : g.kappa_v(i3);
                const real k2sum = sq(k1) + sq(k2) + sq(k3);
                const complexd v1 = v.c1.coeffs()[p], v2 = v.c2.coeffs()[p],
                               v3 = v.c3.coeffs()[p];
                if (k2sum == 0.0) { // mean: the pressure is defined up to a constant
                    out.c1.coeffs()[p] = v1;
                    out.c2.coeffs()[p] = v2;
                    out.c3.coeffs()[p] = v3;
                } else {
                    const complexd dot = (k1 * v1 + k2 * v2 + k3 * v3) / k2sum;
                    out.c1.coeffs()[p] = v1 - k1 * dot;
                    out.c2.coeffs()[p] = v2 - k2 * dot;
                    out.c3.coeffs()[p] = v3 - k3 * dot;
                }
            }
        }
    }
    out.divergence_free = true;
    return out;
}

// ===========================================================================
// Mixed Lebesgue norms by physical-space quadrature
// ===========================================================================

enum class NormOrder { h_outer, v_outer };

struct MixedNormSpec {
    real p_h = 2.0;  ///< horizontal exponent: 2, 4 or infinity
    real q_v = 2.0;  ///< vertical exponent: 2 or infinity
    NormOrder order = NormOrder::h_outer;

    void validate() const {
        const bool ph_ok = p_h == 2.0 || p_h == 4.0 || std::isinf(p_h);
        const bool qv_ok = q_v == 2.0 || std::isinf(q_v);
        if (!ph_ok || !qv_ok)
            throw std::invalid_argument(
                "MixedNormSpec: p_h must be one of {2,4,inf}, q_v one of {2,inf}");
    }
};

namespace detail {

/// 1-D L^p norm of |values| with quadrature weight w per sample.
/// Supports p in {1, 2, 4, inf}.
inline real lp_reduce(const std::vector<real>& vals, real w, real p) {
    if (std::isinf(p)) {
        real m = 0.0;
        for (real v : vals) m = std::max(m, std::abs(v));
        return m;
    }
    real s = 0.0;
    if (p == 1.0)
        for (real v : vals) s += std::abs(v);
    else if (p == 2.0)
        for (real v : vals) s += v * v;
    else if (p == 4.0)
        for (real v : vals) s += sq(v * v);
    else
        throw std::invalid_argument("lp_reduce: unsupported exponent");
    return std::pow(s * w, 1.0 / p);
}

} // namespace detail

/// Iterated L^{p_h}_h L^{q_v}_v (h_outer) or L^{q_v}_v L^{p_h}_h (v_outer)
/// norm by physical-space quadrature: inner norm per slice, outer norm over
/// the remaining variable.
inline real mixed_norm(const SpectralField& f, const MixedNormSpec& spec) {
    spec.validate();
    const AnisoGrid& g = f.grid();
    const auto phys = detail::inverse_unchecked(f);
    const real wh = sq(2.0 * pi * g.Lh) / sq(static_cast<real>(g.Nh)); // per horizontal point
    const real wv = (2.0 * pi * g.Lv) / static_cast<real>(g.Nv);       // per vertical point

    if (spec.order == NormOrder::h_outer) {
        // inner: vertical norm per column; outer: horizontal norm of those.
        std::vector<real> col(g.Nv), inner(static_cast<std::size_t>(g.Nh) * g.Nh);
        for (int i1 = 0; i1 < g.Nh; ++i1)
            for (int i2 = 0; i2 < g.Nh; ++i2) {
                for (int i3 = 0; i3 < g.Nv; ++i3) col[i3] = phys[g.idx(i1, i2, i3)];
                inner[static_cast<std::size_t>(i1) * g.Nh + i2] =
                    detail::lp_reduce(col, wv, spec.q_v);
            }
        return detail::lp_reduce(inner, wh, spec.p_h);
    }
    // v_outer: inner horizontal norm per level, outer vertical norm.
    std::vector<real> slice(static_cast<std::size_t>(g.Nh) * g.Nh), inner(g.Nv);
    for (int i3 = 0; i3 < g.Nv; ++i3) {
        for (int i1 = 0; i1 < g.Nh; ++i1)
            for (int i2 = 0; i2 < g.Nh; ++i2)
                slice[static_cast<std::size_t>(i1) * g.Nh + i2] = phys[g.idx(i1, i2, i3)];
        inner[i3] = detail::lp_reduce(slice, wh, spec.p_h);
    }
    return detail::lp_reduce(inner, wv, spec.q_v);
}

/// L^2 inner product by coefficient sum (equals the physical quadrature
/// inner product by Parseval).
inline real inner_l2(const SpectralField& a, const SpectralField& b) {
    a.check_same_grid(b);
    real s = 0.0;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        s += (a.coeffs()[i] * std::conj(b.coeffs()[i])).real();
    return s * a.grid().volume();
}

} // namespace nsbh
