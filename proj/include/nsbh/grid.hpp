/// @file grid.hpp
/// @brief Anisotropic periodic grid: two horizontal axes sharing one
///        resolution and box scale, one vertical axis with its own.
///
/// The physical box is [0, 2*pi*Lh)^2 x [0, 2*pi*Lv).  Wavenumbers along a
/// horizontal axis are k/Lh for integer k in [-Nh/2, Nh/2), and k/Lv
/// vertically, so Lh and Lv set the frequency granularity: the box is a
/// desk-scale periodic proxy for the whole space, and every frequency-local
/// statement downstream is evaluated at these discrete wavenumbers only.
///
/// Storage convention for all 3-D arrays: index (i1, i2, i3) maps to
/// (i1*Nh + i2)*Nv + i3 — the vertical axis is fastest-varying.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "nsbh/core.hpp"

namespace nsbh {

struct AnisoGrid {
    int Nh = 0;   ///< points per horizontal axis (power of two, >= 8)
    int Nv = 0;   ///< points on the vertical axis (power of two, >= 8)
    real Lh = 1.0; ///< horizontal box scale: box side 2*pi*Lh
    real Lv = 1.0; ///< vertical box scale: box height 2*pi*Lv

    AnisoGrid() = default;
    AnisoGrid(int nh, int nv, real lh = 1.0, real lv = 1.0)
        : Nh(nh), Nv(nv), Lh(lh), Lv(lv) {
        validate();
    }

    static bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

    void validate() const {
        if (!power_of_two(Nh) || Nh < 8 || !power_of_two(Nv) || Nv < 8)
            throw std::invalid_argument(
                "AnisoGrid: Nh and Nv must be powers of two >= 8, got Nh=" +
                std::to_string(Nh) + " Nv=" + std::to_string(Nv));
        if (!(Lh > 0.0) || !(Lv > 0.0))
            throw std::invalid_argument("AnisoGrid: box scales must be positive");
    }

    bool operator==(const AnisoGrid& o) const {
        return Nh == o.Nh && Nv == o.Nv && Lh == o.Lh && Lv == o.Lv;
    }
    bool operator!=(const AnisoGrid& o) const { return !(*this == o); }

    std::size_t size() const {
        return static_cast<std::size_t>(Nh) * static_cast<std::size_t>(Nh) *
               static_cast<std::size_t>(Nv);
    }

    std::size_t idx(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i1) * Nh + i2) * Nv + i3;
    }

    /// Signed integer frequency for storage index i on an axis with N points:
    /// 0,1,...,N/2-1,-N/2,...,-1 (standard DFT layout).
    static int freq(int i, int N) { return i < N / 2 ? i : i - N; }

    /// Scaled wavenumber components (the xi of every multiplier downstream).
    real kappa_h(int i) const { return freq(i, Nh) / Lh; }
    real kappa_v(int i) const { return freq(i, Nv) / Lv; }

    /// |xi_h| at horizontal indices (i1, i2).
    real kappa_h_mod(int i1, int i2) const {
        return std::sqrt(sq(kappa_h(i1)) + sq(kappa_h(i2)));
    }

    /// Physical coordinates of a grid point.
    real x_h(int i) const { return 2.0 * pi * Lh * i / Nh; }
    real x_v(int i) const { return 2.0 * pi * Lv * i / Nv; }

    /// Box measure and quadrature weight of one grid point.
    real volume() const { return sq(2.0 * pi * Lh) * (2.0 * pi * Lv); }
    real quad_weight() const { return volume() / static_cast<real>(size()); }

    /// Largest scaled wavenumber moduli representable on the grid.
    real kappa_h_max() const { return std::sqrt(2.0) * (Nh / 2) / Lh; }
    real kappa_v_max() const { return (Nv / 2) / Lv; }

    /// 2/3-rule cutoffs: keep |k| <= N/3 along each axis.  Since N is a power
    /// of two, 3*(N/3) < N always holds, so products of two retained modes
    /// alias only onto discarded ones.
    int dealias_kmax_h() const { return Nh / 3; }
    int dealias_kmax_v() const { return Nv / 3; }
};

} // namespace nsbh
