/// @file filterbank.hpp
/// @brief Dyadic frequency decomposition in the horizontal and vertical
///        directions: block operators, low-pass cutoffs, paraproduct
///        splitting, and per-block coefficient families.
///
/// Profile construction.  A C^inf cutoff chi is built from the classical
/// exp(-1/t) step: chi(r) = 1 for r <= 3/4, chi(r) = 0 for r >= 4/3, and a
/// smooth monotone transition in between.  The band profile is the dyadic
/// difference
///
///     phi(r) = chi(r/2) - chi(r),          psi = chi,
///
/// so supp(psi) in {r <= 4/3}, supp(phi) in {3/4 <= r <= 8/3}, and the two
/// partition identities hold *by telescoping*, exactly at every frequency:
///
///     psi(r) + sum_{q>=0} phi(2^-q r)   = chi(2^-(Q+1) r) = 1
///     sum_{q in Z} phi(2^-q r)          = 1   for r != 0
///
/// once Q is large enough that 2^-(Q+1) r <= 3/4 for all resolvable r, which
/// the q_max choice below guarantees.
///
/// Two multiplier families.  The *partition* family (psi, phi) defines the
/// block operators Delta_q and the low-pass S_q; sums of blocks reconstruct
/// the field exactly.  Norms and pairings instead use the *tight* family
///
///     phiT_q = phi_q / sqrt(m),   psiT = psi / sqrt(m),
///     m(r) = psi(r)^2 + sum_q phi(2^-q r)^2  in [1/2, 1],
///
/// whose squares sum to exactly 1 at every frequency.  Tightness makes the
/// weighted pairings genuine inner products: the (0,0) pairing is exactly
/// the L^2 inner product, so e.g. the advection skew-symmetry
/// <u.grad w, w> = 0 survives the block decomposition to rounding instead of
/// to the partition's overlap defect.  The two families agree up to the
/// recorded equivalence band [m_min, 1].
///
/// The low-pass S_q means sum_{m <= q-1} Delta_m (ball multiplier
/// chi(2^-q r), empty for q <= -1) — the convention every product estimate
/// downstream relies on.

#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "nsbh/field.hpp"
#include "nsbh/grid.hpp"

namespace nsbh {

// ===========================================================================
// Smooth profiles
// ===========================================================================

namespace profile {

/// exp(-1/t) for t > 0, else 0: the classical C^inf step ingredient.
inline real smooth_step_raw(real t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// Smooth monotone 0 -> 1 transition on [0, 1].
inline real smooth_step(real t) {
    const real a = smooth_step_raw(t);
    const real b = smooth_step_raw(1.0 - t);
    return a / (a + b);
}

/// chi: 1 on [0, 3/4], 0 on [4/3, inf), smooth monotone in between.
inline real chi(real r) {
    r = std::abs(r);
    if (r <= 0.75) return 1.0;
    if (r >= 4.0 / 3.0) return 0.0;
    return 1.0 - smooth_step((r - 0.75) / (4.0 / 3.0 - 0.75));
}

/// phi: the dyadic band profile, supported in [3/4, 8/3].
inline real phi(real r) { return chi(r / 2.0) - chi(r); }

/// psi: the low-frequency ball profile (= chi).
inline real psi(real r) { return chi(r); }

} // namespace profile

// ===========================================================================
// Filter bank
// ===========================================================================

/// Per-block coefficient family of one field (statement-style bookkeeping):
/// values[q] = 2^{qs} ||Block_q f|| / total, so sum values^2 = 1 exactly for
/// a nonzero field (zero field: all zeros by convention).
struct BlockCoeffs {
    std::map<int, real> values;
    real s = 0.0;
    real total = 0.0; ///< the l^2 norm of the weighted block family

    real sum_sq() const {
        real t = 0.0;
        for (const auto& [q, c] : values) t += c * c;
        return t;
    }
};

enum class BlockAxis { horizontal, vertical };
enum class CoeffMode { block, lowpass };

class DyadicFilterBank {
  public:
    static constexpr int N0 = 5;      ///< paraproduct interaction width
    static constexpr int q_min = -1;  ///< nonhomogeneous low block index

    explicit DyadicFilterBank(const AnisoGrid& g) : grid_(g) {
        q_max_v_ = q_max_for(g.kappa_v_max());
        q_max_h_ = q_max_for(g.kappa_h_max());
        build_tables();
    }

    const AnisoGrid& grid() const { return grid_; }
    int q_max_v() const { return q_max_v_; }
    int q_max_h() const { return q_max_h_; }

    /// Tightness defect band of the partition family: m(xi) in [m_min, m_max]
    /// over all resolvable grid frequencies (both directions).
    real m_min() const { return m_min_; }
    real m_max() const { return m_max_; }

    /// Multiplier of the vertical block q at vertical storage index i3
    /// (partition family).  q < -1 gives 0.
    real mult_v(int q, int i3) const {
        if (q < -1 || q > q_max_v_) return 0.0;
        return q == -1 ? psi_v_[i3] : phi_v_[static_cast<std::size_t>(q) * grid_.Nv + i3];
    }
    real mult_h(int j, int i1, int i2) const {
        if (j < -1 || j > q_max_h_) return 0.0;
        const std::size_t hidx = static_cast<std::size_t>(i1) * grid_.Nh + i2;
        return j == -1 ? psi_h_[hidx]
                       : phi_h_[static_cast<std::size_t>(j) * grid_.Nh * grid_.Nh + hidx];
    }

    /// Tight-family multipliers (squares sum to exactly 1 per frequency).
    real tight_v(int q, int i3) const { return mult_v(q, i3) * inv_sqrt_m_v_[i3]; }
    real tight_h(int j, int i1, int i2) const {
        return mult_h(j, i1, i2) * inv_sqrt_m_h_[static_cast<std::size_t>(i1) * grid_.Nh + i2];
    }

    /// Low-pass multiplier sum_{m <= q-1} phi-family = chi(2^-q xi); 0 for
    /// q <= -1 (empty sum).
    static real lowpass_profile(int q, real xi) {
        if (q < 0) return 0.0;
        return profile::chi(std::ldexp(std::abs(xi), -q));
    }

    // -- Block operators ----------------------------------------------------

    /// Vertical dyadic block: multiplier phi(2^-q |xi_3|) (psi for q = -1),
    /// zero field for q < -1.
    SpectralField delta_v(int q, const SpectralField& f) const {
        check_grid(f);
        if (q > q_max_v_)
            throw std::invalid_argument("delta_v: q exceeds q_max of the bank");
        SpectralField out(grid_);
        if (q < -1) return out;
        for (int i1 = 0; i1 < grid_.Nh; ++i1)
            for (int i2 = 0; i2 < grid_.Nh; ++i2)
                for (int i3 = 0; i3 < grid_.Nv; ++i3) {
                    const real m = mult_v(q, i3);
                    if (m != 0.0)
                        out.at(i1, i2, i3) = f.at(i1, i2, i3) * m;
                }
        return out;
    }

    /// Horizontal dyadic block: multiplier phi(2^-j |xi_h|).
    SpectralField delta_h(int j, const SpectralField& f) const {
        check_grid(f);
        if (j > q_max_h_)
            throw std::invalid_argument("delta_h: j exceeds q_max of the bank");
        SpectralField out(grid_);
        if (j < -1) return out;
        for (int i1 = 0; i1 < grid_.Nh; ++i1)
            for (int i2 = 0; i2 < grid_.Nh; ++i2) {
                const real m = mult_h(j, i1, i2);
                if (m == 0.0) continue;
                for (int i3 = 0; i3 < grid_.Nv; ++i3)
                    out.at(i1, i2, i3) = f.at(i1, i2, i3) * m;
            }
        return out;
    }

    /// Vertical low-pass S_q = sum_{m <= q-1} Delta_m (zero for q <= -1).
    SpectralField s_v(int q, const SpectralField& f) const {
        check_grid(f);
        SpectralField out(grid_);
        if (q < 0) return out;
        for (int i3 = 0; i3 < grid_.Nv; ++i3) {
            const real m = lowpass_profile(q, grid_.kappa_v(i3));
            if (m == 0.0) continue;
            for (int i1 = 0; i1 < grid_.Nh; ++i1)
                for (int i2 = 0; i2 < grid_.Nh; ++i2)
                    out.at(i1, i2, i3) = f.at(i1, i2, i3) * m;
        }
        return out;
    }

    // -- Paraproducts --------------------------------------------------------

    struct BonyParts {
        SpectralField T_ab; ///< sum_q S_{q-1}(a) Delta_q(b): low a, high b
        SpectralField T_ba; ///< sum_q S_{q-1}(b) Delta_q(a): low b, high a
        SpectralField R_ab; ///< comparable-frequency remainder, width-1 set
    };

    /// Vertical paraproduct splitting of the (dealiased) product:
    /// T_ab + T_ba + R_ab equals the dealiased pointwise product exactly on
    /// the grid, because the partition identity telescopes exactly.
    BonyParts bony_decompose_v(const SpectralField& a, const SpectralField& b) const {
        check_grid(a);
        a.check_same_grid(b);
        const SpectralField ad = dealias_23(a), bd = dealias_23(b);

        // Physical-space block and low-pass stacks.
        const int Q = q_max_v_;
        std::vector<std::vector<real>> da(Q + 2), db(Q + 2); // Delta_{-1..Q}
        for (int q = -1; q <= Q; ++q) {
            da[q + 1] = detail::inverse_unchecked(delta_v(q, ad));
            db[q + 1] = detail::inverse_unchecked(delta_v(q, bd));
        }
        // s[q+1] = physical S_q = sum_{m <= q-1} Delta_m; S_{-1} = S_0 = 0 + psi...
        // Build cumulative sums: S_q = S_{q-1} + Delta_{q-1}.
        const std::size_t n = grid_.size();
        std::vector<std::vector<real>> sa(Q + 2, std::vector<real>(n, 0.0)),
            sb(Q + 2, std::vector<real>(n, 0.0));
        for (int q = 0; q <= Q; ++q) {
            for (std::size_t i = 0; i < n; ++i) {
                sa[q + 1][i] = sa[q][i] + da[q][i];
                sb[q + 1][i] = sb[q][i] + db[q][i];
            }
        }

        std::vector<real> t_ab(n, 0.0), t_ba(n, 0.0), r_ab(n, 0.0);
        for (int q = -1; q <= Q; ++q) {
            // Paraproducts: S_{q-1} pairs with Delta_q.  S_{q-1} = sa[q].
            if (q >= 1) {
                for (std::size_t i = 0; i < n; ++i) {
                    t_ab[i] += sa[q][i] * db[q + 1][i];
                    t_ba[i] += sb[q][i] * da[q + 1][i];
                }
            }
            // Remainder: interactions |q - q'| <= 1.
            for (int i_off = -1; i_off <= 1; ++i_off) {
                const int qp = q - i_off;
                if (qp < -1 || qp > Q) continue;
                for (std::size_t i = 0; i < n; ++i) r_ab[i] += da[q + 1][i] * db[qp + 1][i];
            }
        }
        BonyParts parts;
        parts.T_ab = dealias_23(forward(t_ab, grid_));
        parts.T_ba = dealias_23(forward(t_ba, grid_));
        parts.R_ab = dealias_23(forward(r_ab, grid_));
        return parts;
    }

    // -- Block coefficient families ------------------------------------------

    /// c_q = 2^{qs} ||Delta_q^v f|| / total (mode block) or the S_q analogue
    /// (mode lowpass, requires s < 0 for a summable family).  total is the
    /// l^2 norm of the weighted family, so sum c_q^2 = 1 for nonzero fields.
    BlockCoeffs block_coeffs(const SpectralField& f, real s, CoeffMode mode) const {
        check_grid(f);
        if (mode == CoeffMode::lowpass && !(s < 0.0))
            throw std::invalid_argument("block_coeffs: lowpass mode requires s < 0");
        BlockCoeffs bc;
        bc.s = s;
        std::map<int, real> weighted;
        for (int q = -1; q <= q_max_v_; ++q) {
            const SpectralField part = mode == CoeffMode::block ? delta_v(q, f) : s_v(q, f);
            weighted[q] = std::pow(2.0, q * s) * part.l2_norm();
        }
        real tot = 0.0;
        for (const auto& [q, w] : weighted) tot += w * w;
        bc.total = std::sqrt(tot);
        for (const auto& [q, w] : weighted)
            bc.values[q] = bc.total > 0.0 ? w / bc.total : 0.0;
        return bc;
    }

  private:
    static int q_max_for(real kappa_mod_max) {
        // floor(log2(max modulus * 4/3)): the top annulus starts under the
        // largest resolvable modulus and 2^-(q_max+1) * max <= 3/4, so the
        // telescoped partition equals 1 at every grid frequency.
        return static_cast<int>(std::floor(std::log2(kappa_mod_max * 4.0 / 3.0)));
    }

    void check_grid(const SpectralField& f) const {
        if (f.grid() != grid_)
            throw std::invalid_argument("DyadicFilterBank: field grid does not match bank grid");
    }

    void build_tables() {
        const int Nh = grid_.Nh, Nv = grid_.Nv;
        psi_v_.resize(Nv);
        phi_v_.assign(static_cast<std::size_t>(q_max_v_ + 1) * Nv, 0.0);
        inv_sqrt_m_v_.resize(Nv);
        m_min_ = 1.0;
        m_max_ = 0.0;
        for (int i3 = 0; i3 < Nv; ++i3) {
            const real xi = std::abs(grid_.kappa_v(i3));
            psi_v_[i3] = profile::psi(xi);
            real m = sq(psi_v_[i3]);
            for (int q = 0; q <= q_max_v_; ++q) {
                const real p = profile::phi(std::ldexp(xi, -q));
                phi_v_[static_cast<std::size_t>(q) * Nv + i3] = p;
                m += sq(p);
            }
            inv_sqrt_m_v_[i3] = 1.0 / std::sqrt(m);
            m_min_ = std::min(m_min_, m);
            m_max_ = std::max(m_max_, m);
        }
        psi_h_.resize(static_cast<std::size_t>(Nh) * Nh);
        phi_h_.assign(static_cast<std::size_t>(q_max_h_ + 1) * Nh * Nh, 0.0);
        inv_sqrt_m_h_.resize(static_cast<std::size_t>(Nh) * Nh);
        for (int i1 = 0; i1 < Nh; ++i1)
            for (int i2 = 0; i2 < Nh; ++i2) {
                const std::size_t hidx = static_cast<std::size_t>(i1) * Nh + i2;
                const real xi = grid_.kappa_h_mod(i1, i2);
                psi_h_[hidx] = profile::psi(xi);
                real m = sq(psi_h_[hidx]);
                for (int j = 0; j <= q_max_h_; ++j) {
                    const real p = profile::phi(std::ldexp(xi, -j));
                    phi_h_[static_cast<std::size_t>(j) * Nh * Nh + hidx] = p;
                    m += sq(p);
                }
                inv_sqrt_m_h_[hidx] = 1.0 / std::sqrt(m);
                m_min_ = std::min(m_min_, m);
                m_max_ = std::max(m_max_, m);
            }
    }

    AnisoGrid grid_;
    int q_max_v_ = 0, q_max_h_ = 0;
    real m_min_ = 1.0, m_max_ = 1.0;
    std::vector<real> psi_v_, phi_v_, inv_sqrt_m_v_;
    std::vector<real> psi_h_, phi_h_, inv_sqrt_m_h_;
};

} // namespace nsbh
