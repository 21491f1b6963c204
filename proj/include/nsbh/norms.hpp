/// @file norms.hpp
/// @brief Anisotropic Sobolev / Besov / mixed-Lebesgue norms and the
///        weighted duality pairings, all driven by one filter bank.
///
/// Conventions (fixed here, relied on everywhere):
///
///  * H^{t,s} with t = 0 is the *vertical-only* weighted block sum
///        ||f||_{H^{0,s}}^2 = sum_j 2^{2js} ||DeltaT_j^v f||_{L^2}^2
///    computed with the bank's tight family DeltaT (squares sum to 1), so
///    H^{0,0} is exactly L^2.  With t != 0 both directions are decomposed:
///        ||f||_{H^{t,s}}^2 = sum_{k,j} 2^{2kt} 2^{2js} ||DeltaT_k^h DeltaT_j^v f||^2.
///
///  * The pairing <f,g>_{alpha,beta} uses the same split: vertical-only
///    tight blocks when alpha = 0, double decomposition otherwise.  Hence
///    <f,f>_{alpha,beta} = ||f||_{H^{alpha,beta}}^2 identically, and
///    <f,g>_{0,0} is exactly the L^2 inner product — which is what keeps
///    divergence-free advection skew-symmetric *inside* the weighted
///    pairings, not just in plain L^2.
///
///  * Besov norms use the partition family (the operators the reconstruction
///    identity holds for) with L^p block norms evaluated in physical space
///    for p != 2; the outer sequence norm is l^{q1}_k of l^{q2}_j.
///
/// Everything here is a pure function of (field, spec, bank); all block
/// sums are single sweeps over the coefficient cube using the bank's
/// multiplier tables (each frequency meets at most 2 blocks per direction).

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsbh/field.hpp"
#include "nsbh/filterbank.hpp"

namespace nsbh {

enum class NormKind { sobolev_ts, besov_tspq, besov_mixed, mixed_lebesgue };

struct NormSpec {
    NormKind kind = NormKind::sobolev_ts;
    real t = 0.0; ///< horizontal regularity index
    real s = 0.0; ///< vertical regularity index
    real p = 2.0; ///< Lebesgue exponent of the block norms
    real q1 = 2.0; ///< outer (horizontal) sequence exponent
    real q2 = 2.0; ///< inner (vertical) sequence exponent
    MixedNormSpec lebesgue; ///< used only for kind == mixed_lebesgue

    void validate() const {
        auto seq_ok = [](real q) { return q == 1.0 || q == 2.0 || std::isinf(q); };
        switch (kind) {
            case NormKind::sobolev_ts:
                return;
            case NormKind::besov_tspq:
            case NormKind::besov_mixed:
                if (!seq_ok(p) && p != 2.0)
                    throw std::invalid_argument("NormSpec: Besov p must be in {1,2,inf}");
                if (!seq_ok(q1) || !seq_ok(q2))
                    throw std::invalid_argument("NormSpec: sequence exponents must be in {1,2,inf}");
                return;
            case NormKind::mixed_lebesgue:
                lebesgue.validate();
                return;
        }
    }
};

struct PairingSpec {
    real alpha = 0.0; ///< horizontal index
    real beta = 0.0;  ///< vertical index
};

// ===========================================================================
// Spec string grammar
// ===========================================================================
//
//   H:<t>:<s>                  anisotropic Sobolev, e.g. "H:0:0.75"
//   B:<p>,<q>:<t>:<s>          Besov with one sequence exponent, "B:2,1:0:-0.5"
//   BM:<p>:<q1>,<q2>:<t>:<s>   mixed Besov (outer q1 horizontal, inner q2)
//   L:<e><axis>,<e><axis>      iterated Lebesgue, first token is the OUTER
//                              norm, e.g. "L:4h,infv" = L^4_h(L^inf_v)
//
// Exponent tokens: 1, 2, 4, inf.

namespace detail {

inline real parse_exponent(const std::string& tok) {
    if (tok == "inf") return inf;
    if (tok == "1") return 1.0;
    if (tok == "2") return 2.0;
    if (tok == "4") return 4.0;
    throw std::invalid_argument("NormSpec: bad exponent token '" + tok + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else
            cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

inline real parse_real(const std::string& tok) {
    std::size_t pos = 0;
    const real v = std::stod(tok, &pos);
    if (pos != tok.size())
        throw std::invalid_argument("NormSpec: bad numeric token '" + tok + "'");
    return v;
}

} // namespace detail

inline NormSpec parse_norm_spec(const std::string& text) {
    const auto parts = detail::split(text, ':');
    NormSpec ns;
    try {
        if (parts.size() == 3 && parts[0] == "H") {
            ns.kind = NormKind::sobolev_ts;
            ns.t = detail::parse_real(parts[1]);
            ns.s = detail::parse_real(parts[2]);
        } else if (parts.size() == 4 && parts[0] == "B") {
            const auto pq = detail::split(parts[1], ',');
            if (pq.size() != 2) throw std::invalid_argument("expected p,q");
            ns.kind = NormKind::besov_tspq;
            ns.p = detail::parse_exponent(pq[0]);
            ns.q1 = ns.q2 = detail::parse_exponent(pq[1]);
            ns.t = detail::parse_real(parts[2]);
            ns.s = detail::parse_real(parts[3]);
        } else if (parts.size() == 5 && parts[0] == "BM") {
            ns.kind = NormKind::besov_mixed;
            ns.p = detail::parse_exponent(parts[1]);
            const auto qq = detail::split(parts[2], ',');
            if (qq.size() != 2) throw std::invalid_argument("expected q1,q2");
            ns.q1 = detail::parse_exponent(qq[0]);
            ns.q2 = detail::parse_exponent(qq[1]);
            ns.t = detail::parse_real(parts[3]);
            ns.s = detail::parse_real(parts[4]);
        } else if (parts.size() == 2 && parts[0] == "L") {
            const auto ab = detail::split(parts[1], ',');
            if (ab.size() != 2) throw std::invalid_argument("expected two axis tokens");
            auto parse_axis = [](const std::string& tok, char& axis) {
                if (tok.size() < 2) throw std::invalid_argument("bad axis token '" + tok + "'");
                axis = tok.back();
                if (axis != 'h' && axis != 'v')
                    throw std::invalid_argument("axis must be 'h' or 'v' in '" + tok + "'");
                return detail::parse_exponent(tok.substr(0, tok.size() - 1));
            };
            char a0 = 0, a1 = 0;
            const real e0 = parse_axis(ab[0], a0);
            const real e1 = parse_axis(ab[1], a1);
            if (a0 == a1) throw std::invalid_argument("need one 'h' and one 'v' token");
            ns.kind = NormKind::mixed_lebesgue;
            if (a0 == 'h') { // outer horizontal
                ns.lebesgue = MixedNormSpec{e0, e1, NormOrder::h_outer};
            } else {
                ns.lebesgue = MixedNormSpec{e1, e0, NormOrder::v_outer};
            }
        } else {
            throw std::invalid_argument("unrecognized shape");
        }
    } catch (const std::exception& e) {
        throw std::invalid_argument("cannot parse norm spec '" + text + "': " + e.what());
    }
    ns.validate();
    return ns;
}

// ===========================================================================
// Norm engine
// ===========================================================================

class NormEngine {
  public:
    explicit NormEngine(const DyadicFilterBank& bank) : bank_(&bank) {}

    const DyadicFilterBank& bank() const { return *bank_; }

    // -- Weighted block tables (single sweep) --------------------------------

    /// table[j + 1] = ||DeltaT_j^v f||^2 (tight family), j = -1..q_max_v.
    std::vector<real> tight_block_l2sq_v(const SpectralField& f) const {
        const AnisoGrid& g = bank_->grid();
        std::vector<real> acc(static_cast<std::size_t>(bank_->q_max_v() + 2), 0.0);
        std::size_t p = 0;
        for (int i1 = 0; i1 < g.Nh; ++i1)
            for (int i2 = 0; i2 < g.Nh; ++i2)
                for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                    const real e = std::norm(f.coeffs()[p]);
                    if (e == 0.0) continue;
                    for (int j = -1; j <= bank_->q_max_v(); ++j) {
                        const real m = bank_->tight_v(j, i3);
                        if (m != 0.0) acc[j + 1] += e * sq(m);
                    }
                }
        for (auto& v : acc) v *= g.volume();
        return acc;
    }

    /// table[(k+1)*(Qv+2) + (j+1)] = ||DeltaT_k^h DeltaT_j^v f||^2.
    std::vector<real> tight_block_l2sq_hv(const SpectralField& f) const {
        const AnisoGrid& g = bank_->grid();
        const int Qh = bank_->q_max_h(), Qv = bank_->q_max_v();
        std::vector<real> acc(static_cast<std::size_t>(Qh + 2) * (Qv + 2), 0.0);
        std::size_t p = 0;
        for (int i1 = 0; i1 < g.Nh; ++i1)
            for (int i2 = 0; i2 < g.Nh; ++i2) {
                // collect the (at most 2) active horizontal blocks up front
                std::array<std::pair<int, real>, 8> hb{};
                int nh = 0;
                for (int k = -1; k <= Qh; ++k) {
                    const real m = bank_->tight_h(k, i1, i2);
                    if (m != 0.0 && nh < 8) hb[nh++] = {k, m};
                }
                for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                    const real e = std::norm(f.coeffs()[p]);
                    if (e == 0.0) continue;
                    for (int j = -1; j <= Qv; ++j) {
                        const real mv = bank_->tight_v(j, i3);
                        if (mv == 0.0) continue;
                        for (int b = 0; b < nh; ++b)
                            acc[static_cast<std::size_t>(hb[b].first + 1) * (Qv + 2) + (j + 1)] +=
                                e * sq(hb[b].second * mv);
                    }
                }
            }
        for (auto& v : acc) v *= g.volume();
        return acc;
    }

    // -- Sobolev norms --------------------------------------------------------

    /// ||f||_{H^{t,s}} under the conventions in the file header.
    real sobolev(const SpectralField& f, real t, real s) const {
        if (t == 0.0) {
            const auto tab = tight_block_l2sq_v(f);
            real acc = 0.0;
            for (int j = -1; j <= bank_->q_max_v(); ++j)
                acc += std::pow(4.0, j * s) * tab[j + 1];
            return std::sqrt(acc);
        }
        const auto tab = tight_block_l2sq_hv(f);
        const int Qv = bank_->q_max_v();
        real acc = 0.0;
        for (int k = -1; k <= bank_->q_max_h(); ++k)
            for (int j = -1; j <= Qv; ++j)
                acc += std::pow(4.0, k * t) * std::pow(4.0, j * s) *
                       tab[static_cast<std::size_t>(k + 1) * (Qv + 2) + (j + 1)];
        return std::sqrt(acc);
    }

    real sobolev(const VectorField& v, real t, real s) const {
        return std::sqrt(sq(sobolev(v.c1, t, s)) + sq(sobolev(v.c2, t, s)) +
                         sq(sobolev(v.c3, t, s)));
    }

    /// Vertical-only direct formula with the *partition* family — the
    /// cross-check companion of sobolev(f, 0, s); agrees within the bank's
    /// recorded band [sqrt(m_min), 1].
    real sobolev_partition_family(const SpectralField& f, real s) const {
        real acc = 0.0;
        for (int j = -1; j <= bank_->q_max_v(); ++j)
            acc += std::pow(4.0, j * s) * sq(bank_->delta_v(j, f).l2_norm());
        return std::sqrt(acc);
    }

    // -- Pairings -------------------------------------------------------------

    /// <f,g>_{alpha,beta}: weighted sum of tight-block inner products.
    real pairing(const SpectralField& f, const SpectralField& g, const PairingSpec& ps) const {
        f.check_same_grid(g);
        const AnisoGrid& gr = bank_->grid();
        const int Qv = bank_->q_max_v(), Qh = bank_->q_max_h();
        real acc = 0.0;
        std::size_t p = 0;
        if (ps.alpha == 0.0) {
            std::vector<real> per_j(static_cast<std::size_t>(Qv + 2), 0.0);
            for (int i1 = 0; i1 < gr.Nh; ++i1)
                for (int i2 = 0; i2 < gr.Nh; ++i2)
                    for (int i3 = 0; i3 < gr.Nv; ++i3, ++p) {
                        const real re =
                            (f.coeffs()[p] * std::conj(g.coeffs()[p])).real();
                        if (re == 0.0) continue;
                        for (int j = -1; j <= Qv; ++j) {
                            const real m = bank_->tight_v(j, i3);
                            if (m != 0.0) per_j[j + 1] += re * sq(m);
                        }
                    }
            for (int j = -1; j <= Qv; ++j) acc += std::pow(4.0, j * ps.beta) * per_j[j + 1];
            return acc * gr.volume();
        }
        std::vector<real> per_kj(static_cast<std::size_t>(Qh + 2) * (Qv + 2), 0.0);
        for (int i1 = 0; i1 < gr.Nh; ++i1)
            for (int i2 = 0; i2 < gr.Nh; ++i2) {
                std::array<std::pair<int, real>, 8> hb{};
                int nh = 0;
                for (int k = -1; k <= Qh; ++k) {
                    const real m = bank_->tight_h(k, i1, i2);
                    if (m != 0.0 && nh < 8) hb[nh++] = {k, m};
                }
                for (int i3 = 0; i3 < gr.Nv; ++i3, ++p) {
                    const real re = (f.coeffs()[p] * std::conj(g.coeffs()[p])).real();
                    if (re == 0.0) continue;
                    for (int j = -1; j <= Qv; ++j) {
                        const real mv = bank_->tight_v(j, i3);
                        if (mv == 0.0) continue;
                        for (int b = 0; b < nh; ++b)
                            per_kj[static_cast<std::size_t>(hb[b].first + 1) * (Qv + 2) +
                                   (j + 1)] += re * sq(hb[b].second * mv);
                    }
                }
            }
        for (int k = -1; k <= Qh; ++k)
            for (int j = -1; j <= Qv; ++j)
                acc += std::pow(4.0, k * ps.alpha) * std::pow(4.0, j * ps.beta) *
                       per_kj[static_cast<std::size_t>(k + 1) * (Qv + 2) + (j + 1)];
        return acc * gr.volume();
    }

    /// Componentwise sum of pairings for vector fields.
    real pairing(const VectorField& f, const VectorField& g, const PairingSpec& ps) const {
        return pairing(f.c1, g.c1, ps) + pairing(f.c2, g.c2, ps) + pairing(f.c3, g.c3, ps);
    }

    // -- Besov norms ----------------------------------------------------------

    /// ||2^{kt} 2^{js} ||Delta_k^h Delta_j^v f||_{L^p}||_{l^{q1}_k(l^{q2}_j)}.
    /// Partition-family blocks; p != 2 norms are physical-space quadrature.
    real besov(const SpectralField& f, real t, real s, real p, real q1, real q2) const {
        const int Qh = bank_->q_max_h(), Qv = bank_->q_max_v();
        auto seq_norm = [](const std::vector<real>& v, real q) {
            if (std::isinf(q)) {
                real m = 0.0;
                for (real x : v) m = std::max(m, x);
                return m;
            }
            real scc = 0.0;
            if (q == 1.0)
                for (real x : v) scc += x;
            else
                for (real x : v) scc += x * x;
            return q == 1.0 ? scc : std::sqrt(scc);
        };
        std::vector<real> outer;
        outer.reserve(Qh + 2);
        for (int k = -1; k <= Qh; ++k) {
            const SpectralField fk = bank_->delta_h(k, f);
            std::vector<real> inner;
            inner.reserve(Qv + 2);
            for (int j = -1; j <= Qv; ++j) {
                const SpectralField fkj = bank_->delta_v(j, fk);
                const real block = (p == 2.0) ? fkj.l2_norm() : box_lp(fkj, p);
                inner.push_back(std::pow(2.0, k * t) * std::pow(2.0, j * s) * block);
            }
            outer.push_back(seq_norm(inner, q2));
        }
        return seq_norm(outer, q1);
    }

    /// Whole-box L^p norm by quadrature, p in {1, 2, 4, inf}.
    static real box_lp(const SpectralField& f, real p) {
        const auto phys = detail::inverse_unchecked(f);
        const real w = f.grid().quad_weight();
        return detail::lp_reduce(phys, w, std::isinf(p) ? inf : p);
    }

    /// Dispatch on a NormSpec.
    real norm(const SpectralField& f, const NormSpec& ns) const {
        ns.validate();
        switch (ns.kind) {
            case NormKind::sobolev_ts:
                return sobolev(f, ns.t, ns.s);
            case NormKind::besov_tspq:
            case NormKind::besov_mixed:
                return besov(f, ns.t, ns.s, ns.p, ns.q1, ns.q2);
            case NormKind::mixed_lebesgue:
                return mixed_norm(f, ns.lebesgue);
        }
        return 0.0;
    }

    // -- Interpolation report ---------------------------------------------------

    struct InterpReport {
        real norm = 0.0;   ///< ||f||_{H^{1/2,s}}
        real ratio = 0.0;  ///< norm / (||f||_{0,s}^{1/2} ||grad_h f||_{0,s}^{1/2})
    };

    /// The H^{1/2,s} norm together with the interpolation ratio against
    /// ||f||_{0,s}^{1/2} ||grad_h f||_{0,s}^{1/2}; purely vertical fields get
    /// an infinity sentinel (excluded from fits by the caller).
    InterpReport interp_half_norm(const SpectralField& f, real s) const {
        InterpReport r;
        r.norm = sobolev(f, 0.5, s);
        const real lo = sobolev(f, 0.0, s);
        const real gh = std::sqrt(sq(sobolev(derivative(f, 1), 0.0, s)) +
                                  sq(sobolev(derivative(f, 2), 0.0, s)));
        const real denom = std::sqrt(lo) * std::sqrt(gh);
        r.ratio = denom > 0.0 ? r.norm / denom : (r.norm > 0.0 ? inf : 0.0);
        return r;
    }

    // -- Norms used by the energy ledgers --------------------------------------

    /// Full isotropic H^1 norm (spectral weight 1 + |kappa|^2).
    static real h1_norm(const SpectralField& f) {
        const AnisoGrid& g = f.grid();
        real s = 0.0;
        std::size_t p = 0;
        for (int i1 = 0; i1 < g.Nh; ++i1) {
            const real k1 = g.kappa_h(i1);
            for (int i2 = 0; i2 < g.Nh; ++i2) {
                const real k12 = sq(k1) + sq(g.kappa_h(i2));
                for (int i3 = 0; i3 < g.Nv; ++i3, ++p)
                    s += (1.0 + k12 + sq(g.kappa_v(i3))) * std::norm(f.coeffs()[p]);
            }
        }
        return std::sqrt(s * g.volume());
    }

    static real h1_norm(const VectorField& v) {
        return std::sqrt(sq(h1_norm(v.c1)) + sq(h1_norm(v.c2)) + sq(h1_norm(v.c3)));
    }

    /// ||grad_h f||_{H^{0,s}} for a scalar (l^2 over the two derivatives).
    real grad_h_sobolev(const SpectralField& f, real s) const {
        return std::sqrt(sq(sobolev(derivative(f, 1), 0.0, s)) +
                         sq(sobolev(derivative(f, 2), 0.0, s)));
    }

    /// Same for vectors: l^2 over all six first horizontal derivatives.
    real grad_h_sobolev(const VectorField& v, real s) const {
        return std::sqrt(sq(grad_h_sobolev(v.c1, s)) + sq(grad_h_sobolev(v.c2, s)) +
                         sq(grad_h_sobolev(v.c3, s)));
    }

  private:
    const DyadicFilterBank* bank_;
};

} // namespace nsbh
