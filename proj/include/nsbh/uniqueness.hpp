/// @file uniqueness.hpp
/// @brief Two-trajectory difference experiments.  Two solutions (u, rho) and
///        (v, eta) are stepped in lockstep (shared dt, shared instants) so the
///        differences w = u - v, theta = rho - eta are exact spectral
///        differences with no time-interpolation noise.  Along the run we
///        record the weighted difference energies, the nine advective block
///        sums L1..L9, and the two rate functions:
///
///          f  (supercritical regime s > 1/2):
///              ||u||^4_{1/2,s} + ||u||^2_{0,s} + ||grad_h v||^2_{0,s}
///            + ||v||^{4/3}_{1/2,s} + ||grad_h eta||^2_{0,s} + ||eta||^4_{1/2,s} + 1
///
///          f1 (critical regime s = 1/2):
///              (1 + ||u||^2_{1,1/2} + ||v||^2_{1,1/2} + ||w||^2_{1,1/2})
///            * (1 + ||grad_h u||^2_{1,1/2} + ||grad_h v||^2_{1,1/2} + ||grad_h w||^2_{1,1/2})
///
///        Post-processing audits certify the closures:
///        - gronwall_audit: fits (or freezes) the constant C so that both
///          (a) sum_i |L_i| <= 1/2 (||grad_h w||^2_{0,s-1} + ||grad_h theta||^2_{0,-s})
///                           + C f (||w||^2_{0,s-1} + ||theta||^2_{0,-s})
///          holds at every recorded instant, and (b) the exponential envelope
///          y(0) exp(C int f) dominates the measured difference energy.
///        - osgood_audit: the double-logarithmic comparison for
///          chi = ||w||^2_{0,-1/2} + ||theta||^2_{0,-1/2} on the window
///          chi <= e^{-2}, via the Osgood machinery.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsbh/inequalities.hpp"
#include "nsbh/norms.hpp"
#include "nsbh/osgood.hpp"
#include "nsbh/random_fields.hpp"
#include "nsbh/solver.hpp"

namespace nsbh {

// ===========================================================================
// Pair construction
// ===========================================================================

struct PerturbationSpec {
    enum class Kind { none, single_mode, white_band, rho_only };
    Kind kind = Kind::none;
    real epsilon = 0.0;
    int k1 = 1, k2 = 0, k3 = 1; ///< single_mode wavevector
    int band_q = 0;             ///< white_band: vertical dyadic band index
    std::uint64_t seed = 7;

    std::string describe() const {
        switch (kind) {
        case Kind::none: return "none (epsilon=0)";
        case Kind::single_mode:
            return "single-mode k=(" + std::to_string(k1) + "," + std::to_string(k2) + "," +
                   std::to_string(k3) + ") epsilon=" + std::to_string(epsilon);
        case Kind::white_band:
            return "white-band q=" + std::to_string(band_q) +
                   " epsilon=" + std::to_string(epsilon);
        case Kind::rho_only: return "rho-only epsilon=" + std::to_string(epsilon);
        }
        return "?";
    }
};

struct PairRun {
    SolverConfig cfg;
    State init_a;
    State init_b;
    std::string perturbation; ///< human-readable description
};

namespace detail {

/// Unit-L2 divergence-free real field concentrated on the +/-k conjugate pair.
inline VectorField unit_mode_field(const AnisoGrid& g, int k1, int k2, int k3) {
    VectorField m(g);
    // any direction not parallel to k, then Leray-project
    real d1 = 1.0, d2 = 0.0, d3 = 0.0;
    if (k2 == 0 && k3 == 0) { d1 = 0.0; d2 = 1.0; }
    const int i1 = (k1 % g.Nh + g.Nh) % g.Nh;
    const int i2 = (k2 % g.Nh + g.Nh) % g.Nh;
    const int i3 = (k3 % g.Nv + g.Nv) % g.Nv;
    const int j1 = ((-k1) % g.Nh + g.Nh) % g.Nh;
    const int j2 = ((-k2) % g.Nh + g.Nh) % g.Nh;
    const int j3 = ((-k3) % g.Nv + g.Nv) % g.Nv;
    m.c1.at(i1, i2, i3) = 0.5 * d1;
    m.c2.at(i1, i2, i3) = 0.5 * d2;
    m.c3.at(i1, i2, i3) = 0.5 * d3;
    m.c1.at(j1, j2, j3) += 0.5 * d1;
    m.c2.at(j1, j2, j3) += 0.5 * d2;
    m.c3.at(j1, j2, j3) += 0.5 * d3;
    VectorField out = leray_project(m);
    const real n = out.l2_norm();
    if (!(n > 0.0))
        throw std::invalid_argument("unit_mode_field: mode parallel to its own direction");
    out.c1 *= 1.0 / n;
    out.c2 *= 1.0 / n;
    out.c3 *= 1.0 / n;
    out.divergence_free = true;
    return out;
}

inline SpectralField unit_mode_scalar(const AnisoGrid& g, int k1, int k2, int k3) {
    SpectralField f(g);
    const int i1 = (k1 % g.Nh + g.Nh) % g.Nh;
    const int i2 = (k2 % g.Nh + g.Nh) % g.Nh;
    const int i3 = (k3 % g.Nv + g.Nv) % g.Nv;
    const int j1 = ((-k1) % g.Nh + g.Nh) % g.Nh;
    const int j2 = ((-k2) % g.Nh + g.Nh) % g.Nh;
    const int j3 = ((-k3) % g.Nv + g.Nv) % g.Nv;
    f.at(i1, i2, i3) = 0.5;
    f.at(j1, j2, j3) += 0.5;
    const real n = f.l2_norm();
    f *= 1.0 / n;
    return f;
}

inline SpectralField unit_scalar(SpectralField f) {
    const real n = f.l2_norm();
    if (n > 0.0) f *= 1.0 / n;
    return f;
}

inline VectorField unit_vector(VectorField v) {
    const real n = v.l2_norm();
    if (n > 0.0) {
        v.c1 *= 1.0 / n;
        v.c2 *= 1.0 / n;
        v.c3 *= 1.0 / n;
    }
    return v;
}

} // namespace detail

/// init_b = init_a + epsilon * (unit-normalized perturbation).
inline PairRun make_pair_run(const SolverConfig& cfg, const State& base,
                             const PerturbationSpec& pert) {
    cfg.validate();
    const AnisoGrid& g = cfg.grid;
    if (base.u.grid() != g || base.rho.grid() != g)
        throw std::invalid_argument("make_pair_run: base state grid differs from config grid");

    PairRun pr{cfg, base, base, pert.describe()};
    switch (pert.kind) {
    case PerturbationSpec::Kind::none: break;
    case PerturbationSpec::Kind::single_mode: {
        VectorField du = detail::unit_mode_field(g, pert.k1, pert.k2, pert.k3);
        pr.init_b.u.c1 += pert.epsilon * du.c1;
        pr.init_b.u.c2 += pert.epsilon * du.c2;
        pr.init_b.u.c3 += pert.epsilon * du.c3;
        break;
    }
    case PerturbationSpec::Kind::white_band: {
        const EnsembleSpec spec = EnsembleSpec::block(pert.band_q, 1, pert.seed);
        VectorField du = detail::unit_vector(random_vector(g, spec, 0, true));
        SpectralField dr = detail::unit_scalar(random_scalar(g, spec, 0, 3));
        pr.init_b.u.c1 += pert.epsilon * du.c1;
        pr.init_b.u.c2 += pert.epsilon * du.c2;
        pr.init_b.u.c3 += pert.epsilon * du.c3;
        pr.init_b.rho += pert.epsilon * dr;
        break;
    }
    case PerturbationSpec::Kind::rho_only: {
        SpectralField dr = detail::unit_mode_scalar(g, pert.k1, pert.k2, pert.k3);
        pr.init_b.rho += pert.epsilon * dr;
        break;
    }
    }
    return pr;
}

// ===========================================================================
// Difference series
// ===========================================================================

struct DifferenceRow {
    real t = 0.0;
    real w2 = 0.0;   ///< ||w||^2_{0,s-1}
    real th2 = 0.0;  ///< ||theta||^2_{0,-s}
    real gw2 = 0.0;  ///< ||grad_h w||^2_{0,s-1}
    real gth2 = 0.0; ///< ||grad_h theta||^2_{0,-s}
    real chi = 0.0;  ///< ||w||^2_{0,-1/2} + ||theta||^2_{0,-1/2}
    real f = 0.0;    ///< supercritical rate sample (C = 1)
    real f1 = 0.0;   ///< critical rate sample (C = 1)
    std::array<real, 9> L{}; ///< signed block sums (s > 1/2 runs; else zeros)
};

struct DifferenceSeries {
    std::vector<DifferenceRow> rows;
    real s = 0.75;
    real dt = 0.0;
    bool truncated = false;
    std::string flag;
    std::vector<State> snaps_a, snaps_b; ///< trajectories at record instants
};

namespace detail {

inline real grad_h_sobolev_ts(const NormEngine& eng, const SpectralField& f, real t, real s) {
    return std::sqrt(sq(eng.sobolev(derivative(f, 1), t, s)) +
                     sq(eng.sobolev(derivative(f, 2), t, s)));
}

inline real grad_h_sobolev_ts(const NormEngine& eng, const VectorField& v, real t, real s) {
    return std::sqrt(sq(grad_h_sobolev_ts(eng, v.c1, t, s)) +
                     sq(grad_h_sobolev_ts(eng, v.c2, t, s)) +
                     sq(grad_h_sobolev_ts(eng, v.c3, t, s)));
}

} // namespace detail

/// Step both trajectories in lockstep and record the difference functionals.
/// cfg.dt = 0 picks one shared advective step from init_a and keeps it fixed.
/// If one trajectory aborts, the series is truncated at the last instant both
/// reached, and flagged.
inline DifferenceSeries run_pair(const PairRun& pr) {
    const SolverConfig& cfg = pr.cfg;
    cfg.validate();
    const AnisoGrid& g = cfg.grid;
    if (pr.init_a.u.grid() != g || pr.init_b.u.grid() != g || pr.init_a.rho.grid() != g ||
        pr.init_b.rho.grid() != g)
        throw std::invalid_argument("run_pair: states and config on different grids");

    DyadicFilterBank bank(g);
    NormEngine eng(bank);

    auto prepare = [&](const State& init) {
        State st{0.0, cutoff_En(init.u, cfg.n_cutoff), cutoff_En(init.rho, cfg.n_cutoff)};
        if (cfg.dealias) {
            st.u.c1 = dealias_23(st.u.c1);
            st.u.c2 = dealias_23(st.u.c2);
            st.u.c3 = dealias_23(st.u.c3);
            st.rho = dealias_23(st.rho);
        }
        st.u = leray_project(st.u);
        return st;
    };
    State a = prepare(pr.init_a);
    State b = prepare(pr.init_b);

    if (cfg.certified) {
        for (const State* st : {&a, &b}) {
            const real lhs = admission_lhs(eng, *st, cfg.s_index, cfg.t_end);
            if (!(lhs < sq(cfg.c0)))
                throw std::domain_error("run_pair: certified-mode admission violated (lhs=" +
                                        std::to_string(lhs) + ", threshold=" +
                                        std::to_string(sq(cfg.c0)) + ")");
        }
    }

    real dt = cfg.dt;
    if (!(dt > 0.0)) {
        const real umax = std::max({a.u.c1.linf_coeff(), a.u.c2.linf_coeff(),
                                    a.u.c3.linf_coeff(), 1e-6});
        dt = std::min(cfg.t_end / 16.0, 0.5 / (g.kappa_h_max() * umax));
    }

    DifferenceSeries ds;
    ds.s = cfg.s_index;
    ds.dt = dt;
    const bool supercritical = cfg.s_index > 0.5;

    auto record = [&](const State& sa, const State& sb) {
        const real s = cfg.s_index;
        VectorField w = sa.u - sb.u;
        SpectralField theta = sa.rho - sb.rho;
        DifferenceRow row;
        row.t = sa.t;
        row.w2 = sq(eng.sobolev(w, 0.0, s - 1.0));
        row.th2 = sq(eng.sobolev(theta, 0.0, -s));
        row.gw2 = sq(eng.grad_h_sobolev(w, s - 1.0));
        row.gth2 = sq(eng.grad_h_sobolev(theta, -s));
        row.chi = sq(eng.sobolev(w, 0.0, -0.5)) + sq(eng.sobolev(theta, 0.0, -0.5));
        row.f = std::pow(eng.sobolev(sa.u, 0.5, s), 4.0) + sq(eng.sobolev(sa.u, 0.0, s)) +
                sq(eng.grad_h_sobolev(sb.u, s)) + std::pow(eng.sobolev(sb.u, 0.5, s), 4.0 / 3.0) +
                sq(eng.grad_h_sobolev(sb.rho, s)) + std::pow(eng.sobolev(sb.rho, 0.5, s), 4.0) +
                1.0;
        row.f1 = (1.0 + sq(eng.sobolev(sa.u, 1.0, 0.5)) + sq(eng.sobolev(sb.u, 1.0, 0.5)) +
                  sq(eng.sobolev(w, 1.0, 0.5))) *
                 (1.0 + sq(detail::grad_h_sobolev_ts(eng, sa.u, 1.0, 0.5)) +
                  sq(detail::grad_h_sobolev_ts(eng, sb.u, 1.0, 0.5)) +
                  sq(detail::grad_h_sobolev_ts(eng, w, 1.0, 0.5)));
        if (supercritical) {
            const auto terms = difference_terms(eng, sa.u, sb.u, w, sb.rho, theta, s);
            for (int i = 0; i < 9; ++i) row.L[static_cast<std::size_t>(i)] = terms[i].value;
        }
        ds.rows.push_back(row);
        ds.snaps_a.push_back(sa);
        ds.snaps_b.push_back(sb);
    };

    record(a, b);
    int step_count = 0;
    while (a.t < cfg.t_end - 1e-12 * cfg.t_end) {
        const real h = std::min(dt, cfg.t_end - a.t);
        State na, nb;
        try {
            na = step_by(a, cfg, h);
            nb = step_by(b, cfg, h);
        } catch (const std::runtime_error& e) {
            ds.truncated = true;
            ds.flag = std::string("trajectory aborted: ") + e.what();
            break;
        }
        a = std::move(na);
        b = std::move(nb);
        ++step_count;
        if (step_count % cfg.record_every == 0 || a.t >= cfg.t_end - 1e-12 * cfg.t_end)
            record(a, b);
    }
    return ds;
}

// ===========================================================================
// Audits
// ===========================================================================

struct GronwallAudit {
    bool certified = false;
    real c_fit = 0.0;  ///< constant used (fitted or frozen)
    bool fitted = false;
    std::vector<real> margin_curve;  ///< min(envelope, pointwise) margin per row
    std::vector<real> envelope;      ///< y(0) exp(c_fit int f)
    real min_margin = 0.0;
    bool zero_data = false;
};

namespace detail {

inline GronwallAudit gronwall_audit_impl(const DifferenceSeries& ds, real s, real c_frozen,
                                         bool fit) {
    if (!(s > 0.5) || !(s <= 1.0))
        throw std::invalid_argument("gronwall_audit: s must be in (1/2, 1]");
    if (ds.rows.empty()) throw std::invalid_argument("gronwall_audit: empty series");

    const std::size_t n = ds.rows.size();
    std::vector<real> y(n), d(n), sl(n), f(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DifferenceRow& r = ds.rows[i];
        y[i] = r.w2 + r.th2;
        d[i] = r.gw2 + r.gth2;
        f[i] = r.f;
        t[i] = r.t;
        real acc = 0.0;
        for (real L : r.L) acc += std::abs(L);
        sl[i] = acc;
    }
    std::vector<real> intf(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        intf[i] = intf[i - 1] + 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);

    GronwallAudit out;
    out.fitted = fit;

    const real ymax = *std::max_element(y.begin(), y.end());
    if (ymax == 0.0) { // identical trajectories: certified with zero margin
        out.zero_data = true;
        out.certified = true;
        out.c_fit = fit ? 0.0 : c_frozen;
        out.margin_curve.assign(n, 0.0);
        out.envelope.assign(n, 0.0);
        out.min_margin = 0.0;
        return out;
    }

    real c = c_frozen;
    if (fit) {
        // smallest C certifying both the pointwise inequality and the envelope
        real c_eq = 0.0, c_env = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (f[i] * y[i] > 0.0) c_eq = std::max(c_eq, (sl[i] - 0.5 * d[i]) / (f[i] * y[i]));
            if (y[0] > 0.0 && intf[i] > 0.0 && y[i] > 0.0)
                c_env = std::max(c_env, std::log(y[i] / y[0]) / intf[i]);
        }
        c = std::max({c_eq, c_env, 1e-6}) * (1.0 + 1e-9);
    }
    out.c_fit = c;

    out.certified = y[0] > 0.0; // an envelope from y(0) = 0 cannot dominate y > 0
    out.min_margin = inf;
    out.margin_curve.resize(n);
    out.envelope.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const real env = y[0] * std::exp(c * intf[i]);
        out.envelope[i] = env;
        const real m_eq = 0.5 * d[i] + c * f[i] * y[i] - sl[i];
        const real m_env = env - y[i];
        const real scale = std::max({1.0, std::abs(env), std::abs(sl[i])});
        const real margin = std::min(m_eq, m_env);
        out.margin_curve[i] = margin;
        out.min_margin = std::min(out.min_margin, margin);
        if (margin < -1e-12 * scale) out.certified = false;
    }
    return out;
}

} // namespace detail

/// Fit the audit constant on this series, then certify with it.
inline GronwallAudit gronwall_audit(const DifferenceSeries& ds, real s) {
    return detail::gronwall_audit_impl(ds, s, 0.0, true);
}

/// Certify with a frozen constant (held-out protocol).
inline GronwallAudit gronwall_audit(const DifferenceSeries& ds, real s, real c_frozen) {
    return detail::gronwall_audit_impl(ds, s, c_frozen, false);
}

struct OsgoodAuditResult {
    bool certified = false;
    real c_fit = 0.0;
    bool fitted = false;
    std::size_t window_rows = 0;
    bool window_shortened = false;
    bool zero_data = false;
    real min_margin = 0.0;
};

namespace detail {

inline OsgoodAuditResult osgood_audit_impl(const DifferenceSeries& ds, real c_frozen, bool fit) {
    if (ds.rows.empty()) throw std::invalid_argument("osgood_audit: empty series");
    const real cap = std::exp(-2.0);

    // admissible window: longest prefix with chi <= e^{-2}
    std::size_t n = 0;
    while (n < ds.rows.size() && ds.rows[n].chi <= cap) ++n;
    OsgoodAuditResult out;
    out.fitted = fit;
    out.window_shortened = n < ds.rows.size();
    out.window_rows = n;
    if (n < 2) {
        if (n == 1 && ds.rows.size() == 1) {
            // single-instant series: nothing to integrate; certified trivially
            out.certified = true;
            out.zero_data = ds.rows[0].chi == 0.0;
            return out;
        }
        throw std::invalid_argument("osgood_audit: admissible window shorter than two rows");
    }

    Tabulated chi, rate;
    chi.t.reserve(n);
    chi.v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        chi.t.push_back(ds.rows[i].t);
        chi.v.push_back(ds.rows[i].chi);
    }

    const Modulus mu = modulus_double_log();
    const real chi0 = chi.v.front();

    real c = c_frozen;
    if (fit) {
        if (chi0 == 0.0) {
            c = 1.0; // the zero-data branch does not use the constant
        } else {
            std::vector<real> intf1(n, 0.0);
            for (std::size_t i = 1; i < n; ++i)
                intf1[i] = intf1[i - 1] + 0.5 * (ds.rows[i].f1 + ds.rows[i - 1].f1) *
                                              (ds.rows[i].t - ds.rows[i - 1].t);
            const real mc = osgood_M(mu, chi0, cap);
            real cmax = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                if (!(intf1[i] > 0.0) || !(chi.v[i] > 0.0)) continue;
                const real lhs = mc - osgood_M(mu, chi.v[i], cap);
                if (lhs > 0.0) cmax = std::max(cmax, lhs / intf1[i]);
            }
            c = std::max(cmax, 1e-6) * (1.0 + 1e-9);
        }
    }
    out.c_fit = c;

    rate.t = chi.t;
    rate.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) rate.v[i] = c * ds.rows[i].f1;

    OsgoodProblem prob;
    prob.c = chi0;
    prob.gamma = std::move(rate);
    prob.mu = mu;
    prob.a = cap;
    prob.t0 = chi.t.front();
    prob.T = chi.t.back();

    const OsgoodResult res = osgood_bound(prob, chi);
    out.certified = res.certified;
    out.zero_data = res.zero_data_path;
    out.min_margin = res.min_margin;
    return out;
}

} // namespace detail

inline OsgoodAuditResult osgood_audit(const DifferenceSeries& ds) {
    return detail::osgood_audit_impl(ds, 0.0, true);
}

inline OsgoodAuditResult osgood_audit(const DifferenceSeries& ds, real c_frozen) {
    return detail::osgood_audit_impl(ds, c_frozen, false);
}

// ===========================================================================
// On-trajectory difference-term trace
// ===========================================================================

struct TraceRow {
    real t = 0.0;
    std::array<real, 9> value{}, bound{}, ratio{};
};

/// Re-evaluate all nine block sums and their bounds on the stored snapshots.
inline std::vector<TraceRow> prop1_trace(const DifferenceSeries& ds, real s) {
    if (!(s > 0.5) || !(s <= 1.0))
        throw std::invalid_argument("prop1_trace: s must be in (1/2, 1]");
    if (ds.snaps_a.size() != ds.rows.size() || ds.snaps_b.size() != ds.rows.size())
        throw std::invalid_argument("prop1_trace: series lacks trajectory snapshots");
    if (ds.rows.empty()) return {};

    DyadicFilterBank bank(ds.snaps_a.front().u.grid());
    NormEngine eng(bank);
    std::vector<TraceRow> out(ds.rows.size());
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        const State& sa = ds.snaps_a[i];
        const State& sb = ds.snaps_b[i];
        VectorField w = sa.u - sb.u;
        SpectralField theta = sa.rho - sb.rho;
        const auto terms = difference_terms(eng, sa.u, sb.u, w, sb.rho, theta, s);
        out[i].t = ds.rows[i].t;
        for (int j = 0; j < 9; ++j) {
            const auto k = static_cast<std::size_t>(j);
            out[i].value[k] = terms[j].value;
            out[i].bound[k] = terms[j].bound;
            out[i].ratio[k] = terms[j].bound > 0.0
                                  ? std::abs(terms[j].value) / terms[j].bound
                                  : (std::abs(terms[j].value) > 0.0 ? inf : 0.0);
        }
    }
    return out;
}

} // namespace nsbh
