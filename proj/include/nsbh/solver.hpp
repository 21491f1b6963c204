/// @file solver.hpp
/// @brief Spectral-Galerkin integrator for the horizontally-dissipative
///        Boussinesq system projected onto a frequency ball:
///
///            d/dt u + P_n(u . grad u) - Lap_h u + grad P = rho e3
///            d/dt rho + P_n(u . grad rho) - Lap_h rho = 0
///            div u = 0,
///
///        with P_n the sharp Fourier cutoff to B(0, n).  In the cutoff space
///        this is a finite ODE system: the only stiff piece (-Lap_h) is
///        integrated exactly by its semigroup, and the remaining terms by an
///        explicit two-stage second-order rule (integrating-factor Heun):
///
///            U*  = G(U0 + dt F(U0))           G = exp(dt Lap_h) per mode
///            U1  = G(U0) + dt/2 (G F(U0) + F(U*))
///
///        With F = 0 each mode decays exactly by exp(-t |kappa_h|^2); with
///        G = Id the rule is classical Heun.  Pressure is eliminated by
///        Leray projection, so div u = 0 holds to rounding at every stage.
///
/// Also here: the energy ledger (both L^2 energy inequalities with their
/// right-hand sides), the admission threshold for certified runs, the
/// swirl-free axisymmetric data generator (built from an azimuthal vector
/// potential, so the divergence vanishes identically), and the vorticity
/// diagnostics.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsbh/field.hpp"
#include "nsbh/filterbank.hpp"
#include "nsbh/norms.hpp"

namespace nsbh {

// ===========================================================================
// Configuration and state
// ===========================================================================

struct SolverConfig {
    AnisoGrid grid{8, 8};
    real n_cutoff = 0.0;    ///< frequency-ball radius (scaled wavenumber)
    real dt = 0.0;          ///< step; 0 = advective auto-step (see below)
    real t_end = 1.0;
    real s_index = 0.75;    ///< vertical regularity index s in [1/2, 1]
    real delta_index = 0.0; ///< density index delta in [0, s]
    int record_every = 1;   ///< ledger/snapshot cadence in steps
    bool dealias = true;
    bool certified = false; ///< demand the admission threshold before stepping
    real c0 = 0.1;          ///< admission constant knob (threshold is c0^2)

    void validate() const {
        grid.validate();
        if (!(n_cutoff > 0.0)) throw std::invalid_argument("SolverConfig: n_cutoff must be positive");
        const real nyq = std::sqrt(sq(grid.kappa_h_max()) + sq(grid.kappa_v_max()));
        if (n_cutoff > nyq + 1e-12)
            throw std::invalid_argument("SolverConfig: n_cutoff exceeds the grid Nyquist radius");
        if (dt < 0.0) throw std::invalid_argument("SolverConfig: dt must be nonnegative");
        if (!(t_end > 0.0)) throw std::invalid_argument("SolverConfig: t_end must be positive");
        if (!(s_index >= 0.5) || !(s_index <= 1.0))
            throw std::invalid_argument("SolverConfig: s_index must be in [1/2, 1]");
        if (!(delta_index >= 0.0) || !(delta_index <= s_index))
            throw std::invalid_argument("SolverConfig: delta_index must be in [0, s_index]");
        if (record_every < 1) throw std::invalid_argument("SolverConfig: record_every must be >= 1");
    }
};

struct State {
    real t = 0.0;
    VectorField u;
    SpectralField rho;
};

// ===========================================================================
// Frequency-ball cutoff
// ===========================================================================

/// Sharp indicator multiplier on the closed ball |kappa| <= n; idempotent.
inline SpectralField cutoff_En(const SpectralField& f, real n) {
    if (!(n >= 0.0)) throw std::invalid_argument("cutoff_En: n must be nonnegative");
    const AnisoGrid& g = f.grid();
    SpectralField out = f;
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real k1 = g.kappa_h(i1);
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real kh2 = sq(k1) + sq(g.kappa_h(i2));
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p)
                if (kh2 + sq(g.kappa_v(i3)) > sq(n)) out.coeffs()[p] = 0.0;
        }
    }
    return out;
}

inline VectorField cutoff_En(const VectorField& v, real n) {
    return VectorField{cutoff_En(v.c1, n), cutoff_En(v.c2, n), cutoff_En(v.c3, n),
                       v.divergence_free};
}

// ===========================================================================
// Nonlinear term
// ===========================================================================

namespace detail {

inline void require_divergence_free(const VectorField& u, const char* who) {
    if (!u.divergence_free && divergence_residual(u) > 1e-10)
        throw std::invalid_argument(std::string(who) +
                                    ": advecting field is not divergence-free");
}

} // namespace detail

/// P_n-projected (and optionally dealiased) advection u . grad f of a scalar.
/// Skew-symmetry <cutoff(u.grad f), f> = 0 holds to rounding for band-limited
/// dealiased inputs and divergence-free u.
inline SpectralField nonlinear_term(const VectorField& u, const SpectralField& f,
                                    const SolverConfig& cfg) {
    detail::require_divergence_free(u, "nonlinear_term");
    auto mul = [&](const SpectralField& a, const SpectralField& b) {
        return cfg.dealias ? product_dealiased(a, b) : product_raw(a, b);
    };
    SpectralField adv = mul(u.c1, derivative(f, 1));
    adv += mul(u.c2, derivative(f, 2));
    adv += mul(u.c3, derivative(f, 3));
    return cutoff_En(adv, cfg.n_cutoff);
}

inline VectorField nonlinear_term(const VectorField& u, const VectorField& f,
                                  const SolverConfig& cfg) {
    return VectorField{nonlinear_term(u, f.c1, cfg), nonlinear_term(u, f.c2, cfg),
                       nonlinear_term(u, f.c3, cfg), false};
}

// ===========================================================================
// Time stepping
// ===========================================================================

namespace detail {

/// Right-hand side F(U) without the dissipative part:
/// F_u = Leray(rho e3 - P_n D(u.grad u)),  F_rho = -P_n D(u.grad rho).
struct Rhs {
    VectorField fu;
    SpectralField frho;
};

inline Rhs eval_rhs(const State& st, const SolverConfig& cfg) {
    Rhs r{VectorField{SpectralField(cfg.grid), SpectralField(cfg.grid),
                      SpectralField(cfg.grid), false},
          SpectralField(cfg.grid)};
    VectorField adv = nonlinear_term(st.u, st.u, cfg);
    VectorField force{SpectralField(cfg.grid), SpectralField(cfg.grid), st.rho, false};
    force.c1 -= adv.c1;
    force.c2 -= adv.c2;
    force.c3 -= adv.c3;
    r.fu = leray_project(force);
    r.frho = nonlinear_term(st.u, st.rho, cfg);
    r.frho *= -1.0;
    return r;
}

inline void apply_semigroup(State& st, real dt) {
    st.u.c1 = horizontal_laplacian_semigroup(st.u.c1, dt);
    st.u.c2 = horizontal_laplacian_semigroup(st.u.c2, dt);
    st.u.c3 = horizontal_laplacian_semigroup(st.u.c3, dt);
    st.rho = horizontal_laplacian_semigroup(st.rho, dt);
}

inline void check_finite(const State& st) {
    const AnisoGrid& g = st.u.grid();
    const std::array<const SpectralField*, 4> fields{&st.u.c1, &st.u.c2, &st.u.c3, &st.rho};
    const std::array<const char*, 4> names{"u1", "u2", "u3", "rho"};
    for (int c = 0; c < 4; ++c) {
        const auto& co = fields[c]->coeffs();
        for (std::size_t p = 0; p < co.size(); ++p) {
            if (std::isfinite(co[p].real()) && std::isfinite(co[p].imag())) continue;
            const int i3 = static_cast<int>(p) % g.Nv;
            const int i2 = (static_cast<int>(p) / g.Nv) % g.Nh;
            const int i1 = static_cast<int>(p) / (g.Nv * g.Nh);
            throw std::runtime_error(
                "solver aborted: non-finite coefficient in " + std::string(names[c]) +
                " at t=" + std::to_string(st.t) + ", mode (" +
                std::to_string(AnisoGrid::freq(i1, g.Nh)) + "," +
                std::to_string(AnisoGrid::freq(i2, g.Nh)) + "," +
                std::to_string(AnisoGrid::freq(i3, g.Nv)) + ")");
        }
    }
}

} // namespace detail

/// One integrating-factor Heun step of size dt (cfg.dt ignored here).
inline State step_by(const State& st, const SolverConfig& cfg, real dt) {
    const detail::Rhs f0 = detail::eval_rhs(st, cfg);

    // predictor: U* = G(U0 + dt F(U0))
    State pred{st.t + dt, st.u, st.rho};
    pred.u.c1 += dt * f0.fu.c1;
    pred.u.c2 += dt * f0.fu.c2;
    pred.u.c3 += dt * f0.fu.c3;
    pred.rho += dt * f0.frho;
    detail::apply_semigroup(pred, dt);

    const detail::Rhs f1 = detail::eval_rhs(pred, cfg);

    // corrector: U1 = G(U0) + dt/2 (G F(U0) + F(U*))
    State next{st.t + dt, st.u, st.rho};
    detail::apply_semigroup(next, dt);
    State gf{0.0, f0.fu, f0.frho};
    detail::apply_semigroup(gf, dt);
    next.u.c1 += (0.5 * dt) * (gf.u.c1 + f1.fu.c1);
    next.u.c2 += (0.5 * dt) * (gf.u.c2 + f1.fu.c2);
    next.u.c3 += (0.5 * dt) * (gf.u.c3 + f1.fu.c3);
    next.rho += (0.5 * dt) * (gf.rho + f1.frho);
    next.u.divergence_free = true; // Leray'd rhs + divergence-free input
    detail::check_finite(next);
    return next;
}

/// One step of size cfg.dt (must be positive for the single-step entry).
inline State step(const State& st, const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("step: cfg.dt must be positive");
    return step_by(st, cfg, cfg.dt);
}

// ===========================================================================
// Energy ledger and full runs
// ===========================================================================

struct LedgerRow {
    real t = 0.0;
    real u_l2sq = 0.0;          ///< ||u||^2_{L^2}
    real gradh_u_int = 0.0;     ///< int_0^t ||grad_h u||^2
    real rho_l2sq = 0.0;        ///< ||rho||^2_{L^2}
    real gradh_rho_int = 0.0;   ///< int_0^t ||grad_h rho||^2
    real u_h0s = 0.0;           ///< ||u||_{H^{0,s}}
    real rho_h0d = 0.0;         ///< ||rho||_{H^{0,delta}}
    real u_h1 = 0.0;            ///< ||u||_{H^1}
    real omega_r_l2 = 0.0;      ///< ||omega / r||_{L^2} (axis clamped)
    real u_energy_lhs = 0.0;    ///< ||u||^2 + 2 int ||grad_h u||^2
    real u_energy_rhs = 0.0;    ///< 2(||u0||^2 + t^2 ||rho0||^2)
    real rho_energy_lhs = 0.0;  ///< ||rho||^2 + 2 int ||grad_h rho||^2
    real rho_energy_rhs = 0.0;  ///< ||rho0||^2
    bool u_ok = true, rho_ok = true;
};

struct EnergyLedger {
    std::vector<LedgerRow> rows;
    real admission_lhs = 0.0;   ///< ||u0||^2_{0,s} + T ||rho0|| (||u0|| + ||rho0||(1+T/2))
    real admission_rhs = 0.0;   ///< c0^2
    bool admission_checked = false;
    bool admission_ok = true;
    real dt_used = 0.0;         ///< last step size (fixed-dt runs: the dt)
    std::vector<std::string> flags;
    bool aborted = false;
    std::string abort_reason;
};

struct RunResult {
    EnergyLedger ledger;
    std::vector<State> snapshots; ///< at every recorded instant, in order
};

/// Admission threshold left-hand side (certified-run precondition).
inline real admission_lhs(const NormEngine& eng, const State& init, real s, real T) {
    const real u0s = eng.sobolev(init.u, 0.0, s);
    const real u0 = init.u.l2_norm();
    const real r0 = init.rho.l2_norm();
    return sq(u0s) + T * r0 * (u0 + r0 * (1.0 + 0.5 * T));
}

/// ||omega / r||_{L^2} with r clamped to half a horizontal cell at the axis,
/// plus the full H^1 norm; the vorticity is computed spectrally.
struct AxiDiagnostics {
    real omega_over_r_l2 = 0.0;
    real h1_norm = 0.0;
};

inline AxiDiagnostics diagnostics_axi(const State& st) {
    const AnisoGrid& g = st.u.grid();
    // omega = curl u, spectrally
    SpectralField w1 = derivative(st.u.c3, 2);
    w1 -= derivative(st.u.c2, 3);
    SpectralField w2 = derivative(st.u.c1, 3);
    w2 -= derivative(st.u.c3, 1);
    SpectralField w3 = derivative(st.u.c2, 1);
    w3 -= derivative(st.u.c1, 2);
    const auto p1 = detail::inverse_unchecked(w1);
    const auto p2 = detail::inverse_unchecked(w2);
    const auto p3 = detail::inverse_unchecked(w3);
    const real cx = pi * g.Lh, cy = pi * g.Lh; // box center (axis position)
    const real h = 2.0 * pi * g.Lh / g.Nh;
    const real rmin = 0.5 * h;
    real acc = 0.0;
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real x = g.x_h(i1) - cx;
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real y = g.x_h(i2) - cy;
            const real r = std::max(std::sqrt(x * x + y * y), rmin);
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p)
                acc += (sq(p1[p]) + sq(p2[p]) + sq(p3[p])) / sq(r);
        }
    }
    AxiDiagnostics d;
    d.omega_over_r_l2 = std::sqrt(acc * g.quad_weight());
    d.h1_norm = NormEngine::h1_norm(st.u);
    return d;
}

/// Integrate from `init` to cfg.t_end.  The initial state is forced into the
/// cutoff ball (and the dealias box when cfg.dealias).  Certified mode
/// rejects data violating the admission threshold before stepping.  Energy
/// rows are checked against their right-hand sides with tolerance
/// (1e-6 + 10 dt^2) * max(1, rhs); violations flag the run but do not abort.
inline RunResult run(const SolverConfig& cfg, const State& init) {
    cfg.validate();
    if (init.u.grid() != cfg.grid || init.rho.grid() != cfg.grid)
        throw std::invalid_argument("run: initial state grid differs from config grid");

    DyadicFilterBank bank(cfg.grid);
    NormEngine eng(bank);

    State st{0.0, cutoff_En(init.u, cfg.n_cutoff), cutoff_En(init.rho, cfg.n_cutoff)};
    if (cfg.dealias) {
        st.u.c1 = dealias_23(st.u.c1);
        st.u.c2 = dealias_23(st.u.c2);
        st.u.c3 = dealias_23(st.u.c3);
        st.rho = dealias_23(st.rho);
    }
    st.u = leray_project(st.u);
    if (divergence_residual(st.u) > 1e-12)
        throw std::invalid_argument("run: initial velocity not divergence-free after projection");

    RunResult out;
    EnergyLedger& led = out.ledger;

    led.admission_lhs = admission_lhs(eng, st, cfg.s_index, cfg.t_end);
    led.admission_rhs = sq(cfg.c0);
    led.admission_checked = cfg.certified;
    led.admission_ok = led.admission_lhs < led.admission_rhs;
    if (cfg.certified && !led.admission_ok)
        throw std::domain_error(
            "run: certified mode admission violated: ||u0||^2_{0,s} + T ||rho0|| (||u0|| + "
            "||rho0||(1+T/2)) = " +
            std::to_string(led.admission_lhs) + " >= c0^2 = " + std::to_string(led.admission_rhs));

    const real u0_l2sq = sq(st.u.l2_norm());
    const real rho0_l2sq = sq(st.rho.l2_norm());

    real grad_u_int = 0.0, grad_rho_int = 0.0;
    auto grad_sq = [&](const State& s) {
        return std::array<real, 2>{grad_h_l2sq(s.u.c1) + grad_h_l2sq(s.u.c2) +
                                       grad_h_l2sq(s.u.c3),
                                   grad_h_l2sq(s.rho)};
    };

    auto pick_dt = [&](const State& s) {
        if (cfg.dt > 0.0) return cfg.dt;
        const real umax = std::max({s.u.c1.linf_coeff(), s.u.c2.linf_coeff(),
                                    s.u.c3.linf_coeff(), 1e-6});
        return std::min(cfg.t_end / 16.0, 0.5 / (cfg.grid.kappa_h_max() * umax));
    };

    auto record = [&](const State& s, real dt_now) {
        LedgerRow row;
        row.t = s.t;
        row.u_l2sq = sq(s.u.l2_norm());
        row.gradh_u_int = grad_u_int;
        row.rho_l2sq = sq(s.rho.l2_norm());
        row.gradh_rho_int = grad_rho_int;
        row.u_h0s = eng.sobolev(s.u, 0.0, cfg.s_index);
        row.rho_h0d = eng.sobolev(s.rho, 0.0, cfg.delta_index);
        row.u_h1 = NormEngine::h1_norm(s.u);
        row.omega_r_l2 = diagnostics_axi(s).omega_over_r_l2;
        row.u_energy_lhs = row.u_l2sq + 2.0 * grad_u_int;
        row.u_energy_rhs = 2.0 * (u0_l2sq + sq(s.t) * rho0_l2sq);
        row.rho_energy_lhs = row.rho_l2sq + 2.0 * grad_rho_int;
        row.rho_energy_rhs = rho0_l2sq;
        const real tol = (1e-6 + 10.0 * sq(dt_now));
        row.u_ok = row.u_energy_lhs <= row.u_energy_rhs + tol * std::max(1.0, row.u_energy_rhs);
        row.rho_ok =
            row.rho_energy_lhs <= row.rho_energy_rhs + tol * std::max(1.0, row.rho_energy_rhs);
        if (!row.u_ok)
            led.flags.push_back("u-energy bound violated at t=" + std::to_string(s.t));
        if (!row.rho_ok)
            led.flags.push_back("rho-energy bound violated at t=" + std::to_string(s.t));
        led.rows.push_back(row);
        out.snapshots.push_back(s);
    };

    real dt = pick_dt(st);
    led.dt_used = dt;
    record(st, dt);

    int step_count = 0;
    while (st.t < cfg.t_end - 1e-12 * cfg.t_end) {
        if (cfg.dt <= 0.0 && step_count > 0 && step_count % 100 == 0) dt = pick_dt(st);
        const real h = std::min(dt, cfg.t_end - st.t);
        const auto g0 = grad_sq(st);
        State next;
        try {
            next = step_by(st, cfg, h);
        } catch (const std::runtime_error& e) {
            led.aborted = true;
            led.abort_reason = e.what();
            break;
        }
        const auto g1 = grad_sq(next);
        grad_u_int += 0.5 * h * (g0[0] + g1[0]);
        grad_rho_int += 0.5 * h * (g0[1] + g1[1]);
        st = std::move(next);
        ++step_count;
        led.dt_used = h;
        if (step_count % cfg.record_every == 0 || st.t >= cfg.t_end - 1e-12 * cfg.t_end)
            record(st, h);
    }
    return out;
}

// ===========================================================================
// Axisymmetric swirl-free initial data
// ===========================================================================

/// Parameters of the azimuthal-potential generator.  The velocity is
/// u = curl(psi e_phi) with psi = amplitude * r * E(r, z),
/// E = exp(-(r - ring_radius)^2 / (2 sr^2) - z^2 / (2 sz^2)), centered at the
/// box center — divergence-free and swirl-free by construction.  rho gets an
/// axisymmetric bump with its own parameters (mean removed).
struct AxisymmetricData {
    real amplitude = 0.0;
    real radial_scale = 0.25;   ///< sr
    real vertical_scale = 0.25; ///< sz
    real ring_radius = 0.0;     ///< 0 = centered bump
    real rho_amplitude = 0.0;
    real rho_radial_scale = 0.25;
    real rho_vertical_scale = 0.25;
    real rho_ring_radius = 0.0;
};

inline State make_axisymmetric(const AxisymmetricData& data, const AnisoGrid& g) {
    g.validate();
    const real cx = pi * g.Lh, cy = pi * g.Lh, cz = pi * g.Lv;

    auto envelope = [&](real r, real z, real sr, real sz, real r0) {
        return std::exp(-sq(r - r0) / (2.0 * sq(sr)) - sq(z) / (2.0 * sq(sz)));
    };

    // vector potential A = amplitude * (-(y-cy), (x-cx), 0) * E  (= psi e_phi)
    std::vector<real> a1(g.size()), a2(g.size()), rho(g.size());
    real peak_a = 0.0, peak_rho = 0.0;
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1) {
        const real x = g.x_h(i1) - cx;
        for (int i2 = 0; i2 < g.Nh; ++i2) {
            const real y = g.x_h(i2) - cy;
            const real r = std::sqrt(x * x + y * y);
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                const real z = g.x_v(i3) - cz;
                const real E =
                    envelope(r, z, data.radial_scale, data.vertical_scale, data.ring_radius);
                a1[p] = -data.amplitude * y * E;
                a2[p] = data.amplitude * x * E;
                rho[p] = data.rho_amplitude * envelope(r, z, data.rho_radial_scale,
                                                       data.rho_vertical_scale,
                                                       data.rho_ring_radius);
                peak_a = std::max(peak_a, std::max(std::abs(a1[p]), std::abs(a2[p])));
                peak_rho = std::max(peak_rho, std::abs(rho[p]));
            }
        }
    }

    // boundary-contact rejection: periodization must not clip the profile
    auto boundary_peak = [&](const std::vector<real>& field) {
        real m = 0.0;
        for (int i1 = 0; i1 < g.Nh; ++i1)
            for (int i2 = 0; i2 < g.Nh; ++i2)
                for (int i3 = 0; i3 < g.Nv; ++i3)
                    if (i1 == 0 || i2 == 0 || i3 == 0)
                        m = std::max(m, std::abs(field[g.idx(i1, i2, i3)]));
        return m;
    };
    if (peak_a > 0.0 && boundary_peak(a1) + boundary_peak(a2) > 1e-10 * peak_a)
        throw std::invalid_argument(
            "make_axisymmetric: velocity profile touches the box boundary");
    if (peak_rho > 0.0 && boundary_peak(rho) > 1e-10 * peak_rho)
        throw std::invalid_argument(
            "make_axisymmetric: density profile touches the box boundary");

    const SpectralField A1 = forward(a1, g);
    const SpectralField A2 = forward(a2, g);
    // u = curl A with A3 = 0:
    //   u1 = -d3 A2,  u2 = d3 A1,  u3 = d1 A2 - d2 A1
    State st;
    st.t = 0.0;
    SpectralField u1 = derivative(A2, 3);
    u1 *= -1.0;
    SpectralField u2 = derivative(A1, 3);
    SpectralField u3 = derivative(A2, 1);
    u3 -= derivative(A1, 2);
    st.u = VectorField{std::move(u1), std::move(u2), std::move(u3), true};
    st.rho = forward(rho, g);
    st.rho.coeffs()[0] = 0.0; // mean-free density by default
    return st;
}

} // namespace nsbh
