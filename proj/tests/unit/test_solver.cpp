// Galerkin solver: frequency-ball cutoff, advection term, exactly solvable
// trajectories, energy ledger discipline, admission gating, step-doubling
// convergence order, abort on non-finite states, and the axisymmetric
// generator with an independent quadrature oracle for |omega/r|.
#include <catch2/catch_amalgamated.hpp>

#include <nsbh/random_fields.hpp>
#include <nsbh/solver.hpp>

#include "../common/test_helpers.hpp"

#include <cmath>
#include <functional>

using namespace nsbh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testutil::cosine_mode;
using testutil::from_fn;

namespace {

SolverConfig base_config(const AnisoGrid& g, real dt, real t_end) {
    SolverConfig cfg;
    cfg.grid = g;
    cfg.n_cutoff = 4.0;
    cfg.dt = dt;
    cfg.t_end = t_end;
    return cfg;
}

real simpson(const std::function<real(real)>& f, real a, real b, int n) {
    if (n % 2 == 1) ++n;
    const real h = (b - a) / n;
    real acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("frequency-ball cutoff: support, boundary, idempotence") {
    const AnisoGrid g(8, 8);
    const auto spec = EnsembleSpec::white_noise(1, 61);
    const SpectralField f = random_scalar(g, spec, 0);

    const SpectralField once = cutoff_En(f, 1.5);
    const SpectralField twice = cutoff_En(once, 1.5);
    REQUIRE(once.coeffs() == twice.coeffs()); // sharp projector, bitwise
    REQUIRE(cutoff_En(f, 1e6).coeffs() == f.coeffs());

    // the closed ball keeps |kappa| = n exactly
    const SpectralField unit = cosine_mode(g, 1, 0, 0);
    REQUIRE(cutoff_En(unit, 1.0).l2_norm() == unit.l2_norm());
    // exact spectral pair at |kappa| = sqrt(2): strictly outside the closed
    // unit ball, so the sharp projector must kill it bitwise (a transform-built
    // mode would leave rounding residue inside the ball)
    SpectralField diag(g);
    diag.coeffs()[g.idx(1, 1, 0)] = complexd(0.25, 0.0);
    diag.coeffs()[g.idx(g.Nh - 1, g.Nh - 1, 0)] = complexd(0.25, 0.0);
    REQUIRE(cutoff_En(diag, 1.0).l2_norm() == 0.0);

    SpectralField dc(g);
    dc.coeffs()[0] = complexd(2.0, 0.0);
    REQUIRE(cutoff_En(f, 0.0).coeffs()[0] == f.coeffs()[0]);
    REQUIRE_THROWS_AS(cutoff_En(f, -1.0), std::invalid_argument);
}

TEST_CASE("advection term: oracle, skewness, solenoidal guard") {
    const AnisoGrid g(16, 16);
    SolverConfig cfg = base_config(g, 0.01, 1.0);
    cfg.n_cutoff = 8.0;

    SECTION("closed form for crossed single modes") {
        const VectorField u{cosine_mode(g, 0, 0, 1), SpectralField(g), SpectralField(g),
                            true};
        const SpectralField f = cosine_mode(g, 1, 0, 0);
        const SpectralField adv = nonlinear_term(u, f, cfg);
        const SpectralField want = from_fn(g, [](real x, real, real z) {
            return -std::cos(z) * std::sin(x);
        });
        REQUIRE(testutil::rel_l2_diff(adv, want) < 1e-13);
    }
    SECTION("projected advection is skew against band-limited scalars") {
        const auto spec = EnsembleSpec::white_noise(1, 67);
        const VectorField u = random_vector(g, spec, 0, true);
        const SpectralField f = random_scalar(g, spec, 0, 3);
        const DyadicFilterBank bank(g);
        const NormEngine eng(bank);
        // skewness needs <E_n(u.grad f), f> = <u.grad f, f>, i.e. the ball
        // must contain f's dealiased support (|kappa| up to sqrt(3)*5 here)
        SolverConfig wide = cfg;
        wide.n_cutoff = 9.0;
        const real skew = eng.pairing(nonlinear_term(u, f, wide), f, PairingSpec{0.0, 0.0});
        REQUIRE(std::abs(skew) < 1e-12 * u.l2_norm() * sq(NormEngine::h1_norm(f)));
    }
    SECTION("advecting field must be solenoidal") {
        const VectorField bad{cosine_mode(g, 1, 0, 0), SpectralField(g), SpectralField(g),
                              false};
        REQUIRE_THROWS_AS(nonlinear_term(bad, cosine_mode(g, 0, 0, 1), cfg),
                          std::invalid_argument);
    }
}

TEST_CASE("config validation rejects out-of-range parameters") {
    const AnisoGrid g(8, 8);
    SolverConfig cfg = base_config(g, 0.01, 1.0);
    REQUIRE_NOTHROW(cfg.validate());
    SolverConfig c1 = cfg;
    c1.n_cutoff = 0.0;
    REQUIRE_THROWS_AS(c1.validate(), std::invalid_argument);
    c1 = cfg;
    c1.n_cutoff = 100.0; // beyond the Nyquist radius
    REQUIRE_THROWS_AS(c1.validate(), std::invalid_argument);
    c1 = cfg;
    c1.t_end = 0.0;
    REQUIRE_THROWS_AS(c1.validate(), std::invalid_argument);
    c1 = cfg;
    c1.s_index = 0.4;
    REQUIRE_THROWS_AS(c1.validate(), std::invalid_argument);
    c1 = cfg;
    c1.delta_index = 0.9; // exceeds s_index
    REQUIRE_THROWS_AS(c1.validate(), std::invalid_argument);
    c1 = cfg;
    c1.record_every = 0;
    REQUIRE_THROWS_AS(c1.validate(), std::invalid_argument);
    REQUIRE_THROWS_AS(step(State{0.0, VectorField(g), SpectralField(g)},
                           base_config(g, 0.0, 1.0)),
                      std::invalid_argument);
    const AnisoGrid other(16, 16);
    REQUIRE_THROWS_AS(run(cfg, State{0.0, VectorField(other), SpectralField(other)}),
                      std::invalid_argument);
}

TEST_CASE("horizontal shear decays exactly through the integrating factor") {
    const AnisoGrid g(8, 8);
    const SolverConfig cfg = base_config(g, 0.01, 0.5);
    State st{0.0, VectorField{SpectralField(g), cosine_mode(g, 1, 0, 0), SpectralField(g),
                              true},
             SpectralField(g)};
    const real n0 = st.u.l2_norm();
    for (int i = 0; i < 50; ++i) st = step(st, cfg);
    REQUIRE_THAT(st.t, WithinRel(0.5, 1e-12));
    REQUIRE_THAT(st.u.l2_norm(), WithinRel(std::exp(-0.5) * n0, 1e-12));
    REQUIRE(st.rho.l2_norm() == 0.0);

    const RunResult rr = run(cfg, State{0.0,
                                        VectorField{SpectralField(g), cosine_mode(g, 1, 0, 0),
                                                    SpectralField(g), true},
                                        SpectralField(g)});
    const auto& rows = rr.ledger.rows;
    REQUIRE(rows.size() >= 2);
    REQUIRE_THAT(rows.back().u_l2sq, WithinRel(std::exp(-1.0) * sq(n0), 1e-12));
    for (const auto& row : rows) REQUIRE((row.u_ok && row.rho_ok));
    REQUIRE(rr.ledger.flags.empty());
}

TEST_CASE("vertical-only modes are fixed points of the full step") {
    const AnisoGrid g(8, 8);
    const SolverConfig cfg = base_config(g, 0.05, 0.2);
    // exact spectral construction: cos(x3) with no FFT rounding residue
    SpectralField u1(g);
    u1.at(0, 0, 1) = complexd(0.5, 0.0);
    u1.at(0, 0, g.Nv - 1) = complexd(0.5, 0.0);
    const RunResult rr = run(cfg, State{0.0,
                                        VectorField{u1, SpectralField(g),
                                                    SpectralField(g), true},
                                        SpectralField(g)});
    const State& first = rr.snapshots.front();
    const State& last = rr.snapshots.back();
    REQUIRE(last.u.c1.coeffs() == first.u.c1.coeffs()); // bitwise invariant
    REQUIRE(last.u.c2.l2_norm() == 0.0);
    REQUIRE(last.u.c3.l2_norm() == 0.0);
}

TEST_CASE("constant density forces linear-in-time vertical momentum") {
    const AnisoGrid g(8, 8);
    const SolverConfig cfg = base_config(g, 0.01, 0.4);
    SpectralField rho0(g);
    rho0.coeffs()[0] = complexd(0.7, 0.0); // rho = 0.7 everywhere
    const real rho_l2 = rho0.l2_norm();
    const RunResult rr = run(cfg, State{0.0, VectorField(g), rho0});
    for (const auto& row : rr.ledger.rows) {
        REQUIRE_THAT(std::sqrt(row.u_l2sq), WithinAbs(row.t * rho_l2, 1e-12 * (1.0 + rho_l2)));
        REQUIRE_THAT(row.rho_l2sq, WithinRel(sq(rho_l2), 1e-12));
        REQUIRE((row.u_ok && row.rho_ok));
    }
    const State& last = rr.snapshots.back();
    REQUIRE(std::abs(last.u.c3.coeffs()[0] - complexd(0.4 * 0.7, 0.0)) < 1e-12);
}

TEST_CASE("energy ledger stays within its a-priori envelopes on random data") {
    const AnisoGrid g(8, 8);
    SolverConfig cfg = base_config(g, 0.005, 0.25);
    const auto spec = EnsembleSpec::power(2.0, 1, 71);
    State init{0.0, random_vector(g, spec, 0, true), random_scalar(g, spec, 0, 3)};
    const RunResult rr = run(cfg, init);
    REQUIRE(!rr.ledger.aborted);
    REQUIRE(rr.ledger.flags.empty());
    real prev_int = -1.0;
    for (const auto& row : rr.ledger.rows) {
        REQUIRE((row.u_ok && row.rho_ok));
        REQUIRE(row.gradh_u_int >= prev_int);
        prev_int = row.gradh_u_int;
        REQUIRE(row.u_energy_lhs <= row.u_energy_rhs + 1e-3 * std::max(1.0, row.u_energy_rhs));
    }
    REQUIRE(rr.ledger.dt_used > 0.0);

    SECTION("auto step size activates when dt = 0") {
        cfg.dt = 0.0;
        const RunResult ar = run(cfg, init);
        REQUIRE(!ar.ledger.aborted);
        REQUIRE(ar.ledger.dt_used > 0.0);
        REQUIRE(ar.ledger.dt_used <= cfg.t_end / 16.0 + 1e-15);
        REQUIRE_THAT(ar.ledger.rows.back().t, WithinRel(cfg.t_end, 1e-10));
    }
}

TEST_CASE("step doubling shows second-order convergence") {
    const AnisoGrid g(8, 8);
    const auto spec = EnsembleSpec::power(2.0, 1, 73);
    const State init{0.0, random_vector(g, spec, 0, true), random_scalar(g, spec, 0, 3)};
    auto terminal = [&](real dt) {
        const RunResult rr = run(base_config(g, dt, 0.1), init);
        REQUIRE(!rr.ledger.aborted);
        return rr.snapshots.back();
    };
    const State a = terminal(0.025);
    const State b = terminal(0.0125);
    const State c = terminal(0.00625);
    auto dist = [](const State& x, const State& y) {
        return (x.u - y.u).l2_norm() + (x.rho - y.rho).l2_norm();
    };
    const real ratio = dist(a, b) / dist(b, c);
    REQUIRE(ratio > 2.5);
    REQUIRE(ratio < 6.0);
}

TEST_CASE("certified runs enforce the admission threshold") {
    const AnisoGrid g(8, 8);
    SolverConfig cfg = base_config(g, 0.01, 0.2);
    cfg.certified = true;
    cfg.c0 = 0.1;
    const auto spec = EnsembleSpec::power(2.0, 1, 79);

    State big{0.0, random_vector(g, spec, 0, true), random_scalar(g, spec, 0, 3)};
    REQUIRE_THROWS_AS(run(cfg, big), std::domain_error);

    State small = big;
    small.u.c1 *= 1e-3;
    small.u.c2 *= 1e-3;
    small.u.c3 *= 1e-3;
    small.rho *= 1e-3;
    const RunResult ok = run(cfg, small);
    REQUIRE(ok.ledger.admission_checked);
    REQUIRE(ok.ledger.admission_ok);
    REQUIRE(ok.ledger.admission_lhs < ok.ledger.admission_rhs);

    const DyadicFilterBank bank(g);
    const NormEngine eng(bank);
    const real lhs = admission_lhs(eng, big, cfg.s_index, cfg.t_end);
    REQUIRE(lhs >= sq(cfg.c0));
}

TEST_CASE("non-finite states abort the run with a recorded reason") {
    const AnisoGrid g(8, 8);
    SolverConfig cfg = base_config(g, 5.0, 100.0);
    cfg.n_cutoff = 5.0;
    const auto spec = EnsembleSpec::white_noise(1, 83);
    VectorField u = random_vector(g, spec, 0, true);
    u.c1 *= 1e3;
    u.c2 *= 1e3;
    u.c3 *= 1e3;
    const RunResult rr = run(cfg, State{0.0, u, random_scalar(g, spec, 0, 3)});
    REQUIRE(rr.ledger.aborted);
    REQUIRE(!rr.ledger.abort_reason.empty());
    REQUIRE(rr.snapshots.back().t < cfg.t_end);
}

TEST_CASE("axisymmetric generator: structure and spectral hygiene") {
    const AnisoGrid g(32, 32);
    AxisymmetricData data;
    data.amplitude = 1.0;
    data.radial_scale = 0.35;
    data.vertical_scale = 0.35;
    data.rho_amplitude = 0.5;
    data.rho_radial_scale = 0.4;
    data.rho_vertical_scale = 0.4;
    const State st = make_axisymmetric(data, g);

    REQUIRE(st.u.divergence_free);
    REQUIRE(divergence_residual(st.u) < 1e-12);
    REQUIRE(std::abs(st.rho.coeffs()[0]) == 0.0);
    REQUIRE(st.u.l2_norm() > 0.0);

    // swirl-free: x u2 - y u1 = r u_phi vanishes identically
    const auto p1 = detail::inverse_unchecked(st.u.c1);
    const auto p2 = detail::inverse_unchecked(st.u.c2);
    real swirl = 0.0, umax = 0.0;
    std::size_t p = 0;
    for (int i1 = 0; i1 < g.Nh; ++i1)
        for (int i2 = 0; i2 < g.Nh; ++i2)
            for (int i3 = 0; i3 < g.Nv; ++i3, ++p) {
                const real x = g.x_h(i1) - pi * g.Lh;
                const real y = g.x_h(i2) - pi * g.Lh;
                swirl = std::max(swirl, std::abs(x * p2[p] - y * p1[p]));
                umax = std::max(umax, std::max(std::abs(p1[p]), std::abs(p2[p])));
            }
    REQUIRE(swirl < 1e-11 * (1.0 + umax));

    // quarter-turn symmetry about the vertical axis, exact on the grid
    REQUIRE(testutil::rotation_residual(st.u) < 1e-11);

    // profiles reaching the periodic boundary are rejected
    AxisymmetricData wide = data;
    wide.radial_scale = 1.5;
    REQUIRE_THROWS_AS(make_axisymmetric(wide, g), std::invalid_argument);
}

TEST_CASE("annular vortex |omega/r| matches a separable quadrature oracle") {
    const AnisoGrid g(64, 64);
    AxisymmetricData data;
    data.amplitude = 1.0;
    data.radial_scale = 0.2;
    data.vertical_scale = 0.2;
    data.ring_radius = 1.3;
    const State st = make_axisymmetric(data, g);
    const AxiDiagnostics d = diagnostics_axi(st);

    // psi = a r f(r) g(z) with Gaussian factors; the azimuthal vorticity obeys
    //   omega_phi / r = -a f(r) g(z) [A(r) + B(z)],
    //   A = 3u/r + u^2 - 1/sr^2,  u = -(r - r0)/sr^2,  B = z^2/sz^4 - 1/sz^2,
    // so the squared integral splits into five one-dimensional factors.
    const real a = data.amplitude, sr = data.radial_scale, sz = data.vertical_scale,
               r0 = data.ring_radius;
    auto f2 = [&](real r) { return std::exp(-sq(r - r0) / sq(sr)); };
    auto g2 = [&](real z) { return std::exp(-sq(z) / sq(sz)); };
    auto A = [&](real r) {
        const real u = -(r - r0) / sq(sr);
        return 3.0 * u / r + sq(u) - 1.0 / sq(sr);
    };
    auto B = [&](real z) { return sq(z) / sq(sq(sz)) - 1.0 / sq(sz); };
    const int n = 40000;
    const real eps = 1e-7;
    const real IfA2 = simpson([&](real r) { return f2(r) * sq(A(r)) * r; }, eps, pi, n);
    const real IfA = simpson([&](real r) { return f2(r) * A(r) * r; }, eps, pi, n);
    const real If = simpson([&](real r) { return f2(r) * r; }, eps, pi, n);
    const real Ig = simpson(g2, -pi, pi, n);
    const real IgB = simpson([&](real z) { return g2(z) * B(z); }, -pi, pi, n);
    const real IgB2 = simpson([&](real z) { return g2(z) * sq(B(z)); }, -pi, pi, n);
    const real oracle =
        std::sqrt(2.0 * pi * sq(a) * (IfA2 * Ig + 2.0 * IfA * IgB + If * IgB2));

    REQUIRE_THAT(d.omega_over_r_l2, WithinRel(oracle, 1e-5));
    REQUIRE(d.h1_norm > 0.0);
}
