// Deterministic random-field ensembles (stream independence, symmetry and
// spectral discipline), digests, thread-count invariance of parallel loops,
// and the comparison-lemma machinery with closed-form antiderivatives.
#include <catch2/catch_amalgamated.hpp>

#include <nsbh/osgood.hpp>
#include <nsbh/random_fields.hpp>

#include "../common/test_helpers.hpp"

#include <atomic>
#include <cmath>
#include <vector>

using namespace nsbh;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("random streams are reproducible and decorrelated") {
    const AnisoGrid g(16, 16);
    const auto spec = EnsembleSpec::white_noise(4, 42);
    const SpectralField a = random_scalar(g, spec, 0);
    const SpectralField b = random_scalar(g, spec, 0);
    REQUIRE(a.coeffs() == b.coeffs()); // bitwise identical

    const SpectralField c = random_scalar(g, spec, 1);
    REQUIRE(testutil::rel_l2_diff(a, c) > 0.1);

    auto spec2 = spec;
    spec2.seed = 43;
    const SpectralField d = random_scalar(g, spec2, 0);
    REQUIRE(testutil::rel_l2_diff(a, d) > 0.1);

    // Component sub-streams differ too.
    const SpectralField e = random_scalar(g, spec, 0, 1);
    REQUIRE(testutil::rel_l2_diff(a, e) > 0.1);
}

TEST_CASE("random samples are real, mean-free, Nyquist-free, and dealiased") {
    const AnisoGrid g(16, 32);
    const auto spec = EnsembleSpec::white_noise(1, 7);
    const SpectralField f = random_scalar(g, spec, 0);
    REQUIRE(detail::hermitian_violation(f) == 0.0);
    REQUIRE(std::abs(f.at(0, 0, 0)) == 0.0);
    REQUIRE(std::abs(f.at(g.Nh / 2, 1, 1)) == 0.0);
    REQUIRE(std::abs(f.at(1, g.Nh / 2, 1)) == 0.0);
    REQUIRE(std::abs(f.at(1, 1, g.Nv / 2)) == 0.0);
    REQUIRE(testutil::rel_l2_diff(dealias_23(f), f) == 0.0);
    REQUIRE(f.l2_norm() > 0.0);
}

TEST_CASE("single-block ensembles live in their vertical block") {
    const AnisoGrid g(8, 64);
    const DyadicFilterBank bank(g);
    const auto spec = EnsembleSpec::block(3, 1, 11);
    const SpectralField f = random_scalar(g, spec, 0);
    REQUIRE(f.l2_norm() > 0.0);
    // The envelope is the block profile itself, so frequencies outside the
    // support of band 3 carry nothing: blocks with a gap of 2 are empty.
    REQUIRE(bank.delta_v(1, f).l2_norm() == 0.0);
    REQUIRE(bank.delta_v(5, f).l2_norm() == 0.0);
    REQUIRE(bank.delta_v(3, f).l2_norm() > 0.0);
}

TEST_CASE("power-law ensembles decay with frequency") {
    const AnisoGrid g(16, 32);
    const DyadicFilterBank bank(g);
    const auto spec = EnsembleSpec::power(4.0, 1, 3);
    const SpectralField f = random_scalar(g, spec, 0);
    // Low vertical blocks dominate high ones for a steep envelope.
    const real lo = bank.delta_v(0, f).l2_norm();
    const real hi = bank.delta_v(bank.q_max_v(), f).l2_norm();
    REQUIRE(lo > hi);
}

TEST_CASE("divergence-free vector samples are exactly solenoidal") {
    const AnisoGrid g(16, 16);
    const auto spec = EnsembleSpec::white_noise(1, 5);
    const VectorField v = random_vector(g, spec, 0, true);
    REQUIRE(v.divergence_free);
    REQUIRE(divergence_residual(v) < 1e-12);
    const VectorField w = random_vector(g, spec, 0, false);
    REQUIRE(divergence_residual(w) > 1e-3);
    // Components inside one sample are distinct streams.
    REQUIRE(testutil::rel_l2_diff(w.c1, w.c2) > 0.1);
}

TEST_CASE("field digests are stable and sensitive") {
    const AnisoGrid g(8, 8);
    const auto spec = EnsembleSpec::white_noise(1, 9);
    const SpectralField f = random_scalar(g, spec, 0);
    const std::string d1 = field_digest(f);
    REQUIRE(d1 == field_digest(f));
    REQUIRE(d1.size() == 16u);
    SpectralField h = f;
    h.at(1, 0, 0) += complexd{1e-13, 0.0};
    h.at(7, 0, 0) += complexd{1e-13, 0.0};
    REQUIRE(field_digest(h) != d1);
}

TEST_CASE("parallel loops visit every index once, at any thread count") {
    const std::size_t n = 1000;
    for (int tc : {1, 4}) {
        threads::set_count(tc);
        std::vector<std::atomic<int>> hits(n);
        for (auto& h : hits) h.store(0);
        parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (std::size_t i = 0; i < n; ++i) REQUIRE(hits[i].load() == 1);
    }
    threads::set_count(1);
}

TEST_CASE("sampled trajectories validate and integrate exactly on lines") {
    Tabulated tab;
    tab.t = {0.0, 0.5, 1.0, 2.0};
    tab.v = {0.0, 0.5, 1.0, 2.0}; // v = t
    REQUIRE_NOTHROW(tab.validate());
    const auto cum = tab.cumulative_integral();
    REQUIRE_THAT(cum.back(), WithinAbs(2.0, 1e-15)); // int_0^2 t dt = 2
    REQUIRE_THAT(cum[2], WithinAbs(0.5, 1e-15));

    Tabulated bad1;
    bad1.t = {0.0, 1.0};
    bad1.v = {0.0};
    REQUIRE_THROWS_AS(bad1.validate(), std::invalid_argument);
    Tabulated bad2;
    bad2.t = {0.0, 1.0, 0.5};
    bad2.v = {0.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("antiderivative quadrature matches closed forms") {
    SECTION("linear modulus: M(x) = ln(a/x)") {
        const auto mod = modulus_linear();
        for (real x : {1e-8, 1e-4, 0.3, 0.99}) {
            const real got = osgood_M(mod, x, 1.0);
            REQUIRE_THAT(got, WithinRel(closed_M_linear(x, 1.0), 1e-8));
        }
    }
    SECTION("double-log modulus against its closed antiderivative") {
        const auto mod = modulus_double_log();
        const real a = std::exp(-2.0);
        for (real x : {1e-10, 1e-6, 1e-3}) {
            const real got = osgood_M(mod, x, a);
            REQUIRE_THAT(got, WithinRel(closed_M_double_log(x, a), 1e-8));
        }
    }
    SECTION("domain edges") {
        const auto mod = modulus_linear();
        REQUIRE(osgood_M(mod, 1.5, 1.0) == 0.0); // at/above the cap
        REQUIRE_THROWS_AS(osgood_M(mod, 0.0, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(osgood_M(mod, -1.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("the double-log equality trajectory saturates the comparison bound") {
    const real chi0 = std::exp(-10.0), gamma = 1.0;
    const real a = std::exp(-2.0);
    // Closed-form identity: M(chi0) - M(chi(t)) = gamma t.
    for (real t : {0.1, 0.3, 0.5}) {
        const real chit = double_log_equality_solution(chi0, gamma, t);
        const real diff = closed_M_double_log(chi0, a) - closed_M_double_log(chit, a);
        REQUIRE_THAT(diff, WithinRel(gamma * t, 1e-10));
    }
    // And the trajectory stays inside the modulus domain on [0, 0.5].
    REQUIRE(double_log_equality_solution(chi0, gamma, 0.5) < a);
}

TEST_CASE("comparison certificates: equality data passes, inflated data fails") {
    const real chi0 = std::exp(-10.0), gamma = 1.0;
    const real a = std::exp(-2.0);
    const int n = 33;
    OsgoodProblem prob;
    prob.c = chi0;
    prob.a = a;
    prob.mu = modulus_double_log();
    prob.t0 = 0.0;
    prob.T = 0.5;
    Tabulated traj;
    for (int i = 0; i < n; ++i) {
        const real t = 0.5 * i / (n - 1);
        prob.gamma.t.push_back(t);
        prob.gamma.v.push_back(gamma);
        traj.t.push_back(t);
        traj.v.push_back(double_log_equality_solution(chi0, gamma, t));
    }

    SECTION("the saturating trajectory is certified") {
        const auto res = osgood_bound(prob, traj);
        REQUIRE(res.certified);
        REQUIRE(res.min_margin >= 0.0);
        // Equality data: the margin is pure slack, so it is tiny.
        REQUIRE(res.min_margin < 1e-6);
    }
    SECTION("growing faster than the rate allows is rejected") {
        Tabulated fast = traj;
        for (auto& v : fast.v) v = std::min(v * 2.5, a * 0.999);
        const auto res = osgood_bound(prob, fast);
        REQUIRE_FALSE(res.certified);
    }
    SECTION("trajectory values above the modulus domain are a hard error") {
        Tabulated out = traj;
        out.v.back() = a * 1.5;
        REQUIRE_THROWS_AS(osgood_bound(prob, out), std::invalid_argument);
    }
    SECTION("zero data certifies only the zero trajectory") {
        OsgoodProblem zp = prob;
        zp.c = 0.0;
        Tabulated zero = traj;
        for (auto& v : zero.v) v = 0.0;
        const auto res = osgood_bound(zp, zero);
        REQUIRE(res.certified);
        REQUIRE(res.zero_data_path);
        Tabulated live = traj;
        const auto res2 = osgood_bound(zp, live);
        REQUIRE_FALSE(res2.certified);
        REQUIRE(res2.zero_data_path);
    }
    SECTION("a non-divergent modulus cannot certify zero data") {
        OsgoodProblem zp = prob;
        zp.c = 0.0;
        zp.mu = modulus_linear(); // declared divergent? it is; fabricate one that is not
        zp.mu.diverges_at_zero = false;
        Tabulated zero = traj;
        for (auto& v : zero.v) v = 0.0;
        const auto res = osgood_bound(zp, zero);
        REQUIRE_FALSE(res.certified);
    }
    SECTION("a modulus that dips negative is rejected by the sanity scan") {
        OsgoodProblem bad = prob;
        bad.mu.mu = [](real tau) { return tau - 1e-8; };
        bad.mu.name = "shifted";
        const auto traj_copy = traj;
        REQUIRE_THROWS_AS(osgood_bound(bad, traj_copy), std::invalid_argument);
    }
}

TEST_CASE("linear modulus turns the comparison into an exponential envelope") {
    // With mu(tau) = tau the certificate is y(t) <= c exp(int gamma).
    OsgoodProblem prob;
    prob.c = 0.01;
    prob.a = 1.0;
    prob.mu = modulus_linear();
    prob.t0 = 0.0;
    prob.T = 1.0;
    Tabulated traj;
    const int n = 21;
    for (int i = 0; i < n; ++i) {
        const real t = static_cast<real>(i) / (n - 1);
        prob.gamma.t.push_back(t);
        prob.gamma.v.push_back(2.0);
        traj.t.push_back(t);
        traj.v.push_back(0.01 * std::exp(2.0 * t) * 0.999); // just inside
    }
    REQUIRE(osgood_bound(prob, traj).certified);
    for (auto& v : traj.v) v *= 1.10; // 10% above the envelope: must fail
    REQUIRE_FALSE(osgood_bound(prob, traj).certified);
}
