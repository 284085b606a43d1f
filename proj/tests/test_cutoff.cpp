#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dwlab/cutoff.hpp"
#include "dwlab/damping.hpp"

using namespace dwlab;

TEST_CASE("profile is a C2 bump") {
    CHECK(profile::eta(0.0) == 1.0);
    CHECK(profile::eta(0.5) == 1.0);
    CHECK(profile::eta(1.0) == 0.0);
    CHECK(profile::eta(1.5) == 0.0);
    // monotone decrease on (1/2, 1)
    double prev = 1.0;
    for (double s = 0.5; s <= 1.0; s += 0.01) {
        CHECK(profile::eta(s) <= prev + 1e-15);
        prev = profile::eta(s);
    }
    // derivative continuity at the joints
    for (double s0 : {0.5, 1.0}) {
        CHECK(std::abs(profile::eta_prime(s0 - 1e-9) -
                       profile::eta_prime(s0 + 1e-9)) < 1e-6);
        CHECK(std::abs(profile::eta_second(s0 - 1e-9) -
                       profile::eta_second(s0 + 1e-9)) < 1e-4);
    }
    // derivatives match finite differences
    for (double s : {0.55, 0.7, 0.9, 0.99}) {
        const double d = 1e-6;
        const double fd1 = (profile::eta(s + d) - profile::eta(s - d)) / (2 * d);
        CHECK(profile::eta_prime(s) == doctest::Approx(fd1).epsilon(1e-6));
        const double fd2 = (profile::eta(s + d) - 2 * profile::eta(s) +
                            profile::eta(s - d)) /
                           (d * d);
        CHECK(profile::eta_second(s) == doctest::Approx(fd2).epsilon(1e-3));
    }
}

TEST_CASE("unit sphere areas") {
    CHECK(unit_sphere_area(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
    CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
}

TEST_CASE("time support closes at the B-scale for constant damping") {
    DampingCalculus calc(DampingSpec::constant(1.0));
    CutoffFamily fam(calc, 10.0, 2.0, 1);
    // Phi = 1, so int Phi = t and 1 + t = R at t = R - 1
    CHECK(fam.eval_tR() == doctest::Approx(9.0).epsilon(1e-8));
    CHECK(fam.phi(3.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fam.int_phi(4.0) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("cutoff chain rule against finite differences") {
    DampingCalculus calc(DampingSpec::power_law(0.5));
    CutoffFamily fam(calc, 30.0, 2.0, 1);
    const double x = 2.0, t = 5.0;
    const auto ev = fam.eval_cutoff(x, t);
    const double dt = 1e-5;
    const double fd_t = (fam.eval_cutoff(x, t + dt).psi -
                         fam.eval_cutoff(x, t - dt).psi) /
                        (2 * dt);
    CHECK(ev.dt_psi == doctest::Approx(fd_t).epsilon(1e-5));
    const double fd_tt = (fam.eval_cutoff(x, t + dt).psi - 2 * ev.psi +
                          fam.eval_cutoff(x, t - dt).psi) /
                         (dt * dt);
    CHECK(ev.dtt_psi == doctest::Approx(fd_tt).epsilon(1e-3));
    const double dx = 1e-5;
    // radial laplacian in 1d is just psi_xx
    const double fd_xx = (fam.eval_cutoff(x + dx, t).psi - 2 * ev.psi +
                          fam.eval_cutoff(x - dx, t).psi) /
                         (dx * dx);
    CHECK(ev.lap_psi == doctest::Approx(fd_xx).epsilon(1e-3));
}

TEST_CASE("measured constants bound the sampled derivatives") {
    DampingCalculus calc(DampingSpec::constant(1.0));
    CutoffFamily fam(calc, 50.0, 2.0, 1);
    const auto c = fam.verify_cutoff_bounds(100, 1000);
    CHECK(std::isfinite(c.C1));
    CHECK(std::isfinite(c.C2));
    CHECK(std::isfinite(c.C3));
    CHECK(c.C1 > 0.0);
    // spot check the C1 inequality on a few points
    for (double x : {0.0, 3.0, 6.0}) {
        for (double t : {1.0, 20.0, 45.0}) {
            const auto ev = fam.eval_cutoff(x, t);
            if (ev.psi_star < 1e-200) continue;
            CHECK(std::abs(ev.dt_psi) <=
                  1.0001 * c.C1 / fam.R() * fam.phi(t) *
                      std::pow(ev.psi_star, 1.0 / fam.p()));
        }
    }
}

TEST_CASE("key bound closed forms") {
    CHECK(key_upper_bound(1.0, 1.0, 1.0, 1.0, 2.0) ==
          doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));
    CHECK(key_upper_bound(1.0, 1.0, 1.0, 0.0, 2.0) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("key bound against the comparison ODE") {
    for (double delta : {0.5, 1.0, 2.0}) {
        for (double theta : {0.0, 0.5, 1.0}) {
            for (double p : {2.0, 2.5, 3.0}) {
                const auto chk = check_key_lemma_ode(delta, 1.2, 1.5, theta, p);
                CHECK(chk.ok);
                CHECK(chk.blowup_radius ==
                      doctest::Approx(chk.bound).epsilon(0.01));
            }
        }
    }
}
