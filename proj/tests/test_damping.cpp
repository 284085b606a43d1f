#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dwlab/damping.hpp"
#include "dwlab/quadrature.hpp"

using namespace dwlab;

namespace {

std::vector<DampingSpec> builtin_specs() {
    return {DampingSpec::constant(1.0), DampingSpec::power_law(0.5),
            DampingSpec::scale_invariant(2.0), DampingSpec::log_tower(1),
            DampingSpec::log_tower(2)};
}

}  // namespace

TEST_CASE("coefficient closed forms") {
    DampingCalculus pw(DampingSpec::power_law(0.5));
    CHECK(pw.b(3.0) == doctest::Approx(std::pow(4.0, -0.5)).epsilon(1e-14));
    DampingCalculus si(DampingSpec::scale_invariant(2.0));
    CHECK(si.b(4.0) == doctest::Approx(0.4).epsilon(1e-14));
    DampingCalculus lt2(DampingSpec::log_tower(2));
    const double t = 2.0;
    CHECK(lt2.b(t) ==
          doctest::Approx((1.0 + t) * (1.0 + std::log(1.0 + t)))
              .epsilon(1e-14));
}

TEST_CASE("b_prime matches a finite difference") {
    for (const auto& spec : builtin_specs()) {
        DampingCalculus calc(spec);
        for (double t : {0.0, 0.5, 3.0, 50.0}) {
            const double d = 1e-6 * (1.0 + t);
            const double lo = t >= d ? t - d : 0.0;
            const double fd = (calc.b(t + d) - calc.b(lo)) / (t + d - lo);
            CHECK(calc.eval_coefficient(t).b_prime ==
                  doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("B closed form matches independent quadrature") {
    for (const auto& spec : builtin_specs()) {
        DampingCalculus calc(spec);
        for (double t : {0.7, 5.0, 42.0}) {
            const double ref = integrate_adaptive(
                [&](double s) { return 1.0 / calc.b(s); }, 0.0, t, 1e-12);
            CHECK(calc.eval_B(t) == doctest::Approx(ref).epsilon(1e-9));
        }
    }
}

TEST_CASE("int_b closed form matches independent quadrature") {
    for (const auto& spec : builtin_specs()) {
        DampingCalculus calc(spec);
        const double ref = integrate_adaptive(
            [&](double s) { return calc.b(s); }, 0.3, 7.0, 1e-12);
        CHECK(calc.int_b(0.3, 7.0) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("log tower B equals the tower closed form") {
    for (int n = 1; n <= 3; ++n) {
        DampingCalculus calc(DampingSpec::log_tower(n));
        for (double t : {0.1, 1.0, 10.0, 200.0}) {
            double ell = 1.0 + t;
            for (int k = 1; k <= n; ++k) ell = 1.0 + std::log(ell);
            CHECK(std::abs(calc.eval_B(t) - (ell - 1.0)) < 1e-8);
        }
    }
}

TEST_CASE("B inversion roundtrip") {
    for (const auto& spec : builtin_specs()) {
        DampingCalculus calc(spec);
        // stay within the family's representable range of B
        const double s_max = 0.9 * calc.eval_B(1e10);
        for (double frac : {1e-6, 1e-3, 0.01, 0.3, 1.0}) {
            const double s = frac * s_max;
            const double t = calc.invert_B(s);
            CHECK(std::abs(calc.eval_B(t) - s) <= 1e-8 * (1.0 + s));
        }
    }
}

TEST_CASE("B inversion overflow guard") {
    DampingCalculus lt(DampingSpec::log_tower(1));
    // B = log(1+t), so s = 800 needs t ~ e^800
    CHECK(!lt.try_invert_B(800.0).has_value());
    CHECK_THROWS_AS(lt.invert_B(800.0), BInversionError);
}

TEST_CASE("B0 golden values") {
    DampingCalculus c1(DampingSpec::constant(1.0));
    CHECK(std::abs(c1.eval_B0() - 1.0) < 1e-12);
    // for b = 1 + t the integral has a Gaussian-tail closed form:
    // exp(1/2) sqrt(2 pi) (1 - Phi_gauss(1))
    const double ref = std::exp(0.5) * std::sqrt(2.0 * M_PI) * 0.5 *
                       std::erfc(1.0 / std::sqrt(2.0));
    DampingCalculus lt(DampingSpec::log_tower(1));
    CHECK(std::abs(lt.eval_B0() - ref) < 1e-4);
    CHECK(lt.eval_B0() == doctest::Approx(0.6557).epsilon(2e-4));
}

TEST_CASE("B0 diverges when the derivative condition fails") {
    DampingCalculus si(DampingSpec::scale_invariant(0.5));
    CHECK_THROWS(si.eval_B0());
}

TEST_CASE("Phi solves the conjugate ODE and matches quadrature") {
    for (const auto& spec : builtin_specs()) {
        DampingCalculus calc(spec);
        for (double t : {0.0, 1.0, 20.0}) {
            const auto ph = calc.eval_Phi(t);
            // the reported derivative is b Phi - 1 by construction
            CHECK(std::abs(ph.phi_prime - (calc.b(t) * ph.phi - 1.0)) <
                  1e-14);
            // independent check: finite difference of Phi itself
            const double d = 1e-4 * (1.0 + t);
            const double fd =
                (calc.eval_Phi(t + d).phi - calc.eval_Phi(t).phi) / d;
            const double mid = ph.phi_prime +
                               0.5 * d * 0.0;  // forward difference, O(d)
            CHECK(fd == doctest::Approx(mid).epsilon(5e-3));
        }
    }
}

TEST_CASE("assumption report flags the family regimes") {
    DampingCalculus pw(DampingSpec::power_law(0.5));
    auto rep = pw.check_assumptions(1e4);
    CHECK(rep.b_positive);
    CHECK(rep.b0_ok);
    CHECK(rep.not_overdamping);
    CHECK(rep.gamma_estimate.has_value());

    DampingCalculus weak(DampingSpec::scale_invariant(0.5));
    auto rep2 = weak.check_assumptions(1e4);
    CHECK(rep2.b0_analytic == doctest::Approx(2.0));
    CHECK(!rep2.b0_ok);

    DampingCalculus over(DampingSpec::power_law(-2.0));
    auto rep3 = over.check_assumptions(1e4);
    CHECK(!rep3.not_overdamping);
}

TEST_CASE("predicted lifespan scaling and overflow") {
    DampingCalculus c1(DampingSpec::constant(1.0));
    // subcritical N=1, p=2: B(T) = C eps^{-2} and B = t here
    const auto pr = c1.predicted_lifespan(2.0, 1, 0.1, 3.0);
    CHECK(!pr.overflow);
    CHECK(pr.t == doctest::Approx(300.0).epsilon(1e-9));

    DampingCalculus lt(DampingSpec::log_tower(1));
    const auto big = lt.predicted_lifespan(2.0, 1, 1e-4, 1.0);
    CHECK(big.overflow);
}
