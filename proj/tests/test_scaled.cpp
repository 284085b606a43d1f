#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dwlab/damping.hpp"
#include "dwlab/scaled_solver.hpp"

using namespace dwlab;

namespace {

Snapshot gaussian_snapshot(double eps, double h, double L, int N) {
    Snapshot s;
    s.t = 0.0;
    s.h = h;
    s.N = N;
    const size_t M = static_cast<size_t>(std::llround(L / h)) + 1;
    s.u.resize(M);
    s.v.assign(M, 0.0);
    for (size_t i = 0; i < M; ++i) {
        const double r = static_cast<double>(i) * h;
        s.u[i] = eps * std::exp(-r * r);
    }
    return s;
}

}  // namespace

TEST_CASE("gaussian profile and its laplacian") {
    for (int N : {1, 2}) {
        // integral of phi0 over R^N is 1
        double acc = 0.0;
        const double k = 0.01;
        for (double y = 0.0; y <= 30.0; y += k) {
            double w = N == 1 ? 2.0 : 2.0 * M_PI * y;
            if (y == 0.0) w *= 0.5;  // half weight at the endpoint
            acc += w * gaussian_phi0(y, N) * k;
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-4));
        // psi0 = Lap phi0 via finite differences (radial)
        for (double y : {0.5, 1.0, 2.5}) {
            const double d = 1e-5;
            const double lap =
                (gaussian_phi0(y + d, N) - 2.0 * gaussian_phi0(y, N) +
                 gaussian_phi0(y - d, N)) /
                    (d * d) +
                (N - 1) / y *
                    (gaussian_phi0(y + d, N) - gaussian_phi0(y - d, N)) /
                    (2.0 * d);
            CHECK(gaussian_psi0(y, N) == doctest::Approx(lap).epsilon(1e-4));
        }
    }
}

TEST_CASE("frame maps invert each other at t = 0") {
    DampingCalculus calc(DampingSpec::constant(1.0));
    const auto snap = gaussian_snapshot(0.5, 0.05, 20.0, 1);
    const auto scaled = to_scaled(snap, calc, 15.0, 0.05);
    CHECK(scaled.s == doctest::Approx(0.0));
    const auto back = from_scaled(scaled, calc, 0.05, 10.0);
    for (size_t i = 0; i < back.u.size(); ++i) {
        CHECK(std::abs(back.u[i] - snap.u[i]) < 1e-8);
    }
}

TEST_CASE("frame maps carry the correct weights at t > 0") {
    DampingCalculus calc(DampingSpec::constant(2.0));
    auto snap = gaussian_snapshot(1.0, 0.02, 30.0, 1);
    snap.t = 3.0;  // B = t/2 = 1.5, scale = 2.5
    for (size_t i = 0; i < snap.v.size(); ++i) snap.v[i] = 0.3 * snap.u[i];
    const auto scaled = to_scaled(snap, calc, 10.0, 0.05);
    const double scale = 2.5;
    CHECK(scaled.s == doctest::Approx(std::log(scale)).epsilon(1e-12));
    // v(y) = scale^{1/2} u(sqrt(scale) y)
    const size_t mid = scaled.size() / 2;  // y = 0
    CHECK(scaled.v[mid] ==
          doctest::Approx(std::sqrt(scale) * 1.0).epsilon(1e-6));
    // w(y) = b scale^{3/2} u_t
    CHECK(scaled.w[mid] ==
          doctest::Approx(2.0 * std::pow(scale, 1.5) * 0.3).epsilon(1e-6));
    const auto back = from_scaled(scaled, calc, 0.02, 12.0);
    CHECK(back.t == doctest::Approx(3.0).epsilon(1e-9));
    // two cubic resamplings on a k = 0.05 grid, error O(k^4)
    for (size_t i = 0; i < back.u.size(); ++i) {
        CHECK(std::abs(back.u[i] - snap.u[i]) < 5e-5);
        CHECK(std::abs(back.v[i] - snap.v[i]) < 5e-5);
    }
}

TEST_CASE("alpha decomposition is mean free") {
    DampingCalculus calc(DampingSpec::constant(1.0));
    const auto snap = gaussian_snapshot(0.7, 0.05, 25.0, 1);
    auto scaled = to_scaled(snap, calc, 16.0, 0.04);
    for (size_t i = 0; i < scaled.size(); ++i) {
        scaled.w[i] = 0.1 * scaled.v[i];
    }
    const auto dec = decompose_alpha(scaled);
    CHECK(dec.alpha == doctest::Approx(0.7 * std::sqrt(M_PI)).epsilon(1e-6));
    CHECK(std::abs(dec.mean_f) < 1e-10 * std::abs(dec.alpha));
    CHECK(std::abs(dec.mean_g) < 1e-10 * std::abs(dec.alpha));
}

TEST_CASE("pure gaussian mode has vanishing remainder") {
    ScaledState st;
    st.N = 1;
    st.Y = 16.0;
    st.k = 0.04;
    const size_t M = static_cast<size_t>(std::llround(2 * st.Y / st.k)) + 1;
    st.v.resize(M);
    st.w.resize(M);
    for (size_t i = 0; i < M; ++i) {
        const double y = st.y_at(i);
        st.v[i] = 2.0 * gaussian_phi0(y, 1);
        st.w[i] = 0.5 * gaussian_phi0(y, 1) + 2.0 * gaussian_psi0(y, 1);
    }
    const auto dec = decompose_alpha(st);
    CHECK(dec.alpha == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(dec.dalpha_ds == doctest::Approx(0.5).epsilon(1e-9));
    for (size_t i = 0; i < M; ++i) {
        CHECK(std::abs(dec.f[i]) < 1e-9);
        CHECK(std::abs(dec.g[i]) < 1e-9);
    }
}

TEST_CASE("scaled evolution stays finite and tracks the alpha ode") {
    DampingCalculus calc(DampingSpec::constant(1.0));
    // nonlinearity-dominated regime so the ode terms stand well clear
    // of the spatial discretization noise
    const double p = 2.0;
    const auto snap = gaussian_snapshot(0.5, 0.05, 25.0, 1);
    auto st = to_scaled(snap, calc, 12.0, 0.05);
    const double ds = 2.5e-4;
    std::vector<ScaledState> series{st};
    const int n_steps = 2000;  // to s = 0.5
    for (int n = 1; n <= n_steps; ++n) {
        st = step_scaled(st, calc, p, ds);
        if (n % 100 == 0) series.push_back(st);
    }
    const auto reports = compute_energies_1d(series, calc, p);
    for (const auto& r : reports) {
        CHECK(std::isfinite(r.E5));
        CHECK(std::abs(r.mean_f) < 1e-6);
        CHECK(std::abs(r.mean_g) < 1e-6);
    }
    // M is a running sup
    for (size_t i = 1; i < reports.size(); ++i) {
        CHECK(reports[i].M >= reports[i - 1].M);
    }
    const auto residuals = check_alpha_ode(reports, calc, p, 1);
    for (double r : residuals) CHECK(r < 0.15);
}
