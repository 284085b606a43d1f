#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dwlab/experiments.hpp"

using namespace dwlab;

namespace {

LifespanRecord fake_record(double eps, double T, double B) {
    LifespanRecord r;
    r.label = "powerlaw(0.5)";
    r.N = 1;
    r.p = 2.0;
    r.params = "beta=0.5";
    r.eps = eps;
    r.T_num = T;
    r.B_of_T = B;
    r.reason = TerminationReason::Threshold;
    r.peak_norm = 1e6;
    r.steps = 1000;
    return r;
}

}  // namespace

TEST_CASE("damping string parsing") {
    CHECK(parse_damping("constant", "c=2.5").c == 2.5);
    CHECK(parse_damping("powerlaw", "beta=-0.5").beta == -0.5);
    CHECK(parse_damping("powerlaw", "0.25").beta == 0.25);
    CHECK(parse_damping("scaleinv", "mu=3").mu == 3.0);
    CHECK(parse_damping("logtower", "n=2").tower_n == 2);
    CHECK_THROWS(parse_damping("nope", ""));
    CHECK_THROWS(parse_damping("powerlaw", ""));
}

TEST_CASE("records csv roundtrip") {
    std::vector<LifespanRecord> recs{fake_record(1.0, 3.25, 4.5),
                                     fake_record(0.5, 13.0, 18.0)};
    std::stringstream ss;
    write_records_csv(ss, recs);
    const auto back = read_records_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].label == "powerlaw(0.5)");
    CHECK(back[0].eps == 1.0);
    CHECK(back[1].T_num == 13.0);
    CHECK(back[1].B_of_T == 18.0);
    CHECK(back[1].reason == TerminationReason::Threshold);
    CHECK(back[1].steps == 1000);
}

TEST_CASE("power fit recovers an exact slope") {
    SweepPlan plan;
    plan.damping = DampingSpec::power_law(0.5);
    plan.N = 1;
    plan.p = 2.0;
    std::vector<LifespanRecord> recs;
    for (double eps : {1.0, 0.8, 0.6, 0.4}) {
        // T = 3 eps^{-4/3}, B = 2 eps^{-2}
        recs.push_back(fake_record(eps, 3.0 * std::pow(eps, -4.0 / 3.0),
                                   2.0 * std::pow(eps, -2.0)));
    }
    const auto ft = fit_subcritical(recs, plan, false);
    CHECK(ft.slope == doctest::Approx(-4.0 / 3.0).epsilon(1e-10));
    CHECK(ft.predicted_slope == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
    CHECK(ft.relative_error < 1e-9);
    CHECK(ft.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    const auto fb = fit_subcritical(recs, plan, true);
    CHECK(fb.slope == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(fb.predicted_slope == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("critical fit and curvature") {
    SweepPlan plan;
    plan.damping = DampingSpec::constant(1.0);
    plan.N = 1;
    plan.p = 3.0;
    std::vector<LifespanRecord> recs;
    for (double eps : {1.2, 1.0, 0.9, 0.8, 0.7, 0.6}) {
        // log(B+1) = 1.5 eps^{-2} exactly
        const double B = std::expm1(1.5 * std::pow(eps, -2.0));
        recs.push_back(fake_record(eps, B, B));
    }
    const auto ft = fit_critical(recs, plan);
    CHECK(ft.slope == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(ft.r_squared > 0.999);
    CHECK(critical_curvature(recs) > 0.0);

    // a pure power law has no curvature in this diagnostic
    std::vector<LifespanRecord> pow_recs;
    for (double eps : {1.2, 1.0, 0.9, 0.8, 0.7, 0.6}) {
        const double B = 2.0 * std::pow(eps, -2.0);
        pow_recs.push_back(fake_record(eps, B, B));
    }
    CHECK(std::abs(critical_curvature(pow_recs)) < 0.05);
}

TEST_CASE("universality report excludes the scale-invariant family") {
    SweepPlan plan;
    plan.damping = DampingSpec::constant(1.0);
    plan.N = 1;
    plan.p = 2.0;
    auto make_set = [&](const std::string& label, double slope) {
        std::vector<LifespanRecord> recs;
        for (double eps : {1.0, 0.8, 0.6}) {
            auto r = fake_record(eps, 1.0, std::pow(eps, slope));
            r.label = label;
            recs.push_back(r);
        }
        return recs;
    };
    std::vector<std::vector<LifespanRecord>> sets{
        make_set("constant(1)", -2.0), make_set("powerlaw(0.5)", -1.9),
        make_set("scaleinv(2)", -1.0)};
    const auto rep = universality_check(sets, plan);
    CHECK(rep.predicted_slope == doctest::Approx(-2.0));
    REQUIRE(rep.entries.size() == 3);
    CHECK(rep.entries[2].excluded);
    CHECK(rep.ok);
    CHECK(rep.max_rel_dev < 0.15);
}

TEST_CASE("plan file parsing") {
    const std::string path = "test_plan.tmp";
    {
        std::ofstream os(path);
        os << "# comment\n";
        os << "family = powerlaw\n";
        os << "params = beta=0.5\n";
        os << "N = 1\n";
        os << "p = 2\n";
        os << "eps_list = 1.0, 0.8, 0.6\n";
        os << "tmax = 50\n";
        os << "out = sweep.csv\n";
    }
    const auto plan = parse_plan_file(path);
    std::remove(path.c_str());
    CHECK(plan.damping.family == DampingFamily::PowerLaw);
    CHECK(plan.damping.beta == 0.5);
    CHECK(plan.N == 1);
    CHECK(plan.p == 2.0);
    REQUIRE(plan.eps_list.size() == 3);
    CHECK(plan.eps_list[1] == 0.8);
    CHECK(plan.tmax == 50.0);
    CHECK(plan.out == "sweep.csv");
}

TEST_CASE("sweep runs deterministically in descending eps order") {
    SweepPlan plan;
    plan.damping = DampingSpec::constant(1.0);
    plan.N = 1;
    plan.p = 2.0;
    plan.eps_list = {3.0, 2.5, 2.0};
    plan.tmax = 20.0;
    plan.h_max = 0.1;
    plan.grid_divisor = 400;
    const auto recs = run_sweep(plan);
    REQUIRE(recs.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(recs[i].eps == plan.eps_list[i]);
        CHECK(recs[i].reason == TerminationReason::Threshold);
    }
    CHECK(recs[2].T_num > recs[0].T_num);
    const auto again = run_sweep(plan);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(again[i].T_num == recs[i].T_num);
        CHECK(again[i].steps == recs[i].steps);
    }
    CHECK_THROWS(run_sweep([&] {
        auto bad = plan;
        bad.eps_list = {1.0, 2.0};
        return bad;
    }()));
}
