#include <doctest.h>

#include <cmath>
#include <random>

#include "cctsens/errors.hpp"
#include "cctsens/smib.hpp"
#include "oracles.hpp"

using namespace cctsens;

TEST_CASE("parameter names round-trip through index_of") {
    for (int i = 0; i < ParameterSet::count; ++i)
        CHECK(ParameterSet::index_of(ParameterSet::names()[i]) == i);
    CHECK(ParameterSet::index_of("nope") == -1);
}

TEST_CASE("parameter validation rejects non-physical values") {
    ParameterSet p;
    CHECK_NOTHROW(p.validate());
    p.X = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.M = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.Ql = std::nan("");
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("smib evaluators match the hand-written equations") {
    ParameterSet p;
    auto model = smib_model(p);
    const Vec x{0.7, 0.2}, y{0.6};
    const double pe = (p.E * y[0] / p.X) * std::sin(x[0]);

    SUBCASE("pre-fault") {
        const Vec fv = model->f(Stage::PreFault, x, y, p);
        CHECK(fv[0] == doctest::Approx(x[1] + (p.Pm - pe) / p.Dl).epsilon(1e-14));
        CHECK(fv[1] == doctest::Approx((p.Pm - pe - p.Dg * x[1]) / p.M).epsilon(1e-14));
        const Vec gv = model->g(Stage::PreFault, x, y, p);
        CHECK(gv[0] == doctest::Approx((p.E * y[0] / p.X) * std::cos(x[0]) -
                                       y[0] * y[0] / p.X - p.Ql)
                           .epsilon(1e-14));
    }
    SUBCASE("fault-on constraint clamps the voltage") {
        const Vec gv = model->g(Stage::FaultOn, x, y, p);
        CHECK(gv[0] == y[0]);
        CHECK(model->delta(Stage::FaultOn, x, y, p) == 1.0);
    }
    SUBCASE("post-fault equals pre-fault") {
        CHECK(model->g(Stage::PostFault, x, y, p)[0] ==
              model->g(Stage::PreFault, x, y, p)[0]);
    }
}

TEST_CASE("analytic jacobians agree with finite differences") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ParameterSet p;
    auto model = smib_model(p);
    for (Stage s : {Stage::PreFault, Stage::FaultOn, Stage::PostFault}) {
        for (int trial = 0; trial < 10; ++trial) {
            const Vec x{u(rng), u(rng)};
            const Vec y{0.4 + 0.4 * std::abs(u(rng))};
            CHECK(max_jacobian_fd_error(*model, s, x, y, p) <= 1e-5);
        }
    }
}

TEST_CASE("fold locus matches the closed form") {
    ParameterSet p;
    const FoldPoint fp = smib_singular_locus(p);
    CHECK(std::abs(fp.y_s - oracles::fold_voltage(p)) <= 1e-9);
    CHECK(std::abs(fp.x1_s - oracles::fold_angle(p)) <= 1e-9);
    CHECK(fp.y_s == doctest::Approx(0.223607).epsilon(1e-5));
    CHECK(fp.x1_s == doctest::Approx(1.107149).epsilon(1e-5));

    // No fold when the load exceeds the deliverable reactive power.
    ParameterSet heavy;
    heavy.Ql = 3.0;
    CHECK_THROWS_AS((void)smib_singular_locus(heavy), NoFoldError);
}

TEST_CASE("parameter derivative vectors match finite differences") {
    ParameterSet p;
    auto model = smib_model(p);
    const Vec x{0.5, -0.3}, y{0.8};
    for (Stage s : {Stage::PreFault, Stage::FaultOn}) {
        for (int i = 0; i < ParameterSet::count; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
            ParameterSet pp = p, pm = p;
            pp[i] += h;
            pm[i] -= h;
            const Vec fp_ = model->f(s, x, y, pp), fm = model->f(s, x, y, pm);
            const Vec gp_ = model->g(s, x, y, pp), gm = model->g(s, x, y, pm);
            const Vec dfp = model->df_dp(s, x, y, p, i);
            const Vec dgp = model->dg_dp(s, x, y, p, i);
            for (int k = 0; k < model->n(); ++k)
                CHECK(dfp[k] == doctest::Approx((fp_[k] - fm[k]) / (2 * h)).epsilon(1e-6).scale(1.0));
            for (int k = 0; k < model->m(); ++k)
                CHECK(dgp[k] == doctest::Approx((gp_[k] - gm[k]) / (2 * h)).epsilon(1e-6).scale(1.0));
        }
    }
}
