#include <doctest.h>

#include <cmath>
#include <random>

#include "cctsens/errors.hpp"
#include "cctsens/geometry.hpp"
#include "cctsens/sensitivity.hpp"
#include "cctsens/smib.hpp"
#include "oracles.hpp"

using namespace cctsens;

TEST_CASE("transformed field is the delta-rescaled constrained flow") {
    ParameterSet p;
    auto model = smib_model(p);
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.3, 1.2);

    int checked = 0;
    while (checked < 100) {
        const Vec x{ux(rng), ux(rng)};
        const Vec y{uy(rng)};
        const double delta = model->delta(Stage::PostFault, x, y, p);
        if (std::abs(delta) < 0.05) continue; // stay off the singular surface
        ++checked;

        const TransformedField tf = transformed_field(*model, Stage::PostFault, x, y, p);
        const Vec fv = model->f(Stage::PostFault, x, y, p);
        // xdot = delta * f
        for (int i = 0; i < 2; ++i)
            CHECK(tf.xdot[i] == doctest::Approx(delta * fv[i]).epsilon(1e-8).scale(1.0));
        // ydot = delta * (implicit-function ydot)
        const Vec ydot_impl = lu_solve(model->dg_dy(Stage::PostFault, x, y, p),
                                       (-1.0) * (model->dg_dx(Stage::PostFault, x, y, p) * fv));
        CHECK(tf.ydot[0] ==
              doctest::Approx(delta * ydot_impl[0]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("classification at the reference points") {
    ParameterSet p;
    auto model = smib_model(p);
    const FoldPoint fp = smib_singular_locus(p);

    SUBCASE("operating point is regular") {
        const auto c = classify_singular_point(*model, Stage::PostFault,
                                               {oracles::sep_angle(p), 0.0},
                                               {oracles::sep_voltage(p)}, p);
        CHECK(c.category == PointCategory::Regular);
        CHECK_FALSE(c.singular);
    }

    SUBCASE("generic fold-line point is singular but not a pseudo-equilibrium") {
        const auto c =
            classify_singular_point(*model, Stage::PostFault, {fp.x1_s, 0.5}, {fp.y_s}, p);
        CHECK(c.category == PointCategory::Singular);
        CHECK(c.singular);
        CHECK_FALSE(c.pseudo_ep);
        CHECK(std::abs(c.delta) <= 1e-7);
    }

    SUBCASE("pseudo-equilibrium where the rescaled flow vanishes") {
        // f1 = x2 + (Pm - Pe)/Dl = 0 on the fold line fixes x2
        const double pe = (p.E * fp.y_s / p.X) * std::sin(fp.x1_s);
        const double x2_star = -(p.Pm - pe) / p.Dl;
        CHECK(x2_star == doctest::Approx(-0.1).epsilon(1e-9));

        const auto c = classify_singular_point(*model, Stage::PostFault,
                                               {fp.x1_s, x2_star}, {fp.y_s}, p);
        CHECK(c.category == PointCategory::PseudoEP);
        REQUIRE(c.pseudo_type.has_value());
        CHECK(*c.pseudo_type == PseudoType::Sink);
        REQUIRE(c.nonzero_eigs.size() == 2);
        for (const auto& ev : c.nonzero_eigs) {
            CHECK(ev.real() == doctest::Approx(-0.357770876).epsilon(1e-5));
            CHECK(std::abs(ev.imag()) == doctest::Approx(0.438178046).epsilon(1e-5));
        }
    }
}

TEST_CASE("traced singular set is the x2 line through the fold") {
    ParameterSet p;
    auto model = smib_model(p);
    const FoldPoint fp = smib_singular_locus(p);
    const State seed{{fp.x1_s, 0.0}, {fp.y_s}, Stage::PostFault};

    const auto pts = trace_singular_set(*model, Stage::PostFault, p, seed, 0.1, 20);
    REQUIRE((int)pts.size() == 20);
    double prev_x2 = pts.front().x[1];
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::abs(pts[i].x[0] - fp.x1_s) <= 1e-9);
        CHECK(std::abs(pts[i].y[0] - fp.y_s) <= 1e-9);
        CHECK(std::abs(model->g(Stage::PostFault, pts[i].x, pts[i].y, p)[0]) <= 1e-9);
        CHECK(std::abs(model->delta(Stage::PostFault, pts[i].x, pts[i].y, p)) <= 1e-9);
        if (i > 0) {
            CHECK(pts[i].x[1] != prev_x2); // moving along the line
            prev_x2 = pts[i].x[1];
        }
    }

    // reversing the arc step walks the other way
    const auto rev = trace_singular_set(*model, Stage::PostFault, p, seed, -0.1, 3);
    CHECK((rev[1].x[1] - rev[0].x[1]) * (pts[1].x[1] - pts[0].x[1]) < 0.0);
}

TEST_CASE("trace rejects a seed when no singular set exists") {
    ParameterSet p;
    p.Ql = 3.0; // load beyond the deliverable maximum: g = 0 and delta = 0 never meet
    auto model = smib_model(p);
    const State bad{{0.0, 0.0}, {1.0}, Stage::PostFault};
    CHECK_THROWS_AS(
        (void)trace_singular_set(*model, Stage::PostFault, p, bad, 0.1, 5),
        NumericError);
}
