#include <doctest.h>

#include <cmath>

#include "cctsens/errors.hpp"
#include "cctsens/sensitivity.hpp"
#include "cctsens/simulator.hpp"
#include "cctsens/smib.hpp"
#include "oracles.hpp"

using namespace cctsens;

namespace {

StagedScenario base_scenario() {
    StagedScenario sc;
    sc.params = ParameterSet{};
    sc.model = smib_model(sc.params);
    return sc;
}

} // namespace

TEST_CASE("find_sep lands on the closed-form operating point") {
    const auto sc = base_scenario();
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
    CHECK(std::abs(sep.x_s[0] - oracles::sep_angle(sc.params)) <= 1e-10);
    CHECK(std::abs(sep.x_s[1]) <= 1e-10);
    CHECK(std::abs(sep.y_s[0] - oracles::sep_voltage(sc.params)) <= 1e-10);
    // the figures' working values
    CHECK(sep.x_s[0] == doctest::Approx(0.2796).epsilon(1e-3));
    CHECK(sep.y_s[0] == doctest::Approx(0.905986).epsilon(1e-5));
    CHECK(sep.residual <= 1e-10);
}

TEST_CASE("pre-fault integration from the SEP stays put") {
    const auto sc = base_scenario();
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
    const Trajectory tr = integrate_stage(*sc.model, Stage::PreFault, sep.x_s, sep.y_s,
                                          sc.params, 5.0, sc.settings.h, sc.settings);
    for (const auto& s : tr.samples) {
        CHECK(std::abs(s.x[0] - sep.x_s[0]) <= 1e-9);
        CHECK(std::abs(s.x[1]) <= 1e-9);
    }
    CHECK(tr.termination.kind == Termination::Kind::Converged);
}

TEST_CASE("fault-on trajectory matches the linear closed form") {
    const auto sc = base_scenario();
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
    const Trajectory tr = integrate_stage(*sc.model, Stage::FaultOn, sep.x_s, sep.y_s,
                                          sc.params, 1.0, sc.settings.h, sc.settings);
    const auto& last = tr.samples.back();
    CHECK(last.t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(last.x[0] - oracles::fault_x1(sc.params, 1.0)) <= 1e-9);
    CHECK(std::abs(last.x[1] - oracles::fault_x2(sc.params, 1.0)) <= 1e-9);
    CHECK(std::abs(last.y[0]) <= 1e-12); // voltage clamped by the fault
}

TEST_CASE("shadow integration detects and polishes the fold event") {
    const auto sc = base_scenario();
    const FaultShadowResult res =
        integrate_fault_with_shadow(sc, sc.params, sc.settings.t_max, sc.settings.h);
    REQUIRE(res.fold.has_value());
    const FoldEvent& ev = *res.fold;

    CHECK(std::abs(ev.t_fold - oracles::cct_closed_form(sc.params)) <= 1e-6);
    CHECK(std::abs(ev.x_cl[0] - oracles::fold_angle(sc.params)) <= 1e-8);
    CHECK(std::abs(ev.y_post_cl[0] - oracles::fold_voltage(sc.params)) <= 1e-8);
    CHECK(std::abs(ev.delta_residual) <= 1e-10);
    CHECK(ev.sigma_min <= 1e-10);

    // delta_ref is the determinant at the SEP, the tolerance scale
    CHECK(res.delta_ref == doctest::Approx(-1.70159419).epsilon(1e-6));

    // shadow samples align with the trajectory and shrink monotonically
    // in |delta| over the last stretch
    REQUIRE(res.trajectory.shadow.size() == res.trajectory.samples.size());
    const auto& sh = res.trajectory.shadow;
    for (std::size_t i = sh.size() - 50; i + 1 < sh.size(); ++i)
        CHECK(std::abs(sh[i + 1].delta_post) < std::abs(sh[i].delta_post));
}

TEST_CASE("clearing consistency flips exactly once along the fault-on run") {
    const auto sc = base_scenario();
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
    const double t_c = oracles::cct_closed_form(sc.params);

    auto x_at = [&](double t) {
        return integrate_stage(*sc.model, Stage::FaultOn, sep.x_s, sep.y_s, sc.params, t,
                               sc.settings.h, sc.settings)
            .samples.back()
            .x;
    };
    CHECK(clearing_consistent(sc, sc.params, sep.x_s));
    CHECK(clearing_consistent(sc, sc.params, x_at(t_c - 0.01)));
    CHECK_FALSE(clearing_consistent(sc, sc.params, x_at(t_c + 0.01)));
    // the non-operating root family past pi/2 must not re-enable it
    CHECK_FALSE(clearing_consistent(sc, sc.params, x_at(3.0)));
}

TEST_CASE("post-fault verdicts around the critical clearing time") {
    const auto sc = base_scenario();
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
    const double t_c = oracles::cct_closed_form(sc.params);
    auto x_at = [&](double t) {
        return integrate_stage(*sc.model, Stage::FaultOn, sep.x_s, sep.y_s, sc.params, t,
                               sc.settings.h, sc.settings)
            .samples.back()
            .x;
    };
    SUBCASE("clearing well before the fold settles back to the SEP") {
        const PostFaultVerdict v = post_fault_stable(sc, sc.params, x_at(0.3), 30.0);
        CHECK(v.kind == VerdictKind::Stable);
    }
    SUBCASE("clearing after the fold collapses at the clearing instant") {
        const PostFaultVerdict v = post_fault_stable(sc, sc.params, x_at(t_c + 0.02), 30.0);
        CHECK(v.kind == VerdictKind::FoldHit);
        CHECK(v.t == 0.0);
    }
}

TEST_CASE("no fold event when there is no mechanical drive") {
    auto sc = base_scenario();
    sc.params.Pm = 0.0;
    sc.model = smib_model(sc.params);
    sc.settings.t_max = 5.0;
    const FaultShadowResult res =
        integrate_fault_with_shadow(sc, sc.params, sc.settings.t_max, sc.settings.h);
    CHECK_FALSE(res.fold.has_value());
}
