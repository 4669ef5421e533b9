#include <doctest.h>

#include <cmath>

#include "cctsens/cct.hpp"
#include "cctsens/sensitivity.hpp"
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

Vec sep_x_fd(const ParameterSet& p, int idx) {
    // finite difference of the closed-form operating point
    const double h = 1e-6 * std::max(1.0, std::abs(p[idx]));
    ParameterSet pp = p, pm = p;
    pp[idx] += h;
    pm[idx] -= h;
    return {(oracles::sep_angle(pp) - oracles::sep_angle(pm)) / (2 * h), 0.0};
}

} // namespace

TEST_CASE("sep_sensitivity matches the closed-form operating point derivative") {
    const auto sc = base_scenario();
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
    for (const char* name : {"E", "Pm", "Ql", "X"}) {
        const int idx = ParameterSet::index_of(name);
        const Vec a1 = sep_sensitivity(*sc.model, sc.params, idx, sep);
        const Vec ref = sep_x_fd(sc.params, idx);
        CHECK(a1[0] == doctest::Approx(ref[0]).epsilon(1e-6));
        CHECK(std::abs(a1[1]) <= 1e-9);
    }
    // spot values used by the worked example
    const Vec a1_e = sep_sensitivity(*sc.model, sc.params, ParameterSet::index_of("E"), sep);
    CHECK(a1_e[0] == doctest::Approx(-0.674199862).epsilon(1e-6));
    const Vec a1_pm =
        sep_sensitivity(*sc.model, sc.params, ParameterSet::index_of("Pm"), sep);
    CHECK(a1_pm[0] == doctest::Approx(0.633130679).epsilon(1e-6));
}

TEST_CASE("state-transition block matches the closed-form fault-on flow") {
    const auto sc = base_scenario();
    const int idx = ParameterSet::index_of("E");
    const double t_cl = 1.0;
    const VariationalHistory hist =
        integrate_variational(sc, sc.params, idx, t_cl, sc.settings.h);
    const ClearingBlocks blocks = clearing_blocks(hist, t_cl);

    // x1' = x2 + Pm, x2' = Pm - x2 during the fault gives
    // Phi(t) = [[1, 1-e^-t], [0, e^-t]]
    const double e = std::exp(-t_cl);
    CHECK(std::abs(blocks.B1(0, 0) - 1.0) <= 1e-6);
    CHECK(std::abs(blocks.B1(0, 1) - (1.0 - e)) <= 1e-6);
    CHECK(std::abs(blocks.B1(1, 0)) <= 1e-6);
    CHECK(std::abs(blocks.B1(1, 1) - e) <= 1e-6);

    // B2 is the fault-on vector field at the clearing state
    CHECK(blocks.B2[0] == doctest::Approx(oracles::fault_x2(sc.params, t_cl) + sc.params.Pm)
                              .epsilon(1e-6));
    CHECK(blocks.B2[1] ==
          doctest::Approx(sc.params.Pm - oracles::fault_x2(sc.params, t_cl)).epsilon(1e-6));
}

TEST_CASE("B1 and B3 match finite differences of re-simulated trajectories") {
    const auto sc = base_scenario();
    const double t_cl = 1.0;
    const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());

    auto final_x = [&](const Vec& x0, const ParameterSet& p) {
        return integrate_stage(*sc.model, Stage::FaultOn, x0, sep.y_s, p, t_cl,
                               sc.settings.h, sc.settings)
            .samples.back()
            .x;
    };

    for (const char* name : {"E", "Pm", "Dl"}) {
        const int idx = ParameterSet::index_of(name);
        const VariationalHistory hist =
            integrate_variational(sc, sc.params, idx, t_cl, sc.settings.h);
        const ClearingBlocks blocks = clearing_blocks(hist, t_cl);

        // columns of B1 against perturbed launches
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-6;
            Vec xp = sep.x_s, xm = sep.x_s;
            xp[j] += h;
            xm[j] -= h;
            const Vec fp_ = final_x(xp, sc.params), fm = final_x(xm, sc.params);
            for (int i = 0; i < 2; ++i) {
                const double fd = (fp_[i] - fm[i]) / (2 * h);
                CHECK(blocks.B1(i, j) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
            }
        }

        // B3 against a parameter perturbation at fixed launch state
        {
            const double h = 1e-6 * std::max(1.0, std::abs(sc.params[idx]));
            ParameterSet pp = sc.params, pm = sc.params;
            pp[idx] += h;
            pm[idx] -= h;
            const Vec fp_ = final_x(sep.x_s, pp), fm = final_x(sep.x_s, pm);
            for (int i = 0; i < 2; ++i) {
                const double fd = (fp_[i] - fm[i]) / (2 * h);
                CHECK(blocks.B3[i] == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
            }
        }
    }
}

TEST_CASE("post-fault algebraic sensitivity blows up toward the fold and is "
          "withheld inside the exclusion window") {
    const auto sc = base_scenario();
    const int idx = ParameterSet::index_of("E");
    const CctResult cct = find_cct_event(sc, sc.params);
    const double t_fold = cct.fold_event.t_fold;

    // grid with one sample ~1e-9 s before the fold, then two steps past it
    const double t1 = t_fold - 1e-9;
    const double h = t1 / std::ceil(t1 / 1e-3);
    const VariationalHistory hist =
        integrate_variational(sc, sc.params, idx, t1 + 2.0 * h, h);

    REQUIRE(hist.samples.size() >= 3);
    // past the fold there is no post-fault branch: columns withheld
    CHECK_FALSE(hist.samples.back().dypost_dp.has_value());
    CHECK_FALSE(hist.samples.back().dypost_dx0.has_value());

    REQUIRE(hist.samples.front().dypost_dp.has_value());
    const double init_scale = std::abs((*hist.samples.front().dypost_dp)[0]);
    double max_scale = 0.0;
    for (const auto& s : hist.samples)
        if (s.dypost_dp)
            max_scale = std::max(max_scale, std::abs((*s.dypost_dp)[0]));
    CHECK(init_scale > 0.0);
    CHECK(max_scale >= 1e3 * init_scale);
}
