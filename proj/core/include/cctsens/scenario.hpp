#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include "cctsens/model.hpp"

namespace cctsens {

/// Numerical knobs shared by the whole pipeline. Defaults reproduce the
/// reference experiments.
struct SolverSettings {
    double h = 1e-3;              ///< fixed RK4 step (s)
    double t_max = 20.0;          ///< fault-on horizon when no fold shows up (s)
    double t_settle = 30.0;       ///< post-fault stability horizon (s)
    double algebraic_tol = 1e-10; ///< Newton residual tolerance on g
    double singularity_rtol = 1e-8; ///< |delta| <= rtol * |delta at SEP| counts as singular
    double fold_time_tol = 1e-9;  ///< bracket width before the fold Newton polish
    double fold_probe_eps = 1e-5; ///< offset of the CCT bracketing probes (s)
    double diverge_bound = 3.0 * 3.14159265358979323846; ///< |x1| divergence cutoff
    double equilibrium_tol = 1e-8;  ///< ||f|| level counting as "at equilibrium"
    double equilibrium_hold = 1.0;  ///< model time ||f|| must stay small (s)
};

/// A staged study: one model (all three stages), one parameter set, one
/// group of solver settings. Immutable in practice; cheap to copy with
/// per-row parameter overrides during sweeps.
struct StagedScenario {
    std::shared_ptr<const DaeModel> model;
    ParameterSet params;
    SolverSettings settings;
    /// Overrides the model's built-in SEP starting guess when present.
    std::optional<State> sep_guess_override;

    State sep_guess() const {
        return sep_guess_override ? *sep_guess_override : model->sep_guess(params);
    }
};

/// Absolute singularity threshold: the relative tolerance scaled by
/// |delta| at the pre-fault SEP (delta_ref), keeping the test scale-free.
inline double singularity_tol(const StagedScenario& scenario, double delta_ref) {
    return scenario.settings.singularity_rtol * std::abs(delta_ref);
}

} // namespace cctsens
