#pragma once

#include <optional>
#include <vector>

#include "cctsens/scenario.hpp"

namespace cctsens {

struct TrajectorySample {
    double t;
    Vec x;
    Vec y;
};

/// Post-fault algebraic branch tracked along a fault-on trajectory,
/// aligned index-for-index with the trajectory samples.
struct ShadowSample {
    Vec y_post;
    double delta_post;
};

struct Termination {
    enum class Kind { TimeLimit, FoldHit, AlgebraicFailure, Converged };
    Kind kind = Kind::TimeLimit;
    double t = 0.0;
};

struct Trajectory {
    Stage stage = Stage::PreFault;
    std::vector<TrajectorySample> samples;
    std::vector<ShadowSample> shadow; ///< empty unless shadow tracking was on
    Termination termination;
};

/// Localized intersection of the shadow branch with the post-fault
/// singular surface.
struct FoldEvent {
    double t_fold;
    Vec x_cl;
    Vec y_post_cl;
    double delta_residual; ///< delta_post at the polished event point
    double sigma_min;      ///< smallest singular value of dg_post/dy there
};

struct FaultShadowResult {
    Trajectory trajectory;
    std::optional<FoldEvent> fold;
    double delta_ref = 0.0; ///< delta_post at the pre-fault SEP (tolerance scale)
};

enum class VerdictKind { Stable, FoldHit, Diverged };

struct PostFaultVerdict {
    VerdictKind kind;
    double t; ///< time of the deciding observation (0 = at clearing)
};

/// Fixed-step RK4 on x' = f(x, y(x), p) with y re-solved at every
/// derivative evaluation, warm-started from the previous value.
/// Terminates at t_end, on algebraic failure, or once ||f|| stays below
/// the equilibrium tolerance for the configured hold time.
Trajectory integrate_stage(const DaeModel& model, Stage stage, const Vec& x0,
                           const Vec& y0_guess, const ParameterSet& p, double t_end,
                           double h, const SolverSettings& settings = {});

/// Integrates the fault-on trajectory from the pre-fault SEP while
/// tracking the shadow post-fault branch and its determinant. When the
/// shadow solve fails or |delta_post| reaches the singularity tolerance,
/// the fold is localized over the last step (secant on delta^2, then a
/// Newton polish of {g_post = 0, delta_post = 0} in (t, y)).
FaultShadowResult integrate_fault_with_shadow(const StagedScenario& scenario,
                                              const ParameterSet& p, double t_max,
                                              double h);

/// Clears the fault at state x_cl and classifies the post-fault run:
/// Stable (converges to the post-fault SEP), FoldHit (own delta reaches
/// the singularity tolerance, algebraic solve fails, or no consistent
/// y_post exists at clearing, reported at t = 0), or Diverged.
PostFaultVerdict post_fault_stable(const StagedScenario& scenario, const ParameterSet& p,
                                   const Vec& x_cl, double t_settle);

/// True when clearing at x_cl lands on a consistent post-fault point
/// away from the singular surface, on the algebraic branch connected to
/// the operating point (tracked by continuation in x from the SEP).
/// This is the time-domain-simulation collapse criterion the CCT
/// bisection uses.
bool clearing_consistent(const StagedScenario& scenario, const ParameterSet& p,
                         const Vec& x_cl);

} // namespace cctsens
