#pragma once

#include <optional>
#include <vector>

#include "cctsens/scenario.hpp"
#include "cctsens/simulator.hpp"

namespace cctsens {

struct SepSolution {
    Vec x_s;
    Vec y_s;
    double residual;
};

/// Damped Newton on the stacked system [f; g] = 0. Converges to the
/// equilibrium in the guess's basin; branch identity (high vs low
/// voltage) is the caller's responsibility. Rejects solutions whose
/// dg/dy is within singularity tolerance of the fold.
SepSolution find_sep(const DaeModel& model, Stage stage, const ParameterSet& p,
                     const State& guess, double tol = 1e-10);

/// SEP parameter sensitivity A1 = dx_sep/dp_i via the reduced-Jacobian
/// formula, evaluated by two linear solves.
Vec sep_sensitivity(const DaeModel& model, const ParameterSet& p, int param_index,
                    const SepSolution& sep, Stage stage = Stage::PreFault);

/// One record of the fault-on variational system. dypost_* columns are
/// absent inside the fold-exclusion window, where the algebraic
/// sensitivity on the post-fault surface grows without bound.
struct VariationalSample {
    double t;
    Matrix dx_dx0;      ///< n x n state-transition block
    Vec dx_dp;          ///< n, sensitivity to the chosen parameter
    Matrix dyfault_dx0; ///< m x n
    Vec dyfault_dp;     ///< m
    std::optional<Matrix> dypost_dx0;
    std::optional<Vec> dypost_dp;
};

struct VariationalHistory {
    int param_index = -1;
    double valid_to = 0.0;
    std::vector<VariationalSample> samples;
    std::vector<TrajectorySample> base; ///< co-integrated base trajectory
    double delta_ref = 0.0;
    // Context needed to re-step onto an off-grid clearing time.
    std::shared_ptr<const DaeModel> model;
    ParameterSet params;
    SolverSettings settings;
};

/// Integrates the fault-on variational equations for initial-condition
/// columns (identity start) and the parameter column (zero start) on the
/// same RK4 grid as the co-integrated base trajectory, landing exactly
/// on t_end. `x_start` overrides the pre-fault SEP as the launch state.
VariationalHistory integrate_variational(const StagedScenario& scenario,
                                         const ParameterSet& p, int param_index,
                                         double t_end, double h,
                                         const std::optional<Vec>& x_start = {});

struct ClearingBlocks {
    Matrix B1; ///< dx/dx0 at the clearing time
    Vec B2;    ///< fault-on f at the clearing state
    Vec B3;    ///< dx/dp at the clearing time
};

/// Evaluates B1, B2, B3 at t_cl (re-stepping from the nearest earlier
/// grid sample when t_cl is off-grid). Throws if t_cl is outside the
/// integrated horizon.
ClearingBlocks clearing_blocks(const VariationalHistory& history, double t_cl);

} // namespace cctsens
