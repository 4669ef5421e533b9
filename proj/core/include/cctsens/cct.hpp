#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cctsens/sensitivity.hpp"
#include "cctsens/simulator.hpp"

namespace cctsens {

enum class Mechanism { FoldAtClearing };
enum class CctMethod { EventDetection, Bisection };

const char* to_string(Mechanism m);
const char* to_string(CctMethod m);

struct CctResult {
    double t_cct = 0.0;
    Mechanism mechanism = Mechanism::FoldAtClearing;
    FoldEvent fold_event;
    CctMethod method = CctMethod::EventDetection;
    /// Set when the +-eps clearing probes around t_cct do not match the
    /// fold-at-clearing phenomenon; the sensitivity formula then does
    /// not apply and the caller should inspect the mechanism.
    bool mechanism_mismatch = false;
    double delta_ref = 0.0;
};

/// CCT by direct fold-event detection on the fault-on shadow branch.
/// Verifies the phenomenon by two clearing probes at t_cct -/+ eps
/// (consistent clearing point below, clearing-into-collapse above).
/// Throws NoFoldError when no event occurs within the horizon.
CctResult find_cct_event(const StagedScenario& scenario, const ParameterSet& p);

/// CCT by bisecting the fault clearing time on the collapse-at-clearing
/// predicate (no consistent post-fault point at clearing). Preconditions:
/// clearing at t_lo is consistent, at t_hi it is not.
CctResult find_cct_bisection(const StagedScenario& scenario, const ParameterSet& p,
                             double t_lo, double t_hi, double tol);

/// All assembled pieces of the CCT sensitivity for one parameter.
struct SensitivityBundle {
    int param_index = -1;
    Vec A1;      ///< SEP sensitivity, n
    Matrix B1;   ///< state transition at clearing, n x n
    Vec B2;      ///< fault-on flow at clearing, n
    Vec B3;      ///< parameter trajectory sensitivity at clearing, n
    Matrix C1;   ///< dg_post/dx at the fold, m x n
    Vec C2;      ///< dg_post/dp_i at the fold, m
    Vec v_star;  ///< unit left null vector of dg_post/dy at the fold
    double dcct_dp = 0.0;
    /// Residual of the determinant first-order condition, evaluated with
    /// the minimal-norm algebraic shift. Diagnostic only.
    double delta_row_residual = 0.0;
};

/// dcct/dp = -v*^T (C2 + C1 (B1 A1 + B3)) / (v*^T C1 B2). Exposed so the
/// scale invariance in v* is directly testable.
double assemble_cct_sensitivity(const Vec& v_star, const Matrix& C1, const Vec& C2,
                                const Matrix& B1, const Vec& A1, const Vec& B2,
                                const Vec& B3);

/// Full pipeline: A1, variational blocks at the fold, C1/C2/v*, and the
/// sensitivity. Throws TransversalityError when |v*^T C1 B2| is below
/// tolerance (fault-on trajectory tangent to the fold).
SensitivityBundle cct_sensitivity(const StagedScenario& scenario, const ParameterSet& p,
                                  int param_index, const CctResult& cct);

struct SweepRow {
    std::string param_name;
    double value = 0.0;
    bool ok = false;
    double t_cct = 0.0;
    double dcct_dp = 0.0;
    CctMethod method = CctMethod::EventDetection;
    std::string mechanism;
    std::string error;                ///< empty on success
    std::optional<double> pred_prev;  ///< tangent prediction of the previous grid value
    std::optional<double> pred_next;  ///< tangent prediction of the next grid value
};

/// One CCT + sensitivity row per parameter value, in input order.
/// Failing values are recorded in the error column, not dropped.
/// Rows are independent; `jobs` > 1 runs them on a worker pool.
std::vector<SweepRow> sweep(const StagedScenario& scenario, int param_index,
                            const std::vector<double>& values, int jobs = 1);

} // namespace cctsens
