#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cctsens/cct.hpp"
#include "cctsens/geometry.hpp"
#include "cctsens/sensitivity.hpp"
#include "cctsens/simulator.hpp"

namespace cctsens {

/// Numbers in data files carry 9 significant digits; output is
/// deterministic (fixed ordering, no timestamps).
std::string format_number(double v);

/// Columns: t, x1..xn, y1..ym, then y_post1..y_postm, delta_post when a
/// shadow branch is present.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

/// Variational history aligned with the base trajectory samples.
void write_variational_csv(std::ostream& os, const VariationalHistory& history);

/// Columns: param_name, param_value, t_cct, dcct_dp, method, mechanism,
/// error, pred_prev, pred_next.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Classification report: coordinates, delta, ||kappa||, category,
/// pseudo type, eigenvalue pair.
void write_classification_csv(std::ostream& os,
                              const std::vector<SingularPointClass>& points);

/// Grid of (x1, y) with the stage's g residual, for re-plotting the
/// constraint surface of a 2-state/1-algebraic model.
void write_surface_mesh_csv(std::ostream& os, const DaeModel& model, Stage stage,
                            const ParameterSet& p, double x1_lo, double x1_hi,
                            double y_lo, double y_hi, int nx, int ny);

} // namespace cctsens
