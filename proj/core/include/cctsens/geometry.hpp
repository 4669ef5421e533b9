#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "cctsens/model.hpp"

namespace cctsens {

/// Time-rescaled vector field that stays finite on the singular surface:
/// xdot = delta * f, ydot = -adj(dg/dy) * dg/dx * f.
struct TransformedField {
    Vec xdot;
    Vec ydot;
};

TransformedField transformed_field(const DaeModel& model, Stage stage, const Vec& x,
                                   const Vec& y, const ParameterSet& p);

enum class PointCategory { Regular, Singular, SemiSingular, PseudoEP };
enum class PseudoType { Source, Sink, Saddle, Unclassifiable };

const char* to_string(PointCategory c);
const char* to_string(PseudoType t);

struct SingularPointClass {
    Vec x;
    Vec y;
    double delta = 0.0;
    Vec kappa;
    double graze = 0.0; ///< (d delta / dy) . kappa, the tangency monitor
    // A point can satisfy several conditions at once; `category` is the
    // most specific one.
    bool singular = false;
    bool semi_singular = false;
    bool pseudo_ep = false;
    PointCategory category = PointCategory::Regular;
    std::optional<PseudoType> pseudo_type;
    std::vector<std::complex<double>> nonzero_eigs;
};

struct ClassifyOptions {
    double delta_tol = 1e-7;
    double kappa_tol = 1e-7;
    double graze_tol = 1e-7;
    double eig_center_cutoff = 1e-6; ///< modulus below which an eigenvalue is a center direction
};

/// Projects the point onto the constraint surface with one Newton
/// correction, then tests the singular / semi-singular / pseudo-EP
/// conditions. Pseudo-EPs are typed by the two significant eigenvalues
/// of the transformed-field Jacobian (finite differences in the full
/// (x, y) space); a count other than two is reported Unclassifiable.
SingularPointClass classify_singular_point(const DaeModel& model, Stage stage, const Vec& x,
                                           const Vec& y, const ParameterSet& p,
                                           const ClassifyOptions& opts = {});

/// Pseudo-arclength continuation of {g = 0, delta = 0} in (x, y) from a
/// seed within Newton distance of the set. Emits `count` points, each
/// with both residuals <= 1e-9; flipping arc_step's sign traverses the
/// opposite direction. Throws ContinuationStallError after 10
/// consecutive step rejections.
std::vector<State> trace_singular_set(const DaeModel& model, Stage stage,
                                      const ParameterSet& p, const State& seed,
                                      double arc_step, int count);

} // namespace cctsens
