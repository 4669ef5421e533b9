#pragma once

#include <memory>

#include "cctsens/model.hpp"

namespace cctsens {

/// Closed-form fold point of the SMIB algebraic constraint, on the
/// upper (positive-voltage) branch.
struct FoldPoint {
    double x1_s; ///< rotor angle at the fold (rad)
    double y_s;  ///< bus voltage at the fold (pu)
};

/// One-machine one-bus model with a solid three-phase bus fault
/// (g_fault(x, y, p) = y) cleared without topology change, so the
/// post-fault constraint equals the pre-fault one.
///
/// Dynamic states: x1 rotor angle deviation (rad), x2 speed deviation
/// (rad/s). Algebraic state: y bus voltage magnitude (pu).
class SmibModel final : public DaeModel {
public:
    explicit SmibModel(const ParameterSet& params);

    int n() const override { return 2; }
    int m() const override { return 1; }

    Vec f(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const override;
    Vec g(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const override;
    Matrix df_dx(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const override;
    Matrix df_dy(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const override;
    Matrix dg_dx(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const override;
    Matrix dg_dy(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const override;
    Vec df_dp(Stage s, const Vec& x, const Vec& y, const ParameterSet& p, int i) const override;
    Vec dg_dp(Stage s, const Vec& x, const Vec& y, const ParameterSet& p, int i) const override;

    State sep_guess(const ParameterSet& p) const override;
};

/// Validates params and builds the SMIB instance.
std::shared_ptr<const DaeModel> smib_model(const ParameterSet& params);

/// Fold point y_s = sqrt(Ql*X), x1_s = arccos(2*y_s/E).
/// Throws NoFoldError when E^2 < 4*Ql*X.
FoldPoint smib_singular_locus(const ParameterSet& params);

} // namespace cctsens
