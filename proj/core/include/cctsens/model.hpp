#pragma once

#include <array>
#include <memory>
#include <string>

#include "cctsens/matrix.hpp"

namespace cctsens {

/// Switching stages of a transient stability study. PostFault may share
/// equations with PreFault (fault cleared without topology change).
enum class Stage { PreFault, FaultOn, PostFault };

const char* to_string(Stage s);

/// Named scalar parameters of a scenario. The vector view p[i] and the
/// named fields are the same storage.
struct ParameterSet {
    double X = 0.5;   ///< total reactance (pu)
    double Pm = 0.5;  ///< mechanical power (pu)
    double E = 1.0;   ///< internal emf magnitude (pu)
    double M = 1.0;   ///< inertia constant
    double Dl = 1.0;  ///< load damping (pu)
    double Dg = 1.0;  ///< generator damping (pu)
    double Ql = 0.1;  ///< reactive load (pu)

    static constexpr int count = 7;
    static const std::array<std::string, count>& names();
    /// Index of a named parameter, -1 when unknown.
    static int index_of(const std::string& name);

    double operator[](int i) const;
    double& operator[](int i);

    Vec as_vector() const;

    /// Throws std::invalid_argument unless X > 0, M > 0, E > 0, Ql >= 0
    /// and all fields are finite.
    void validate() const;
};

/// A dynamic/algebraic state pair tagged with its stage.
struct State {
    Vec x;
    Vec y;
    Stage stage = Stage::PreFault;
};

/// Evaluatable staged semi-explicit DAE:
///   x' = f(x, y, p),  0 = g(x, y, p)   per stage.
/// Implementations are immutable after construction and safe to share
/// across threads; every evaluator is a pure function of (x, y, p).
class DaeModel {
public:
    virtual ~DaeModel() = default;

    virtual int n() const = 0;  ///< dynamic dimension
    virtual int m() const = 0;  ///< algebraic dimension
    int np() const { return ParameterSet::count; }

    virtual Vec f(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const = 0;
    virtual Vec g(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const = 0;

    virtual Matrix df_dx(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const = 0;
    virtual Matrix df_dy(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const = 0;
    virtual Matrix dg_dx(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const = 0;
    virtual Matrix dg_dy(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const = 0;
    virtual Vec df_dp(Stage s, const Vec& x, const Vec& y, const ParameterSet& p, int i) const = 0;
    virtual Vec dg_dp(Stage s, const Vec& x, const Vec& y, const ParameterSet& p, int i) const = 0;

    /// Starting guess for the pre-fault SEP solve (high-voltage branch).
    virtual State sep_guess(const ParameterSet& p) const = 0;

    /// det(dg/dy), the singularity monitor.
    double delta(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const;
};

/// Largest relative error between the model's analytic Jacobian blocks
/// and central finite differences of f and g at one point. Test support
/// for the per-model derivative invariant.
double max_jacobian_fd_error(const DaeModel& model, Stage s, const Vec& x, const Vec& y,
                             const ParameterSet& p);

} // namespace cctsens
