#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "radialns/errors.hpp"

namespace rns {

// =============================================================================
// Scale-factor ODEs
//
// Four second-order ODEs govern the scale factor a(t) of the self-similar
// density/velocity families:
//
//   Classic              a'' = -lambda / a
//   Damped               a'' + beta a' = -lambda / a
//   PressurelessTheta1   a'' =  lambda a' / a^2
//   GeneralDamped        a'' + beta a' = -lambda a' / a^S
//
// All are integrated as first-order systems in (a, a') with an embedded
// Dormand-Prince 5(4) pair, dense output, and detection of finite-time
// vanishing a(T) -> 0.
// =============================================================================

enum class OdeKind {
    Classic,
    Damped,
    PressurelessTheta1,
    GeneralDamped,
};

struct ScalingOde {
    OdeKind kind = OdeKind::Classic;
    double lambda = 0.0;
    double beta = 0.0;        // damping coefficient (Damped, GeneralDamped)
    double s_exponent = 2.0;  // power of a in the GeneralDamped right-hand side
    double a0 = 1.0;          // a(0) > 0
    double a1 = 0.0;          // a'(0)
};

ScalingOde classic_ode(double lambda, double a0, double a1);
ScalingOde damped_ode(double lambda, double beta, double a0, double a1);
ScalingOde pressureless_theta1_ode(double lambda, double a0, double a1);
ScalingOde general_damped_ode(double lambda, double beta, double s_exponent,
                              double a0, double a1);

/// Throws DomainError if the parameters violate the kind's constraints.
void validate(const ScalingOde& ode);

/// Right-hand side a'' as a function of the current state.
double acceleration(const ScalingOde& ode, double a, double adot);

/// True when the right-hand side stays finite down to a <= 0, so the
/// integration can cross a = 0 and the zero itself can be bracketed.
/// Otherwise vanishing is declared at the threshold vanish_threshold().
bool finite_at_vanish(const ScalingOde& ode);

/// Level at which the trajectory is declared vanished: 0 when the
/// right-hand side is regular there, else 1e-8 * a0.  The threshold
/// crossing is a slightly early, lower-biased stand-in for the true
/// vanishing time; see BlowupReport.
double vanish_threshold(const ScalingOde& ode);

/// Conserved energy (1/2) a'^2 + lambda ln(a) of the Classic kind.
/// Along exact trajectories equals lambda ln(a0) + (1/2) a1^2.
double energy_integral(const ScalingOde& ode, double a, double adot);

/// Conserved quantity a' + lambda / a of the PressurelessTheta1 kind,
/// equal to a1 + lambda / a0 along exact trajectories.
double pressureless_first_integral(const ScalingOde& ode, double a, double adot);

// =============================================================================
// Trajectories
// =============================================================================

struct TrajectorySample {
    double t = 0.0;
    double a = 0.0;
    double adot = 0.0;
};

enum class TrajectoryStatus {
    ReachedTEnd,     // integrated to the requested horizon
    VanishDetected,  // a crossed the vanish threshold at a bracketed time
    StepFailure,     // step size underflowed before either of the above
};

/// Accepted integration steps plus the continuous (dense-output) extension.
/// Immutable after construction; safe to share between threads.
class Trajectory {
public:
    TrajectoryStatus status() const { return status_; }
    const std::vector<TrajectorySample>& samples() const { return samples_; }

    /// Largest time at() accepts.  For vanished trajectories this is the
    /// lower edge of the vanish bracket.
    double t_reach() const { return t_reach_; }

    bool vanished() const { return status_ == TrajectoryStatus::VanishDetected; }
    double vanish_t_lower() const;
    double vanish_t_upper() const;
    double vanish_level() const { return vanish_level_; }

    /// State at any t in [0, t_reach()] from the dense output of the
    /// accepted steps.  Throws DomainError outside that range (in
    /// particular at or after a detected vanish).
    TrajectorySample at(double t) const;

    const std::string& diagnostic() const { return diagnostic_; }

private:
    friend Trajectory integrate(const ScalingOde&, double, double, double);

    // Dense-output coefficients of one accepted step, one entry per state
    // component (a, a').  Evaluation uses the standard quartic interpolant
    // of the Dormand-Prince pair.
    struct DenseStep {
        double t0 = 0.0;
        double h = 0.0;
        std::array<double, 2> c1{}, c2{}, c3{}, c4{}, c5{};
    };

    std::array<double, 2> eval_dense(const DenseStep& s, double theta) const;

    std::vector<TrajectorySample> samples_;
    std::vector<DenseStep> steps_;
    TrajectoryStatus status_ = TrajectoryStatus::ReachedTEnd;
    double t_reach_ = 0.0;
    double vanish_lo_ = 0.0;
    double vanish_hi_ = 0.0;
    double vanish_level_ = 0.0;
    std::string diagnostic_;
};

/// Adaptive integration of the ODE up to t_end, stopping early when a
/// crosses the vanish threshold.  Tolerances must lie in (0, 1).
Trajectory integrate(const ScalingOde& ode, double t_end,
                     double rel_tol = 1e-10, double abs_tol = 1e-12);

// =============================================================================
// Blowup detection
// =============================================================================

enum class BlowupStatus {
    FiniteTimeVanish,
    GlobalExistenceWitnessed,  // numerical witness up to time_cap only
    Undetermined,
};

struct BlowupReport {
    BlowupStatus status = BlowupStatus::Undetermined;
    double t_lower = 0.0;  // bracket of the threshold crossing
    double t_upper = 0.0;
    /// e^{theta/lambda} with theta = lambda ln(a0) + a1^2/2; an a-priori
    /// bound on a(t).  Present only for the Classic kind with lambda > 0.
    std::optional<double> bound_e_theta_lambda;
    std::string diagnostic;
};

/// Integrates up to time_cap and brackets the first crossing of the vanish
/// threshold to width <= tol.  Reports GlobalExistenceWitnessed when the cap
/// is reached with a bounded away from the threshold and a' >= 0 there;
/// Undetermined otherwise (including on step failure).
BlowupReport detect_blowup(const ScalingOde& ode, double time_cap, double tol);

}  // namespace rns
