#pragma once

#include <memory>
#include <optional>
#include <string>

#include "radialns/scaling_ode.hpp"

namespace rns {

// =============================================================================
// Closed-form (rho, u) solution families in radial symmetry
//
// Every family has the self-similar shape
//
//   rho(t, r) = F(y(r / a(t))) / a(t)^N,     u(t, r) = (a'(t) / a(t)) r,
//
// with F = exp for the isothermal and theta = 1 variants and F = identity
// (clipped at zero) for the theta != 1 variant, and a profile y(x) specific
// to each variant:
//
//   IsothermalNS          y = lambda/(2K) x^2 + alpha            a: Classic
//   IsothermalDamped      same profile                           a: Damped
//   SolidCore2D           y = lambda/(2K) x^2 + M0 ln x + alpha  a: Damped, N=2,
//                         defined for r > r0 only
//   PressurelessTheta1    y = lambda/(2 N kappa) x^2 + alpha     a: PressurelessTheta1
//   PressurelessThetaNe1  y = [ (theta-1)/2 * (-lambda/(N kappa theta)) x^2
//                               + alpha^(theta-1) ]^(1/(theta-1)),
//                         real positive branch, defined where the radicand
//                         is nonnegative                         a: GeneralDamped,
//                                                                S = N theta - N + 2
// =============================================================================

enum class FamilyVariant {
    IsothermalNS,
    IsothermalDamped,
    SolidCore2D,
    PressurelessTheta1,
    PressurelessThetaNe1,
};

struct FamilyParams {
    FamilyVariant variant = FamilyVariant::IsothermalNS;
    int dim_n = 3;             // N >= 1 (2 for SolidCore2D)
    double pressure_k = 1.0;   // K > 0, isothermal-class variants
    double kappa = 1.0;        // kappa > 0, pressureless variants
    double theta = 1.0;        // viscosity exponent, pressureless variants
    double lambda = 0.0;
    double alpha = 0.0;        // profile constant
    double beta = 0.0;         // frictional damping, >= 0
    double nu = 0.0;           // constant viscosity; absent from the formulas,
                               // carried so residual checks can confirm the
                               // viscous terms vanish for u linear in r
    double core_mass = 0.0;    // M0 > 0, SolidCore2D only
    double core_radius = 0.0;  // r0 > 0, SolidCore2D only
    double a0 = 1.0;
    double a1 = 0.0;
};

struct FieldSample {
    double t = 0.0;
    double r = 0.0;
    double rho = 0.0;
    double u = 0.0;
    bool in_support = true;  // false exactly in the theta != 1 cutoff region
};

/// A family bound to the integrated trajectory of its scale-factor ODE.
/// Immutable after construction; evaluation is pure and thread-safe.
class SolutionFamily {
public:
    /// Validates the parameters, builds the matching ScalingOde, and
    /// integrates it up to t_end.  The fields are defined on [0, t_reach) of
    /// the resulting trajectory, which ends early when the scale factor
    /// vanishes (blowup) or when the integration cannot continue (for some
    /// parameters the scale factor itself explodes in finite time).
    static SolutionFamily create(const FamilyParams& params, double t_end = 10.0,
                                 double rel_tol = 1e-10, double abs_tol = 1e-12);

    const FamilyParams& params() const { return params_; }
    const ScalingOde& ode() const { return ode_; }
    const Trajectory& trajectory() const { return *trajectory_; }

    /// Profile value y(x); std::nullopt outside the support of the
    /// theta != 1 variant (negative radicand).  Throws DomainError for
    /// x < 0, and for x <= 0 with SolidCore2D.
    std::optional<double> profile_y(double x) const;

    /// Coefficient of x^2 in the profile (in the radicand for theta != 1).
    double profile_quadratic_coeff() const;

    /// For the theta != 1 variant with compact support: the boundary x
    /// where the radicand reaches zero.
    std::optional<double> support_boundary_x() const;

    /// (rho, u) at (t, r) using the trajectory's dense output.  Throws
    /// DomainError for t at/after a detected vanish ("after blowup"),
    /// beyond the integrated horizon, or for r outside the domain.
    FieldSample eval_fields(double t, double r) const;

    /// Checks |u(t, c r) - c u(t, r)| <= 1e-12 (1 + |u(t, r)|).
    bool velocity_is_linear_check(double t, double r, double c) const;

    /// Scale factor state at t; same domain rules as eval_fields.
    TrajectorySample state_at(double t) const;

    /// Largest t accepted by eval_fields (strictly before any vanish).
    double t_domain_end() const { return trajectory_->t_reach(); }

private:
    SolutionFamily(FamilyParams params, ScalingOde ode, Trajectory trajectory);

    FamilyParams params_;
    ScalingOde ode_;
    std::shared_ptr<const Trajectory> trajectory_;
};

/// Throws DomainError when the parameters violate the variant's constraints.
void validate(const FamilyParams& params);

/// The ScalingOde a given parameter set binds to.
ScalingOde ode_for(const FamilyParams& params);

const char* variant_name(FamilyVariant variant);

}  // namespace rns
