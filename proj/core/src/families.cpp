#include "radialns/families.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace rns {

const char* variant_name(FamilyVariant variant) {
    switch (variant) {
        case FamilyVariant::IsothermalNS: return "isothermal";
        case FamilyVariant::IsothermalDamped: return "damped";
        case FamilyVariant::SolidCore2D: return "solid_core";
        case FamilyVariant::PressurelessTheta1: return "pressureless_theta1";
        case FamilyVariant::PressurelessThetaNe1: return "pressureless";
    }
    return "?";
}

namespace {

bool isothermal_class(FamilyVariant v) {
    return v == FamilyVariant::IsothermalNS ||
           v == FamilyVariant::IsothermalDamped ||
           v == FamilyVariant::SolidCore2D;
}

[[noreturn]] void fail(const FamilyParams& p, const std::string& what) {
    std::ostringstream os;
    os << "SolutionFamily(" << variant_name(p.variant) << "): " << what;
    throw DomainError(os.str());
}

}  // namespace

void validate(const FamilyParams& p) {
    if (p.dim_n < 1) fail(p, "dim_n must be >= 1");
    if (!(p.a0 > 0.0)) fail(p, "a0 must be positive");
    if (!std::isfinite(p.lambda) || !std::isfinite(p.alpha) ||
        !std::isfinite(p.a1)) {
        fail(p, "non-finite parameter");
    }
    if (p.beta < 0.0) fail(p, "beta must be >= 0");

    if (isothermal_class(p.variant)) {
        if (!(p.pressure_k > 0.0)) fail(p, "pressure constant K must be positive");
        if (p.nu < 0.0) fail(p, "nu must be >= 0");
        if (p.variant == FamilyVariant::IsothermalNS && p.beta != 0.0) {
            fail(p, "beta must be 0 (use the damped variant)");
        }
    } else {
        if (!(p.kappa > 0.0)) fail(p, "kappa must be positive");
        if (!(p.theta > 0.0)) fail(p, "theta must be positive");
        if (p.nu != 0.0) fail(p, "nu does not apply to pressureless variants");
    }

    switch (p.variant) {
        case FamilyVariant::SolidCore2D:
            if (p.dim_n != 2) fail(p, "dim_n is fixed at 2");
            if (!(p.core_mass > 0.0)) fail(p, "core mass M0 must be positive");
            if (!(p.core_radius > 0.0)) fail(p, "core radius r0 must be positive");
            if (!(p.alpha > -p.lambda / (2.0 * p.pressure_k))) {
                fail(p, "alpha must exceed -lambda/(2K)");
            }
            break;
        case FamilyVariant::PressurelessTheta1:
            if (p.theta != 1.0) fail(p, "theta is fixed at 1");
            if (p.beta != 0.0) fail(p, "beta must be 0 for theta = 1");
            break;
        case FamilyVariant::PressurelessThetaNe1:
            if (p.theta == 1.0) {
                fail(p, "theta must differ from 1 (use pressureless_theta1)");
            }
            if (!(p.alpha > 0.0)) fail(p, "alpha must be positive");
            break;
        default:
            break;
    }
}

ScalingOde ode_for(const FamilyParams& p) {
    switch (p.variant) {
        case FamilyVariant::IsothermalNS:
            return classic_ode(p.lambda, p.a0, p.a1);
        case FamilyVariant::IsothermalDamped:
        case FamilyVariant::SolidCore2D:
            return p.beta > 0.0 ? damped_ode(p.lambda, p.beta, p.a0, p.a1)
                                : classic_ode(p.lambda, p.a0, p.a1);
        case FamilyVariant::PressurelessTheta1:
            return pressureless_theta1_ode(p.lambda, p.a0, p.a1);
        case FamilyVariant::PressurelessThetaNe1: {
            const double s = p.dim_n * p.theta - p.dim_n + 2.0;
            return general_damped_ode(p.lambda, p.beta, s, p.a0, p.a1);
        }
    }
    throw DomainError("ode_for: unknown variant");
}

SolutionFamily::SolutionFamily(FamilyParams params, ScalingOde ode,
                               Trajectory trajectory)
    : params_(params), ode_(ode),
      trajectory_(std::make_shared<const Trajectory>(std::move(trajectory))) {}

SolutionFamily SolutionFamily::create(const FamilyParams& params, double t_end,
                                      double rel_tol, double abs_tol) {
    validate(params);
    ScalingOde ode = ode_for(params);
    Trajectory traj = integrate(ode, t_end, rel_tol, abs_tol);
    if (traj.status() == TrajectoryStatus::StepFailure &&
        !(traj.t_reach() > 0.0)) {
        throw NumericError("SolutionFamily: scale-factor integration failed: " +
                           traj.diagnostic());
    }
    // A trajectory stopped early (vanish, or e.g. a finite-time explosion of
    // the scale factor for some damped-kind parameters) still defines the
    // family on [0, t_reach); evaluation guards the domain.
    return SolutionFamily(params, ode, std::move(traj));
}

double SolutionFamily::profile_quadratic_coeff() const {
    const FamilyParams& p = params_;
    switch (p.variant) {
        case FamilyVariant::IsothermalNS:
        case FamilyVariant::IsothermalDamped:
        case FamilyVariant::SolidCore2D:
            return 0.5 * p.lambda / p.pressure_k;
        case FamilyVariant::PressurelessTheta1:
            return 0.5 * p.lambda / (p.dim_n * p.kappa);
        case FamilyVariant::PressurelessThetaNe1:
            return 0.5 * (p.theta - 1.0) *
                   (-p.lambda / (p.dim_n * p.kappa * p.theta));
    }
    return 0.0;
}

std::optional<double> SolutionFamily::support_boundary_x() const {
    if (params_.variant != FamilyVariant::PressurelessThetaNe1) return std::nullopt;
    const double c2 = profile_quadratic_coeff();
    if (c2 >= 0.0) return std::nullopt;  // radicand never decreasing: full support
    const double head = std::pow(params_.alpha, params_.theta - 1.0);
    return std::sqrt(head / -c2);
}

std::optional<double> SolutionFamily::profile_y(double x) const {
    const FamilyParams& p = params_;
    if (p.variant == FamilyVariant::SolidCore2D) {
        if (!(x > 0.0)) {
            throw DomainError("profile_y: solid-core profile requires x > 0");
        }
        return profile_quadratic_coeff() * x * x + p.core_mass * std::log(x) +
               p.alpha;
    }
    if (!(x >= 0.0)) throw DomainError("profile_y: x must be >= 0");
    switch (p.variant) {
        case FamilyVariant::IsothermalNS:
        case FamilyVariant::IsothermalDamped:
        case FamilyVariant::PressurelessTheta1:
            return profile_quadratic_coeff() * x * x + p.alpha;
        case FamilyVariant::PressurelessThetaNe1: {
            const double radicand = profile_quadratic_coeff() * x * x +
                                    std::pow(p.alpha, p.theta - 1.0);
            const double root_exp = 1.0 / (p.theta - 1.0);
            if (radicand < 0.0) return std::nullopt;
            if (radicand == 0.0 && root_exp < 0.0) return std::nullopt;
            return std::pow(radicand, root_exp);
        }
        default:
            break;
    }
    return std::nullopt;  // unreachable
}

TrajectorySample SolutionFamily::state_at(double t) const {
    if (!(t >= 0.0)) throw DomainError("eval: t must be >= 0");
    const Trajectory& traj = *trajectory_;
    if (traj.vanished() && t >= traj.vanish_t_lower()) {
        std::ostringstream os;
        os << "eval at t=" << t << " is at/after blowup: the scale factor "
           << "vanishes in [" << traj.vanish_t_lower() << ", "
           << traj.vanish_t_upper() << "]";
        throw DomainError(os.str());
    }
    return traj.at(t);
}

FieldSample SolutionFamily::eval_fields(double t, double r) const {
    const FamilyParams& p = params_;
    if (!(r >= 0.0)) throw DomainError("eval_fields: r must be >= 0");
    if (p.variant == FamilyVariant::SolidCore2D && !(r > p.core_radius)) {
        std::ostringstream os;
        os << "eval_fields: solid-core fields are defined for r > r0="
           << p.core_radius << " only (got r=" << r << ")";
        throw DomainError(os.str());
    }

    const TrajectorySample s = state_at(t);
    const double x = r / s.a;
    const double an = std::pow(s.a, p.dim_n);

    FieldSample out;
    out.t = t;
    out.r = r;
    out.u = s.adot / s.a * r;

    const auto y = profile_y(x);
    if (p.variant == FamilyVariant::PressurelessThetaNe1) {
        out.in_support = y.has_value();
        out.rho = y.has_value() ? std::max(*y, 0.0) / an : 0.0;
    } else {
        out.rho = std::exp(*y) / an;
    }
    return out;
}

bool SolutionFamily::velocity_is_linear_check(double t, double r, double c) const {
    if (!(c > 0.0)) throw DomainError("velocity_is_linear_check: c must be > 0");
    const double u_r = eval_fields(t, r).u;
    const double u_cr = eval_fields(t, c * r).u;
    return std::fabs(u_cr - c * u_r) <= 1e-12 * (1.0 + std::fabs(u_r));
}

}  // namespace rns
