#include "radialns/residual.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rns {

namespace {

struct RStencil {
    // Samples at r - 2h, r - h, r, r + h, r + 2h.
    RhoU m2, m1, c, p1, p2;
};

RStencil sample_r(const FieldSampler& fields, double t, double r, double h) {
    return {fields(t, r - 2.0 * h), fields(t, r - h), fields(t, r),
            fields(t, r + h), fields(t, r + 2.0 * h)};
}

double d1(double fm2, double fm1, double fp1, double fp2, double h) {
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
}

double d2(double fm2, double fm1, double fc, double fp1, double fp2, double h) {
    return (-fp2 + 16.0 * fp1 - 30.0 * fc + 16.0 * fm1 - fm2) / (12.0 * h * h);
}

void check_radial_domain(double r, double h_r, double inner) {
    if (!(h_r > 0.0)) throw DomainError("residual: fd step must be positive");
    if (!(r - 2.0 * h_r > inner)) {
        std::ostringstream os;
        os << "residual stencil leaves the domain: r=" << r << ", h_r=" << h_r
           << " requires r - 2 h_r > " << inner;
        throw DomainError(os.str());
    }
}

}  // namespace

double mass_residual(const FieldSampler& fields, int dim_n, double t, double r,
                     double h_t, double h_r) {
    check_radial_domain(r, h_r, 0.0);
    if (!(h_t > 0.0)) throw DomainError("residual: fd step must be positive");

    const RStencil s = sample_r(fields, t, r, h_r);
    const RhoU tp = fields(t + h_t, r);
    const RhoU tm = fields(t - h_t, r);

    const double rho_t = (tp.rho - tm.rho) / (2.0 * h_t);
    const double rho_r = d1(s.m2.rho, s.m1.rho, s.p1.rho, s.p2.rho, h_r);
    const double u_r = d1(s.m2.u, s.m1.u, s.p1.u, s.p2.u, h_r);

    return rho_t + s.c.u * rho_r + s.c.rho * u_r +
           (dim_n - 1) / r * s.c.rho * s.c.u;
}

namespace {

struct MomentumParts {
    double advective;  // rho (u_t + u u_r)
    double viscous;    // u_rr + (N-1)/r u_r - (N-1)/r^2 u
    double u_r;
    RStencil s;
};

MomentumParts momentum_parts(const FieldSampler& fields, int dim_n, double t,
                             double r, double h_t, double h_r) {
    MomentumParts mp;
    mp.s = sample_r(fields, t, r, h_r);
    const RhoU tp = fields(t + h_t, r);
    const RhoU tm = fields(t - h_t, r);

    const double u_t = (tp.u - tm.u) / (2.0 * h_t);
    mp.u_r = d1(mp.s.m2.u, mp.s.m1.u, mp.s.p1.u, mp.s.p2.u, h_r);
    const double u_rr =
        d2(mp.s.m2.u, mp.s.m1.u, mp.s.c.u, mp.s.p1.u, mp.s.p2.u, h_r);

    mp.advective = mp.s.c.rho * (u_t + mp.s.c.u * mp.u_r);
    mp.viscous = u_rr + (dim_n - 1) / r * mp.u_r -
                 (dim_n - 1) / (r * r) * mp.s.c.u;
    return mp;
}

}  // namespace

double momentum_residual_isothermal(const FieldSampler& fields, int dim_n,
                                    double pressure_k, double nu, double beta,
                                    double t, double r, double h_t, double h_r) {
    check_radial_domain(r, h_r, 0.0);
    const MomentumParts mp = momentum_parts(fields, dim_n, t, r, h_t, h_r);
    const double rho_r = d1(mp.s.m2.rho, mp.s.m1.rho, mp.s.p1.rho, mp.s.p2.rho, h_r);
    return mp.advective + pressure_k * rho_r + beta * mp.s.c.rho * mp.s.c.u -
           nu * mp.viscous;
}

double momentum_residual_pressureless(const FieldSampler& fields, int dim_n,
                                      double kappa, double theta, double t,
                                      double r, double h_t, double h_r) {
    check_radial_domain(r, h_r, 0.0);
    const MomentumParts mp = momentum_parts(fields, dim_n, t, r, h_t, h_r);

    const double rhos[5] = {mp.s.m2.rho, mp.s.m1.rho, mp.s.c.rho, mp.s.p1.rho,
                            mp.s.p2.rho};
    int zeros = 0;
    for (double v : rhos) zeros += (v == 0.0);
    if (zeros == 5) return 0.0;  // full vacuum: every term vanishes
    if (zeros > 0) {
        std::ostringstream os;
        os << "pressureless residual stencil straddles the support boundary "
              "at (t=" << t << ", r=" << r << ")";
        throw DomainError(os.str());
    }

    // mu = kappa rho^theta, differenced on the composite value.
    double mu[5];
    for (int i = 0; i < 5; ++i) mu[i] = kappa * std::pow(rhos[i], theta);
    const double mu_r = d1(mu[0], mu[1], mu[3], mu[4], h_r);

    return mp.advective -
           mu_r * ((dim_n - 1) / r * mp.s.c.u + mp.u_r) -
           mu[2] * mp.viscous;
}

double momentum_residual_solid_core(const FieldSampler& fields,
                                    double pressure_k, double nu, double beta,
                                    double core_mass, double t, double r,
                                    double h_t, double h_r,
                                    SolidCoreSource source) {
    check_radial_domain(r, h_r, 0.0);
    const MomentumParts mp = momentum_parts(fields, 2, t, r, h_t, h_r);
    const double rho_r = d1(mp.s.m2.rho, mp.s.m1.rho, mp.s.p1.rho, mp.s.p2.rho, h_r);
    const double src = source == SolidCoreSource::AsPrinted
                           ? core_mass / r
                           : mp.s.c.rho * core_mass / r;
    return mp.advective + pressure_k * rho_r + beta * mp.s.c.rho * mp.s.c.u -
           src - nu * mp.viscous;
}

// =============================================================================
// Sweeps
// =============================================================================

EquationSpec equation_for(const FamilyParams& p, SolidCoreSource source) {
    EquationSpec eq;
    eq.dim_n = p.dim_n;
    switch (p.variant) {
        case FamilyVariant::IsothermalNS:
        case FamilyVariant::IsothermalDamped:
            eq.kind = EquationSpec::Kind::Isothermal;
            eq.pressure_k = p.pressure_k;
            eq.nu = p.nu;
            eq.beta = p.beta;
            break;
        case FamilyVariant::SolidCore2D:
            eq.kind = EquationSpec::Kind::SolidCore;
            eq.pressure_k = p.pressure_k;
            eq.nu = p.nu;
            eq.beta = p.beta;
            eq.core_mass = p.core_mass;
            eq.source = source;
            break;
        case FamilyVariant::PressurelessTheta1:
        case FamilyVariant::PressurelessThetaNe1:
            eq.kind = EquationSpec::Kind::Pressureless;
            eq.kappa = p.kappa;
            eq.theta = p.theta;
            break;
    }
    return eq;
}

namespace {

double momentum_for(const FieldSampler& fields, const EquationSpec& eq,
                    double t, double r, double h_t, double h_r) {
    switch (eq.kind) {
        case EquationSpec::Kind::Isothermal:
            return momentum_residual_isothermal(fields, eq.dim_n, eq.pressure_k,
                                                eq.nu, eq.beta, t, r, h_t, h_r);
        case EquationSpec::Kind::Pressureless:
            return momentum_residual_pressureless(fields, eq.dim_n, eq.kappa,
                                                  eq.theta, t, r, h_t, h_r);
        case EquationSpec::Kind::SolidCore:
            return momentum_residual_solid_core(fields, eq.pressure_k, eq.nu,
                                                eq.beta, eq.core_mass, t, r,
                                                h_t, h_r, eq.source);
    }
    return 0.0;
}

void validate_grid(const Grid& g) {
    if (g.n_t < 2 || g.n_r < 2) throw DomainError("Grid: n_t and n_r must be >= 2");
    if (!(g.t_min < g.t_max) || !(g.r_min < g.r_max)) {
        throw DomainError("Grid: require t_min < t_max and r_min < r_max");
    }
    if (!(g.fd_step_t > 0.0) || !(g.fd_step_r > 0.0)) {
        throw DomainError("Grid: fd steps must be positive");
    }
    if (!(g.r_min > 0.0)) throw DomainError("Grid: r_min must be positive");
    if (!(g.t_min - 2.0 * g.fd_step_t >= 0.0)) {
        throw DomainError(
            "Grid: t_min must leave room for the t-stencil and its local "
            "step estimator (two base steps)");
    }
}

}  // namespace

namespace {

// Steep families carry density scales like e^alpha / a^N and time rates that
// make the raw stencil error at a fixed step exceed any absolute tolerance;
// the t-step is therefore scaled down by the locally estimated magnitude.
// First differences capture the log-rates, second differences the curvature
// (some scale-factor kinds have huge curvature at moderate slope near t = 0).
// The scaled step stays proportional to the base step, preserving the
// second-order step-halving behavior of the sweep.
double scaled_t_step(const FieldSampler& fields, double t, double r, double h_t) {
    const RhoU c = fields(t, r);
    const RhoU p1 = fields(t + h_t, r);
    const RhoU m1 = fields(t - h_t, r);
    const RhoU p2 = fields(t + 2.0 * h_t, r);
    const RhoU m2 = fields(t - 2.0 * h_t, r);
    const double rho_scale = std::max(c.rho, 1e-30);
    const double u_scale = 1.0 + std::fabs(c.u);

    // Estimated inverse time scales of each field from its first, second,
    // and third differences at the base step.
    const auto rates = [&](double vm2, double vm1, double vc, double vp1,
                           double vp2, double scale) {
        const double d1 = std::fabs(vp1 - vm1) / (2.0 * h_t);
        const double d2 = std::fabs(vp1 - 2.0 * vc + vm1) / (h_t * h_t);
        const double d3 = std::fabs(vp2 - 2.0 * vp1 + 2.0 * vm1 - vm2) /
                          (2.0 * h_t * h_t * h_t);
        return d1 / scale + std::sqrt(d2 / scale) + std::cbrt(d3 / scale);
    };
    const double rate =
        1.0 +
        std::min(rates(m2.rho, m1.rho, c.rho, p1.rho, p2.rho, rho_scale), 1e6) +
        std::min(rates(m2.u, m1.u, c.u, p1.u, p2.u, u_scale), 1e6);
    const double amplitude = std::sqrt(std::max(1.0, c.rho));
    return h_t / (rate * amplitude);
}

}  // namespace

NodeResidual sweep_node_residuals(const FieldSampler& fields,
                                  const EquationSpec& eq, const Grid& grid,
                                  int i_t, int i_r) {
    const double dt = (grid.t_max - grid.t_min) / (grid.n_t - 1);
    const double dr = (grid.r_max - grid.r_min) / (grid.n_r - 1);
    const double t = grid.t_min + i_t * dt;
    const double r = grid.r_min + i_r * dr;
    const double h_t = scaled_t_step(fields, t, r, grid.fd_step_t);
    NodeResidual out;
    out.mass = mass_residual(fields, eq.dim_n, t, r, h_t, grid.fd_step_r);
    out.momentum = momentum_for(fields, eq, t, r, h_t, grid.fd_step_r);
    return out;
}

ResidualReport residual_sweep(const FieldSampler& fields,
                              const EquationSpec& eq, const Grid& grid) {
    validate_grid(grid);

    ResidualReport rep;
    rep.grid = grid;
    double sum_mass = 0.0, sum_mom = 0.0, worst = -1.0;
    const double dt = (grid.t_max - grid.t_min) / (grid.n_t - 1);
    const double dr = (grid.r_max - grid.r_min) / (grid.n_r - 1);

    for (int i = 0; i < grid.n_t; ++i) {
        const double t = grid.t_min + i * dt;
        for (int j = 0; j < grid.n_r; ++j) {
            const double r = grid.r_min + j * dr;
            NodeResidual node;
            try {
                node = sweep_node_residuals(fields, eq, grid, i, j);
            } catch (const DomainError& e) {
                std::ostringstream os;
                os << "residual_sweep at grid node (t=" << t << ", r=" << r
                   << "): " << e.what();
                throw DomainError(os.str());
            }
            const double am = std::fabs(node.mass), aq = std::fabs(node.momentum);
            sum_mass += am;
            sum_mom += aq;
            rep.max_abs_mass = std::max(rep.max_abs_mass, am);
            rep.max_abs_momentum = std::max(rep.max_abs_momentum, aq);
            if (std::max(am, aq) > worst) {
                worst = std::max(am, aq);
                rep.worst_t = t;
                rep.worst_r = r;
            }
        }
    }
    const double n = static_cast<double>(grid.n_t) * grid.n_r;
    rep.mean_abs_mass = sum_mass / n;
    rep.mean_abs_momentum = sum_mom / n;
    return rep;
}

void validate_grid_domain(const SolutionFamily& family, const Grid& grid) {
    const Trajectory& traj = family.trajectory();
    const double t_need = grid.t_max + 2.0 * grid.fd_step_t;
    if (traj.vanished() && t_need > 0.9 * traj.vanish_t_lower()) {
        std::ostringstream os;
        os << "grid reaches t=" << t_need
           << " but the family's scale factor vanishes in ["
           << traj.vanish_t_lower() << ", " << traj.vanish_t_upper()
           << "]; grids are capped at 0.9 of the bracket's lower edge";
        throw DomainError(os.str());
    }
    if (t_need > traj.t_reach()) {
        std::ostringstream os;
        os << "grid reaches t=" << t_need << " beyond the integrated horizon "
           << traj.t_reach();
        throw DomainError(os.str());
    }
}

ResidualReport residual_sweep(const SolutionFamily& family, const Grid& grid,
                              SolidCoreSource source) {
    validate_grid_domain(family, grid);
    return residual_sweep(family_sampler(family), equation_for(family.params(), source),
                          grid);
}

FieldSampler family_sampler(const SolutionFamily& family) {
    return [&family](double t, double r) {
        const FieldSample s = family.eval_fields(t, r);
        return RhoU{s.rho, s.u};
    };
}

FieldSampler corrupted_sampler(const SolutionFamily& family, Corruption mode) {
    switch (mode) {
        case Corruption::DensityExponent:
            return [&family](double t, double r) {
                const FieldSample s = family.eval_fields(t, r);
                const double a = family.state_at(t).a;
                return RhoU{s.rho / a, s.u};
            };
        case Corruption::ProfileExponential:
            if (family.params().variant != FamilyVariant::PressurelessThetaNe1) {
                throw DomainError(
                    "Corruption::ProfileExponential applies to the theta != 1 "
                    "variant only");
            }
            return [&family](double t, double r) {
                const FieldSample s = family.eval_fields(t, r);
                const TrajectorySample st = family.state_at(t);
                const double an = std::pow(st.a, family.params().dim_n);
                const double y = s.rho * an;  // profile value (zero outside support)
                return RhoU{std::exp(y) / an, s.u};
            };
    }
    throw DomainError("corrupted_sampler: unknown mode");
}

// =============================================================================
// Verification grids
// =============================================================================

namespace {

// Largest t <= cap such that a(s) stays within [lo, hi] * a0 for s <= t,
// scanned on the dense output.
double scale_window(const Trajectory& traj, double a0, double cap, double lo,
                    double hi) {
    const int n = 512;
    double t_ok = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double t = cap * i / n;
        if (t > traj.t_reach()) break;
        const double a = traj.at(t).a;
        if (a < lo * a0 || a > hi * a0) break;
        t_ok = t;
    }
    return t_ok;
}

// Largest t <= cap with |a'(s)| >= floor for s <= t.  Keeps grids for the
// exponentially damped kinds inside the window where the motion is visible.
double adot_window(const Trajectory& traj, double floor_value, double cap) {
    const int n = 512;
    double t_ok = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double t = cap * i / n;
        if (t > traj.t_reach()) break;
        if (std::fabs(traj.at(t).adot) < floor_value) break;
        t_ok = t;
    }
    return t_ok;
}

}  // namespace

Grid make_verification_grid(const SolutionFamily& family, int n_t, int n_r,
                            double fd_step_t, double fd_step_r, double t_cap,
                            double error_budget) {
    const FamilyParams& p = family.params();
    const Trajectory& traj = family.trajectory();

    double cap = std::min(t_cap, traj.t_reach());
    if (traj.vanished()) {
        cap = std::min(cap, 0.9 * traj.vanish_t_lower() - 2.0 * fd_step_t);
    }
    if (!(cap > 4.0 * fd_step_t)) {
        throw DomainError(
            "make_verification_grid: usable time range is too small");
    }

    double t_max = scale_window(traj, p.a0, cap, 0.9, 1.15);
    if (p.variant == FamilyVariant::PressurelessThetaNe1 && p.a1 != 0.0) {
        t_max = std::min(t_max, adot_window(traj, 0.25 * std::fabs(p.a1), cap));
    }
    t_max = std::max(t_max, 8.0 * fd_step_t);  // keep at least a sliver
    double t_min = std::max(2.0 * fd_step_t, 0.02 * t_max);

    // Radial cap through the profile argument x = r/a.
    double x_max;
    if (p.variant == FamilyVariant::PressurelessThetaNe1) {
        const double c2 = family.profile_quadratic_coeff();
        const double head = std::pow(p.alpha, p.theta - 1.0);
        if (const auto xb = family.support_boundary_x()) {
            x_max = 0.7 * *xb;
        } else {
            // Full support: keep the radicand within twice its center value.
            x_max = c2 > 0.0 ? std::min(1.2, std::sqrt(head / c2)) : 1.2;
        }
    } else {
        const double k_eff = p.variant == FamilyVariant::PressurelessTheta1
                                 ? p.dim_n * p.kappa
                                 : p.pressure_k;
        x_max = 0.75 * std::sqrt(2.0 * k_eff / std::max(std::fabs(p.lambda), 0.5));
        x_max = std::clamp(x_max, 0.25, 1.2);
    }

    double a_min = p.a0;
    for (const auto& s : traj.samples()) {
        if (s.t > t_max) break;
        a_min = std::min(a_min, s.a);
    }

    Grid g;
    g.n_t = n_t;
    g.n_r = n_r;
    g.fd_step_t = fd_step_t;
    g.fd_step_r = fd_step_r;
    g.t_min = t_min;
    g.t_max = t_max;
    const double r_inner =
        p.variant == FamilyVariant::SolidCore2D
            ? p.core_radius + std::max(10.0 * fd_step_r, 0.05 * p.core_radius)
            : std::max(1e-3, 10.0 * fd_step_r);
    g.r_min = r_inner;
    g.r_max = std::max(x_max * a_min, r_inner * 2.0);
    if (p.variant == FamilyVariant::SolidCore2D) {
        g.r_max = std::max(g.r_max, p.core_radius + x_max * a_min);
    }

    const EquationSpec eq = equation_for(p);
    const FieldSampler fields = family_sampler(family);

    // Probe a coarse subgrid (with the sweep's own scaled-step evaluation)
    // and shrink the window until the stencil error meets the budget.
    for (int iter = 0; iter < 30; ++iter) {
        double probe_max = 0.0;
        bool domain_ok = true;
        Grid probe = g;
        probe.n_t = 4;
        probe.n_r = 4;
        for (int i = 0; i < 4 && domain_ok; ++i) {
            for (int j = 0; j < 4; ++j) {
                try {
                    const NodeResidual node =
                        sweep_node_residuals(fields, eq, probe, i, j);
                    probe_max = std::max({probe_max, std::fabs(node.mass),
                                          std::fabs(node.momentum)});
                } catch (const DomainError&) {
                    domain_ok = false;
                    break;
                }
            }
        }
        if (domain_ok && probe_max <= error_budget) break;
        g.t_max = g.t_min + 0.8 * (g.t_max - g.t_min);
        g.r_max = g.r_min + 0.85 * (g.r_max - g.r_min);
        if (g.t_max - g.t_min < 4.0 * fd_step_t ||
            g.r_max - g.r_min < 4.0 * fd_step_r) {
            throw DomainError(
                "make_verification_grid: could not meet the error budget on a "
                "usable window");
        }
    }
    return g;
}

}  // namespace rns
