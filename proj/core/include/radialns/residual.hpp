#pragma once

#include <functional>
#include <string>

#include "radialns/families.hpp"

namespace rns {

// =============================================================================
// Finite-difference residual oracle
//
// Evaluates the governing equations on arbitrary (t, r) -> (rho, u) samplers
// with central differences: 5-point stencils for the first and second
// r-derivatives, 2-point for the t-derivative.  For exact solutions the
// residuals vanish up to stencil truncation error; the fd steps are
// decoupled from any grid spacing.
//
// The operators consume only the sampler interface, never family internals,
// so they stay an independent check of the constructed families.
// =============================================================================

struct RhoU {
    double rho = 0.0;
    double u = 0.0;
};

using FieldSampler = std::function<RhoU(double t, double r)>;

/// rho_t + u rho_r + rho u_r + (N-1)/r rho u
double mass_residual(const FieldSampler& fields, int dim_n, double t, double r,
                     double h_t, double h_r);

/// rho (u_t + u u_r) + K rho_r + beta rho u
///   - nu (u_rr + (N-1)/r u_r - (N-1)/r^2 u)
double momentum_residual_isothermal(const FieldSampler& fields, int dim_n,
                                    double pressure_k, double nu, double beta,
                                    double t, double r, double h_t, double h_r);

/// rho (u_t + u u_r) - (kappa rho^theta)_r ((N-1)/r u + u_r)
///   - kappa rho^theta (u_rr + (N-1)/r u_r - (N-1)/r^2 u)
/// The derivative of kappa rho^theta is differenced on the composite value.
/// Throws DomainError when the r-stencil straddles the support boundary
/// (some sampled rho zero, some positive); returns 0 in full vacuum.
double momentum_residual_pressureless(const FieldSampler& fields, int dim_n,
                                      double kappa, double theta, double t,
                                      double r, double h_t, double h_r);

/// Source term on the right-hand side of the 2-D solid-core momentum
/// equation.  AsPrinted uses M0/r; DensityWeighted uses rho M0/r.
enum class SolidCoreSource {
    AsPrinted,
    DensityWeighted,
};

/// rho (u_t + u u_r) + K rho_r + beta rho u - source
///   - nu (u_rr + 1/r u_r - 1/r^2 u),  N = 2, r > r0 + stencil reach.
double momentum_residual_solid_core(const FieldSampler& fields,
                                    double pressure_k, double nu, double beta,
                                    double core_mass, double t, double r,
                                    double h_t, double h_r,
                                    SolidCoreSource source);

// =============================================================================
// Grid sweeps
// =============================================================================

struct Grid {
    double t_min = 0.0, t_max = 0.0;
    double r_min = 0.0, r_max = 0.0;
    int n_t = 2, n_r = 2;
    double fd_step_t = 1e-4;
    double fd_step_r = 1e-4;
};

struct ResidualReport {
    Grid grid;
    double max_abs_mass = 0.0;
    double mean_abs_mass = 0.0;
    double max_abs_momentum = 0.0;
    double mean_abs_momentum = 0.0;
    double worst_t = 0.0;
    double worst_r = 0.0;
};

/// Which momentum equation a sweep evaluates, with its coefficients.
struct EquationSpec {
    enum class Kind { Isothermal, Pressureless, SolidCore } kind =
        Kind::Isothermal;
    int dim_n = 3;
    double pressure_k = 1.0;
    double nu = 0.0;
    double beta = 0.0;
    double kappa = 1.0;
    double theta = 1.0;
    double core_mass = 0.0;
    double core_radius = 0.0;
    SolidCoreSource source = SolidCoreSource::DensityWeighted;
};

EquationSpec equation_for(const FamilyParams& params,
                          SolidCoreSource source = SolidCoreSource::DensityWeighted);

struct NodeResidual {
    double mass = 0.0;
    double momentum = 0.0;
};

/// Residuals at one grid node as evaluated by residual_sweep: the time step
/// is the grid's fd_step_t scaled down by the local field magnitude (density
/// scale and time rates), keeping the stencil truncation error of steep
/// solutions in proportion to the fields themselves; the r-step is scaled up
/// with the local viscosity multiplier, keeping the 1/h^2 cancellation noise
/// of the second-derivative stencil below it.  Both scaled steps stay
/// proportional to the base steps.  i_t / i_r index the grid nodes.
NodeResidual sweep_node_residuals(const FieldSampler& fields,
                                  const EquationSpec& equation, const Grid& grid,
                                  int i_t, int i_r);

/// Mass + momentum residuals at every grid node (see sweep_node_residuals);
/// max/mean of the absolute values and the node where the larger of the two
/// peaks.  Domain errors are rethrown with the offending node's coordinates.
ResidualReport residual_sweep(const FieldSampler& fields,
                              const EquationSpec& equation, const Grid& grid);

/// Sweep of a family against its own governing system.  Rejects grids whose
/// time range (stencil included) is not strictly inside the family's domain;
/// for vanished trajectories t_max + fd_step_t must stay below 0.9 of the
/// vanish bracket's lower edge.
ResidualReport residual_sweep(const SolutionFamily& family, const Grid& grid,
                              SolidCoreSource source = SolidCoreSource::DensityWeighted);

/// The domain check used by the family sweep, callable on its own (throws
/// DomainError naming the vanish bracket when the grid crosses it).
void validate_grid_domain(const SolutionFamily& family, const Grid& grid);

/// The family's own fields as a sampler.
FieldSampler family_sampler(const SolutionFamily& family);

/// Deliberately wrong samplers for negative controls.
enum class Corruption {
    DensityExponent,     // rho = F(y)/a^(N+1) instead of /a^N
    ProfileExponential,  // theta != 1 density built as e^y/a^N instead of y/a^N
};
FieldSampler corrupted_sampler(const SolutionFamily& family, Corruption mode);

/// Builds a grid on which the family's fields are resolved well enough that
/// the stencil truncation error stays within error_budget: the time range is
/// restricted to a window where the scale factor stays near a0 (and below
/// 0.9 of any vanish bracket), the radial range keeps the profile argument
/// x = r/a moderate and strictly inside the support, and both are shrunk
/// until probe residuals meet the budget.
Grid make_verification_grid(const SolutionFamily& family, int n_t, int n_r,
                            double fd_step_t, double fd_step_r,
                            double t_cap = 1.0, double error_budget = 3e-7);

}  // namespace rns
