#include "radialns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace rns {

namespace {

constexpr double kPi = std::numbers::pi;

double unit_ball_volume(int n) {
    return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

}  // namespace

double surface_coefficient(int dim_n, SurfaceMode mode) {
    if (dim_n < 1) throw DomainError("surface_coefficient: dim_n must be >= 1");
    switch (mode) {
        case SurfaceMode::Standard:
            if (dim_n == 1) return 1.0;  // half-line convention
            return 2.0 * std::pow(kPi, 0.5 * dim_n) / std::tgamma(0.5 * dim_n);
        case SurfaceMode::Alternate:
            if (dim_n == 1) return 1.0;
            if (dim_n == 2) return 2.0 * kPi;
            return dim_n * (dim_n - 2) * unit_ball_volume(dim_n);
    }
    return 0.0;
}

// =============================================================================
// Adaptive Simpson quadrature
// =============================================================================

namespace {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth,
                   double& err_acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol || depth <= 0) {
        if (depth <= 0 && std::fabs(delta) > 15.0 * tol) {
            std::ostringstream os;
            os << "quadrature did not converge on [" << a << ", " << b
               << "]; achieved error estimate " << std::fabs(delta) / 15.0
               << " vs tolerance " << tol;
            throw NumericError(os.str());
        }
        err_acc += std::fabs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err_acc) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err_acc);
}

template <typename F>
QuadResult adaptive_simpson(const F& f, double a, double b, double tol) {
    if (!(b > a)) return {};
    QuadResult q;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    q.value = simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48, q.error);
    return q;
}

bool exponential_profile(FamilyVariant v) {
    return v != FamilyVariant::PressurelessThetaNe1;
}

}  // namespace

MassResult total_mass(const SolutionFamily& family, double t, double quad_tol,
                      std::optional<double> r_max, SurfaceMode mode) {
    if (!(quad_tol > 0.0 && quad_tol < 1.0)) {
        throw DomainError("total_mass: quad_tol must lie in (0, 1)");
    }
    const FamilyParams& p = family.params();
    const TrajectorySample st = family.state_at(t);  // validates t
    const double coeff = surface_coefficient(p.dim_n, mode);

    const auto integrand = [&](double s) {
        return family.eval_fields(t, s).rho * std::pow(s, p.dim_n - 1);
    };

    double lo = 0.0;
    double lo_error = 0.0;
    if (p.variant == FamilyVariant::SolidCore2D) {
        // Fields are defined strictly outside the core; start a hair above
        // r0 and account for the skipped sliver.
        lo = p.core_radius * (1.0 + 1e-10);
        lo_error = integrand(lo) * (lo - p.core_radius);
    }

    if (r_max) {
        if (!(*r_max > lo)) {
            throw DomainError("total_mass: r_max must exceed the inner boundary");
        }
        const QuadResult q =
            adaptive_simpson(integrand, lo, *r_max, quad_tol * 0.1);
        MassResult out;
        out.kind = MassResult::Kind::Truncated;
        out.value = coeff * q.value;
        out.quad_error = coeff * (q.error + lo_error);
        out.r_max = *r_max;
        return out;
    }

    MassResult out;

    if (exponential_profile(p.variant)) {
        if (p.lambda >= 0.0) {
            out.kind = MassResult::Kind::Divergent;
            return out;
        }
        // Gaussian decay: rho s^(N-1) <= C exp(-c s^2) with
        // c = |lambda| / (2 K_eff a^2).
        const double k_eff = p.variant == FamilyVariant::PressurelessTheta1
                                 ? p.dim_n * p.kappa
                                 : p.pressure_k;
        const double c = std::fabs(p.lambda) / (2.0 * k_eff * st.a * st.a);
        const double growth =
            p.dim_n - 1 +
            (p.variant == FamilyVariant::SolidCore2D ? p.core_mass : 0.0);

        double r_hi = std::max(
            {2.0 * lo, st.a, std::sqrt((growth + 2.0) / (2.0 * c)) * 1.5});
        QuadResult q = adaptive_simpson(integrand, lo, r_hi, quad_tol * 0.1);
        double tail = 0.0;
        for (int iter = 0;; ++iter) {
            const double denom = 2.0 * c * r_hi - growth / r_hi;
            tail = denom > 0.0 ? integrand(r_hi) / denom
                               : std::numeric_limits<double>::infinity();
            if (tail <= 0.3 * quad_tol * std::max(q.value, 1e-300)) break;
            if (iter >= 200) {
                throw NumericError(
                    "total_mass: tail bound failed to converge; achieved " +
                    std::to_string(tail));
            }
            const double r_next = 1.4 * r_hi;
            const QuadResult seg =
                adaptive_simpson(integrand, r_hi, r_next, quad_tol * 0.1);
            q.value += seg.value;
            q.error += seg.error;
            r_hi = r_next;
        }
        out.kind = MassResult::Kind::Finite;
        out.value = coeff * q.value;
        out.quad_error = coeff * (q.error + lo_error + tail);
        return out;
    }

    // theta != 1: decide by support shape and tail decay of
    // y(x) ~ (c2 x^2)^(1/(theta-1)).
    const double c2 = family.profile_quadratic_coeff();
    const double root_exp = 1.0 / (p.theta - 1.0);

    if (const auto xb = family.support_boundary_x()) {
        if (root_exp < 0.0) {
            // theta < 1 on compact support: the density grows like a
            // non-integrable power at the boundary.
            out.kind = MassResult::Kind::Divergent;
            return out;
        }
        const double upper = *xb * st.a;
        const QuadResult q = adaptive_simpson(integrand, 0.0, upper, quad_tol * 0.1);
        out.kind = MassResult::Kind::Finite;
        out.value = coeff * q.value;
        out.quad_error = coeff * q.error;
        return out;
    }

    // Full support: integrable only when N + 2/(theta-1) < 0.
    const double p_tail = p.dim_n + 2.0 * root_exp;
    if (c2 <= 0.0 || p_tail >= 0.0) {
        out.kind = MassResult::Kind::Divergent;
        return out;
    }
    // Envelope rho(s) <= c2^e (s/a)^{2e} / a^N with e = root_exp < 0, so
    // tail(r) = integral_r^inf rho s^{N-1} ds <= C r^{N+2e} / (-(N+2e)).
    const auto tail_at = [&](double r) {
        const double env_coeff =
            std::pow(c2, root_exp) * std::pow(st.a, -p.dim_n - 2.0 * root_exp);
        return env_coeff * std::pow(r, p_tail) / (-p_tail);
    };

    double r_hi = std::max(1.0, 4.0 * st.a);
    QuadResult q = adaptive_simpson(integrand, 0.0, r_hi, quad_tol * 0.1);
    double tail = 0.0;
    for (int iter = 0;; ++iter) {
        tail = tail_at(r_hi);
        if (tail <= 0.3 * quad_tol * std::max(q.value, 1e-300)) break;
        if (iter >= 200) {
            throw NumericError(
                "total_mass: tail bound failed to converge; achieved " +
                std::to_string(tail));
        }
        const double r_next = 1.6 * r_hi;
        const QuadResult seg = adaptive_simpson(integrand, r_hi, r_next, quad_tol * 0.1);
        q.value += seg.value;
        q.error += seg.error;
        r_hi = r_next;
    }
    out.kind = MassResult::Kind::Finite;
    out.value = coeff * q.value;
    out.quad_error = coeff * (q.error + tail);
    return out;
}

double center_density(const SolutionFamily& family, double t) {
    const FamilyParams& p = family.params();
    if (p.variant == FamilyVariant::SolidCore2D) {
        throw DomainError("center_density: the solid-core family excludes r = 0");
    }
    const TrajectorySample st = family.state_at(t);
    const double an = std::pow(st.a, p.dim_n);
    if (p.variant == FamilyVariant::PressurelessThetaNe1) {
        return p.alpha / an;
    }
    return std::exp(p.alpha) / an;
}

namespace {

RateVerdict rate_verdict(const std::vector<RateSample>& products) {
    const std::size_t n = products.size();
    if (n < 4) return RateVerdict::Inconclusive;
    // Longest nondecreasing tail.
    std::size_t j = n - 1;
    while (j > 0 &&
           products[j].product >= products[j - 1].product * (1.0 - 1e-12)) {
        --j;
    }
    const bool tail_long_enough = (n - j) >= 3;
    const bool exceeds_initial = products.back().product > products.front().product;
    return (tail_long_enough && exceeds_initial) ? RateVerdict::BoundedBelow
                                                 : RateVerdict::Inconclusive;
}

}  // namespace

BlowupRateEstimate blowup_rate_estimate(const SolutionFamily& family,
                                        double exponent, int n_samples) {
    const FamilyParams& p = family.params();
    if (!(exponent < p.dim_n)) {
        throw DomainError("blowup_rate_estimate: exponent must stay below dim_n");
    }
    if (n_samples < 4) {
        throw DomainError("blowup_rate_estimate: n_samples must be >= 4");
    }
    const Trajectory& traj = family.trajectory();
    if (!traj.vanished()) {
        throw DomainError(
            "blowup_rate_estimate: the family's trajectory shows no finite-time "
            "vanish (integrate further or pick blowup parameters)");
    }

    BlowupRateEstimate est;
    est.exponent = exponent;
    est.t_star = 0.5 * (traj.vanish_t_lower() + traj.vanish_t_upper());

    // The t_star proxy sits at the crossing of the (possibly positive)
    // vanish threshold, below the true vanishing time by roughly
    // level/|a'|.  Products are only sampled where that offset is
    // negligible against t_star - t.
    const TrajectorySample end = traj.samples().back();
    const double proxy_bias =
        traj.vanish_level() / std::max(std::fabs(end.adot), 1e-300) +
        (traj.vanish_t_upper() - traj.vanish_t_lower());
    const double tau_floor = 100.0 * proxy_bias;

    std::vector<RateSample> at_lower, at_upper;
    double tau = 0.45 * est.t_star;
    for (int k = 0; k < n_samples; ++k, tau *= 0.5) {
        const double t = est.t_star - tau;
        if (!(t >= 0.0) || t >= traj.t_reach() || tau < tau_floor) continue;
        const double rho0 = center_density(family, t);
        est.products.push_back({t, rho0 * std::pow(tau, exponent)});
        const double tau_lo = traj.vanish_t_lower() - t;
        const double tau_hi = traj.vanish_t_upper() - t;
        if (tau_lo > 0.0) at_lower.push_back({t, rho0 * std::pow(tau_lo, exponent)});
        if (tau_hi > 0.0) at_upper.push_back({t, rho0 * std::pow(tau_hi, exponent)});
    }

    est.verdict = rate_verdict(est.products);
    est.verdict_at_t_lower = rate_verdict(at_lower);
    est.verdict_at_t_upper = rate_verdict(at_upper);
    return est;
}

}  // namespace rns
