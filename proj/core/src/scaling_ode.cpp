#include "radialns/scaling_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rns {

namespace {

std::string describe(const ScalingOde& ode) {
    std::ostringstream os;
    const char* names[] = {"Classic", "Damped", "PressurelessTheta1", "GeneralDamped"};
    os << names[static_cast<int>(ode.kind)] << "(lambda=" << ode.lambda
       << ", beta=" << ode.beta << ", S=" << ode.s_exponent
       << ", a0=" << ode.a0 << ", a1=" << ode.a1 << ")";
    return os.str();
}

}  // namespace

ScalingOde classic_ode(double lambda, double a0, double a1) {
    ScalingOde ode{OdeKind::Classic, lambda, 0.0, 2.0, a0, a1};
    validate(ode);
    return ode;
}

ScalingOde damped_ode(double lambda, double beta, double a0, double a1) {
    ScalingOde ode{OdeKind::Damped, lambda, beta, 2.0, a0, a1};
    validate(ode);
    return ode;
}

ScalingOde pressureless_theta1_ode(double lambda, double a0, double a1) {
    ScalingOde ode{OdeKind::PressurelessTheta1, lambda, 0.0, 2.0, a0, a1};
    validate(ode);
    return ode;
}

ScalingOde general_damped_ode(double lambda, double beta, double s_exponent,
                              double a0, double a1) {
    ScalingOde ode{OdeKind::GeneralDamped, lambda, beta, s_exponent, a0, a1};
    validate(ode);
    return ode;
}

void validate(const ScalingOde& ode) {
    if (!(ode.a0 > 0.0) || !std::isfinite(ode.a0)) {
        throw DomainError("ScalingOde: a0 must be positive and finite, got " +
                          describe(ode));
    }
    if (!std::isfinite(ode.a1) || !std::isfinite(ode.lambda) ||
        !std::isfinite(ode.beta) || !std::isfinite(ode.s_exponent)) {
        throw DomainError("ScalingOde: non-finite parameter in " + describe(ode));
    }
    if (ode.beta < 0.0) {
        throw DomainError("ScalingOde: beta must be >= 0 in " + describe(ode));
    }
    const bool damped_kind =
        ode.kind == OdeKind::Damped || ode.kind == OdeKind::GeneralDamped;
    if (!damped_kind && ode.beta != 0.0) {
        throw DomainError("ScalingOde: beta must be 0 for kind " + describe(ode));
    }
}

double acceleration(const ScalingOde& ode, double a, double adot) {
    switch (ode.kind) {
        case OdeKind::Classic:
            return ode.lambda == 0.0 ? 0.0 : -ode.lambda / a;
        case OdeKind::Damped:
            return (ode.lambda == 0.0 ? 0.0 : -ode.lambda / a) - ode.beta * adot;
        case OdeKind::PressurelessTheta1:
            return ode.lambda == 0.0 ? 0.0 : ode.lambda * adot / (a * a);
        case OdeKind::GeneralDamped:
            if (ode.lambda == 0.0) return -ode.beta * adot;
            return -ode.beta * adot - ode.lambda * adot / std::pow(a, ode.s_exponent);
    }
    return 0.0;  // unreachable
}

bool finite_at_vanish(const ScalingOde& ode) {
    if (ode.lambda == 0.0) return true;
    return ode.kind == OdeKind::GeneralDamped && ode.s_exponent == 0.0;
}

namespace {

// True when |a'| is guaranteed nondecreasing from the state (a, adot < 0)
// onward, so the true vanishing time lies within [t, t + a/|a'|].  Used to
// finalize the vanish bracket once that remaining-time bound is tiny; the
// kinds whose step size would otherwise shrink like a power of a near the
// singularity stall without this.
bool vanish_certificate(const ScalingOde& ode, double a, double adot) {
    if (!(adot < 0.0)) return false;
    switch (ode.kind) {
        case OdeKind::Classic:
            return ode.lambda > 0.0;
        case OdeKind::Damped:
            // a'' <= 0 is forward-invariant here while a' < 0.
            return ode.lambda > 0.0 && acceleration(ode, a, adot) <= 0.0;
        case OdeKind::PressurelessTheta1:
            return ode.lambda >= 0.0;
        case OdeKind::GeneralDamped:
            return ode.lambda < 0.0 && ode.s_exponent > 0.0 &&
                   ode.beta + ode.lambda / std::pow(a, ode.s_exponent) <= 0.0;
    }
    return false;
}

}  // namespace

double vanish_threshold(const ScalingOde& ode) {
    return finite_at_vanish(ode) ? 0.0 : 1e-8 * ode.a0;
}

double energy_integral(const ScalingOde& ode, double a, double adot) {
    if (ode.kind != OdeKind::Classic) {
        throw DomainError("energy_integral is defined for the Classic kind only");
    }
    if (!(a > 0.0)) {
        throw DomainError("energy_integral: a must be positive");
    }
    return 0.5 * adot * adot + ode.lambda * std::log(a);
}

double pressureless_first_integral(const ScalingOde& ode, double a, double adot) {
    if (ode.kind != OdeKind::PressurelessTheta1) {
        throw DomainError(
            "pressureless_first_integral is defined for the PressurelessTheta1 kind only");
    }
    if (!(a > 0.0)) {
        throw DomainError("pressureless_first_integral: a must be positive");
    }
    return adot + ode.lambda / a;
}

// =============================================================================
// Dormand-Prince 5(4) with dense output
// =============================================================================

namespace {

using Vec2 = std::array<double, 2>;

constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0,
                 kC5 = 8.0 / 9.0;

constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0,
                 kE4 = 71.0 / 1920.0, kE5 = -17253.0 / 339200.0,
                 kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;
constexpr double kD1 = -12715105075.0 / 11282082432.0,
                 kD3 = 87487479700.0 / 32700410799.0,
                 kD4 = -10690763975.0 / 1880347072.0,
                 kD5 = 701980252875.0 / 199316789632.0,
                 kD6 = -1453857185.0 / 822651844.0,
                 kD7 = 69997945.0 / 29380423.0;

struct StepResult {
    Vec2 y_new;
    Vec2 k7;  // derivative at the right endpoint (FSAL)
    double err = 0.0;
    bool state_ok = true;  // false when a stage left the admissible region
};

class Dopri5 {
public:
    Dopri5(const ScalingOde& ode, double rel_tol, double abs_tol)
        : ode_(ode), rel_tol_(rel_tol), abs_tol_(abs_tol),
          allow_nonpositive_(finite_at_vanish(ode)) {}

    bool state_admissible(double a) const {
        return allow_nonpositive_ || a > 0.0;
    }

    Vec2 rhs(const Vec2& y) const {
        return {y[1], acceleration(ode_, y[0], y[1])};
    }

    StepResult step(const Vec2& y, const Vec2& k1, double h) const {
        StepResult r;
        auto stage = [&](const Vec2& ys, Vec2& k) {
            if (!state_admissible(ys[0]) || !std::isfinite(ys[0]) ||
                !std::isfinite(ys[1])) {
                r.state_ok = false;
                return false;
            }
            k = rhs(ys);
            if (!std::isfinite(k[0]) || !std::isfinite(k[1])) {
                r.state_ok = false;
                return false;
            }
            return true;
        };

        Vec2 k2, k3, k4, k5, k6, ys;
        for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * kA21 * k1[i];
        if (!stage(ys, k2)) return r;
        for (int i = 0; i < 2; ++i)
            ys[i] = y[i] + h * (kA31 * k1[i] + kA32 * k2[i]);
        if (!stage(ys, k3)) return r;
        for (int i = 0; i < 2; ++i)
            ys[i] = y[i] + h * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
        if (!stage(ys, k4)) return r;
        for (int i = 0; i < 2; ++i)
            ys[i] = y[i] + h * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] +
                                kA54 * k4[i]);
        if (!stage(ys, k5)) return r;
        for (int i = 0; i < 2; ++i)
            ys[i] = y[i] + h * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                                kA64 * k4[i] + kA65 * k5[i]);
        if (!stage(ys, k6)) return r;
        for (int i = 0; i < 2; ++i)
            r.y_new[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                                     kB5 * k5[i] + kB6 * k6[i]);
        if (!stage(r.y_new, r.k7)) return r;

        double err2 = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                                  kE5 * k5[i] + kE6 * k6[i] + kE7 * r.k7[i]);
            const double sc = abs_tol_ + rel_tol_ * std::max(std::fabs(y[i]),
                                                             std::fabs(r.y_new[i]));
            err2 += (e / sc) * (e / sc);
        }
        r.err = std::sqrt(0.5 * err2);
        k2_ = k2; k3_ = k3; k4_ = k4; k5_ = k5; k6_ = k6;
        return r;
    }

    // Dense coefficients for the last evaluated step (k2..k6 cached).
    void dense_coeffs(const Vec2& y, const Vec2& y_new, const Vec2& k1,
                      const Vec2& k7, double h, Vec2& c1, Vec2& c2, Vec2& c3,
                      Vec2& c4, Vec2& c5) const {
        for (int i = 0; i < 2; ++i) {
            const double ydiff = y_new[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            c1[i] = y[i];
            c2[i] = ydiff;
            c3[i] = bspl;
            c4[i] = ydiff - h * k7[i] - bspl;
            c5[i] = h * (kD1 * k1[i] + kD3 * k3_[i] + kD4 * k4_[i] +
                         kD5 * k5_[i] + kD6 * k6_[i] + kD7 * k7[i]);
        }
    }

private:
    const ScalingOde& ode_;
    double rel_tol_, abs_tol_;
    bool allow_nonpositive_;
    mutable Vec2 k2_{}, k3_{}, k4_{}, k5_{}, k6_{};
};

double initial_step(const Dopri5& solver, const Vec2& y0, const Vec2& k1,
                    double rel_tol, double abs_tol, double t_end) {
    const double sc0 = abs_tol + rel_tol * std::fabs(y0[0]);
    const double sc1 = abs_tol + rel_tol * std::fabs(y0[1]);
    const double d0 = std::hypot(y0[0] / sc0, y0[1] / sc1);
    const double d1 = std::hypot(k1[0] / sc0, k1[1] / sc1);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end);

    Vec2 y1{y0[0] + h0 * k1[0], y0[1] + h0 * k1[1]};
    if (!solver.state_admissible(y1[0])) return std::min(h0 * 1e-3, t_end);
    const Vec2 k2 = solver.rhs(y1);
    const double d2 =
        std::hypot((k2[0] - k1[0]) / sc0, (k2[1] - k1[1]) / sc1) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, t_end});
}

}  // namespace

std::array<double, 2> Trajectory::eval_dense(const DenseStep& s, double theta) const {
    const double th1 = 1.0 - theta;
    std::array<double, 2> out{};
    for (int i = 0; i < 2; ++i) {
        out[i] = s.c1[i] +
                 theta * (s.c2[i] +
                          th1 * (s.c3[i] + theta * (s.c4[i] + th1 * s.c5[i])));
    }
    return out;
}

double Trajectory::vanish_t_lower() const {
    if (!vanished()) throw DomainError("Trajectory: no vanish was detected");
    return vanish_lo_;
}

double Trajectory::vanish_t_upper() const {
    if (!vanished()) throw DomainError("Trajectory: no vanish was detected");
    return vanish_hi_;
}

TrajectorySample Trajectory::at(double t) const {
    if (!(t >= 0.0) || t > t_reach_) {
        std::ostringstream os;
        os << "Trajectory::at: t=" << t << " outside [0, " << t_reach_ << "]";
        if (vanished()) {
            os << " (finite-time vanish bracketed in [" << vanish_lo_ << ", "
               << vanish_hi_ << "])";
        }
        throw DomainError(os.str());
    }
    if (steps_.empty()) {
        return samples_.front();
    }
    // Find the step whose interval [t0, t0+h] contains t.
    std::size_t lo = 0, hi = steps_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (steps_[mid].t0 <= t) lo = mid;
        else hi = mid - 1;
    }
    const DenseStep& s = steps_[lo];
    const double theta =
        std::clamp((t - s.t0) / s.h, 0.0, (t_reach_ - s.t0) / s.h);
    const auto y = eval_dense(s, theta);
    return {t, y[0], y[1]};
}

Trajectory integrate(const ScalingOde& ode, double t_end, double rel_tol,
                     double abs_tol) {
    validate(ode);
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw DomainError("integrate: t_end must be positive and finite");
    }
    if (!(rel_tol > 0.0 && rel_tol < 1.0) || !(abs_tol > 0.0 && abs_tol < 1.0)) {
        throw DomainError("integrate: tolerances must lie in (0, 1)");
    }

    Trajectory traj;
    traj.vanish_level_ = vanish_threshold(ode);

    const Dopri5 solver(ode, rel_tol, abs_tol);
    Vec2 y{ode.a0, ode.a1};
    Vec2 k1 = solver.rhs(y);
    double t = 0.0;
    traj.samples_.push_back({t, y[0], y[1]});

    double h = initial_step(solver, y, k1, rel_tol, abs_tol, t_end);
    const double level = traj.vanish_level_;
    const long max_steps = 4'000'000;
    bool rejected = false;

    for (long n = 0; n < max_steps; ++n) {
        if (t >= t_end) break;

        const double h_floor = 1e-14 * std::max(1.0, std::fabs(t));
        if (h < h_floor) {
            traj.status_ = TrajectoryStatus::StepFailure;
            traj.t_reach_ = t;
            std::ostringstream os;
            os << "step size underflow at t=" << t << " (h=" << h << ")";
            traj.diagnostic_ = os.str();
            return traj;
        }

        // Near the vanish threshold, clamp the step to the local time scale
        // a/|a'| so stages stay in the admissible region.
        if (!finite_at_vanish(ode) && y[0] < 0.1 * ode.a0) {
            const double scale = y[0] / std::max(std::fabs(y[1]), 1e-300);
            h = std::min(h, std::max(0.25 * scale, 4.0 * h_floor));
        }
        h = std::min(h, t_end - t);

        const StepResult st = solver.step(y, k1, h);
        if (!st.state_ok) {
            h *= 0.5;
            rejected = true;
            continue;
        }
        if (st.err > 1.0) {
            const double fac =
                std::max(0.2, 0.75 * std::pow(st.err, -0.2));
            h *= fac;
            rejected = true;
            continue;
        }

        // Accepted step: record dense output, then look for a threshold
        // crossing inside it.
        Trajectory::DenseStep ds;
        ds.t0 = t;
        ds.h = h;
        solver.dense_coeffs(y, st.y_new, k1, st.k7, h, ds.c1, ds.c2, ds.c3,
                            ds.c4, ds.c5);
        traj.steps_.push_back(ds);

        // Scan the interpolant for the first crossing of the vanish level
        // inside the step (the endpoint check alone could miss an interior
        // dip).
        bool crossed = false;
        double theta_lo = 0.0, theta_hi = 1.0;
        for (int j = 1; j <= 16; ++j) {
            const double th = j / 16.0;
            if (traj.eval_dense(ds, th)[0] <= level) {
                theta_hi = th;
                crossed = true;
                break;
            }
            theta_lo = th;
        }

        if (crossed) {
            // Bisect the continuous extension down to near machine width.
            const double t_scale = std::max(1.0, std::fabs(t + h));
            const double width_target =
                4.0 * std::numeric_limits<double>::epsilon() * t_scale;
            while ((theta_hi - theta_lo) * h > width_target) {
                const double mid = 0.5 * (theta_lo + theta_hi);
                if (traj.eval_dense(ds, mid)[0] <= level) theta_hi = mid;
                else theta_lo = mid;
            }
            // Pad by the dense-evaluation noise so the reported bracket is
            // robust to roundoff in the interpolant.
            const double pad = 64.0 * std::numeric_limits<double>::epsilon() * t_scale;
            traj.vanish_lo_ = std::max(t, t + theta_lo * h - pad);
            traj.vanish_hi_ = t + theta_hi * h + pad;
            traj.status_ = TrajectoryStatus::VanishDetected;
            traj.t_reach_ = traj.vanish_lo_;
            if (traj.vanish_lo_ > t) {
                const double theta_pad = (traj.vanish_lo_ - t) / h;
                const auto yv = traj.eval_dense(ds, theta_pad);
                traj.samples_.push_back({traj.vanish_lo_, yv[0], yv[1]});
            }
            return traj;
        }

        t += h;
        y = st.y_new;
        k1 = st.k7;  // FSAL
        traj.samples_.push_back({t, y[0], y[1]});

        // Early vanish certificate, for kinds whose steps would stall
        // before reaching the threshold itself.
        if (y[0] < 0.5 * ode.a0 && vanish_certificate(ode, y[0], y[1])) {
            const double remain = y[0] / -y[1];
            if (remain <= 1e-10 * std::max(1.0, t)) {
                const double pad = 64.0 *
                                   std::numeric_limits<double>::epsilon() *
                                   std::max(1.0, t);
                traj.vanish_lo_ = t;
                traj.vanish_hi_ = t + remain + pad;
                traj.status_ = TrajectoryStatus::VanishDetected;
                traj.t_reach_ = t;
                return traj;
            }
        }

        double fac = 0.75 * std::pow(std::max(st.err, 1e-10), -0.2);
        fac = std::min(fac, rejected ? 1.0 : 5.0);
        fac = std::max(fac, 0.2);
        h *= fac;
        rejected = false;
    }

    if (t >= t_end) {
        traj.status_ = TrajectoryStatus::ReachedTEnd;
        traj.t_reach_ = t_end;
        return traj;
    }
    traj.status_ = TrajectoryStatus::StepFailure;
    traj.t_reach_ = t;
    traj.diagnostic_ = "step budget exhausted";
    return traj;
}

BlowupReport detect_blowup(const ScalingOde& ode, double time_cap, double tol) {
    validate(ode);
    if (!(time_cap > 0.0) || !std::isfinite(time_cap)) {
        throw DomainError("detect_blowup: time_cap must be positive and finite");
    }
    if (!(tol > 0.0)) {
        throw DomainError("detect_blowup: tol must be positive");
    }

    BlowupReport rep;
    if (ode.kind == OdeKind::Classic && ode.lambda > 0.0) {
        const double theta = ode.lambda * std::log(ode.a0) + 0.5 * ode.a1 * ode.a1;
        rep.bound_e_theta_lambda = std::exp(theta / ode.lambda);
    }

    const Trajectory traj = integrate(ode, time_cap, 1e-12, 1e-14);
    switch (traj.status()) {
        case TrajectoryStatus::VanishDetected: {
            rep.t_lower = traj.vanish_t_lower();
            rep.t_upper = traj.vanish_t_upper();
            if (rep.t_upper - rep.t_lower <= tol) {
                rep.status = BlowupStatus::FiniteTimeVanish;
                if (traj.vanish_level() > 0.0) {
                    rep.diagnostic =
                        "bracket refers to the crossing of the positive vanish "
                        "threshold and is a lower-biased estimate of the true "
                        "vanishing time";
                }
            } else {
                rep.status = BlowupStatus::Undetermined;
                rep.diagnostic = "vanish bracket wider than requested tolerance";
            }
            return rep;
        }
        case TrajectoryStatus::ReachedTEnd: {
            const TrajectorySample end = traj.samples().back();
            const double away = std::max(1e-4 * ode.a0, 10.0 * traj.vanish_level());
            if (end.a >= away && end.adot >= 0.0) {
                rep.status = BlowupStatus::GlobalExistenceWitnessed;
            } else {
                rep.status = BlowupStatus::Undetermined;
                std::ostringstream os;
                os << "reached time_cap=" << time_cap << " with a=" << end.a
                   << ", a'=" << end.adot << "; cannot certify either way";
                rep.diagnostic = os.str();
            }
            return rep;
        }
        case TrajectoryStatus::StepFailure: {
            rep.status = BlowupStatus::Undetermined;
            rep.diagnostic = "integration failed: " + traj.diagnostic();
            return rep;
        }
    }
    return rep;
}

}  // namespace rns
