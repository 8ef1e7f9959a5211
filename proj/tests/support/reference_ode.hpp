#pragma once

// Test-only reference computations, kept independent of the library's own
// integration and quadrature paths.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>

#include "radialns/scaling_ode.hpp"

namespace testsupport {

// Deterministic uniform generator (splitmix64 with manual mapping; the
// standard distributions are implementation-defined and would break frozen
// expected values).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next() %
                                     static_cast<std::uint64_t>(hi - lo + 1));
    }

    double next01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// Classical fixed-step RK4 on a K-dimensional first-order system.
template <std::size_t K, typename F>
std::array<double, K> rk4_fixed(const F& rhs, std::array<double, K> y,
                                double t0, double t1, int n_steps) {
    const double h = (t1 - t0) / n_steps;
    double t = t0;
    for (int i = 0; i < n_steps; ++i) {
        const auto k1 = rhs(t, y);
        std::array<double, K> y2;
        for (std::size_t k = 0; k < K; ++k) y2[k] = y[k] + 0.5 * h * k1[k];
        const auto k2 = rhs(t + 0.5 * h, y2);
        for (std::size_t k = 0; k < K; ++k) y2[k] = y[k] + 0.5 * h * k2[k];
        const auto k3 = rhs(t + 0.5 * h, y2);
        for (std::size_t k = 0; k < K; ++k) y2[k] = y[k] + h * k3[k];
        const auto k4 = rhs(t + h, y2);
        for (std::size_t k = 0; k < K; ++k) {
            y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        t += h;
    }
    return y;
}

// Scale-factor state at a fixed time by RK4 with Richardson extrapolation
// (h and h/2, fifth-order combination).
inline std::array<double, 2> scale_state_rk4(const rns::ScalingOde& ode,
                                             double t, int n_steps) {
    const auto rhs = [&ode](double, const std::array<double, 2>& y) {
        return std::array<double, 2>{y[1], rns::acceleration(ode, y[0], y[1])};
    };
    const auto coarse = rk4_fixed<2>(rhs, {ode.a0, ode.a1}, 0.0, t, n_steps);
    const auto fine = rk4_fixed<2>(rhs, {ode.a0, ode.a1}, 0.0, t, 2 * n_steps);
    return {(16.0 * fine[0] - coarse[0]) / 15.0,
            (16.0 * fine[1] - coarse[1]) / 15.0};
}

namespace detail {

// Time at which a(t) crosses `level` going down, for a singular descent.
// Integrates the time-rescaled system ds = dt / a (state (t, a, a') in the
// regular variable s), where the approach to a -> 0 is only logarithmic, so
// a fixed step in s resolves the crossing sharply.
inline double sundman_crossing(const rns::ScalingOde& ode, double level,
                               double h_s) {
    const auto rhs = [&ode](double, const std::array<double, 3>& y) {
        return std::array<double, 3>{
            y[1], y[1] * y[2], y[1] * rns::acceleration(ode, y[1], y[2])};
    };
    std::array<double, 3> y{0.0, ode.a0, ode.a1};
    double s = 0.0;
    const double s_max = 1e5;
    while (s < s_max) {
        const auto y_prev = y;
        y = rk4_fixed<3>(rhs, y, s, s + h_s, 1);
        s += h_s;
        if (y[1] <= level) {
            // Bisect the crossing inside the last step.
            double lo = 0.0, hi = h_s;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi);
                const auto ym = rk4_fixed<3>(rhs, y_prev, s - h_s, s - h_s + mid, 1);
                (ym[1] <= level ? hi : lo) = mid;
            }
            const auto yc = rk4_fixed<3>(rhs, y_prev, s - h_s, s - h_s + lo, 1);
            return yc[0];
        }
    }
    return -1.0;  // no crossing found
}

}  // namespace detail

// Independent vanish-time oracle: Sundman-rescaled RK4 plus Richardson
// extrapolation of the crossing time.
inline double vanish_time_oracle(const rns::ScalingOde& ode, double level,
                                 double h_s = 1e-3) {
    const double coarse = detail::sundman_crossing(ode, level, h_s);
    const double fine = detail::sundman_crossing(ode, level, 0.5 * h_s);
    if (coarse < 0.0 || fine < 0.0) return -1.0;
    return (16.0 * fine - coarse) / 15.0;
}

// Reference solution of y'(x) y(x)^n = xi x, y(0) = alpha > 0, by RK4 on
// y' = xi x / y^n.
inline double separable_profile_oracle(double n, double xi, double alpha,
                                       double x_end, int n_steps = 20000) {
    const auto rhs = [n, xi](double x, const std::array<double, 1>& y) {
        return std::array<double, 1>{xi * x / std::pow(y[0], n)};
    };
    const auto coarse = rk4_fixed<1>(rhs, {alpha}, 0.0, x_end, n_steps);
    const auto fine = rk4_fixed<1>(rhs, {alpha}, 0.0, x_end, 2 * n_steps);
    return (16.0 * fine[0] - coarse[0]) / 15.0;
}

// Closed-form Gaussian-moment mass for the exponential-profile families with
// lambda < 0:  coeff * e^alpha * (1/2) Gamma(N/2) (2 K_eff / |lambda|)^(N/2).
inline double gaussian_mass_oracle(double surface_coeff, int dim_n, double k_eff,
                                   double lambda, double alpha) {
    const double moment = 0.5 * std::tgamma(0.5 * dim_n) *
                          std::pow(2.0 * k_eff / std::fabs(lambda), 0.5 * dim_n);
    return surface_coeff * std::exp(alpha) * moment;
}

}  // namespace testsupport
