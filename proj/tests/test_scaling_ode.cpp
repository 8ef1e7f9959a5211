#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "radialns/scaling_ode.hpp"
#include "reference_ode.hpp"

using namespace rns;
using testsupport::Rng;

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(classic_ode(1.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(classic_ode(1.0, -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(damped_ode(1.0, -0.5, 1.0, 0.0), DomainError);
    ScalingOde bad = classic_ode(1.0, 1.0, 0.0);
    bad.beta = 0.1;  // beta is not a Classic parameter
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad = pressureless_theta1_ode(1.0, 1.0, 0.0);
    bad.beta = 0.1;
    CHECK_THROWS_AS(validate(bad), DomainError);

    CHECK_THROWS_AS(integrate(classic_ode(0.0, 1.0, 0.0), -1.0, 1e-10, 1e-12),
                    DomainError);
    CHECK_THROWS_AS(integrate(classic_ode(0.0, 1.0, 0.0), 1.0, 2.0, 1e-12),
                    DomainError);
    CHECK_THROWS_AS(detect_blowup(classic_ode(0.0, 1.0, 0.0), 1.0, -1e-8),
                    DomainError);
}

TEST_CASE("lambda = 0 with zero slope stays constant") {
    const auto traj = integrate(classic_ode(0.0, 1.0, 0.0), 10.0, 1e-10, 1e-12);
    CHECK(traj.status() == TrajectoryStatus::ReachedTEnd);
    for (const auto& s : traj.samples()) {
        CHECK(s.a == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::fabs(s.adot) <= 1e-14);
    }
    const auto mid = traj.at(7.3);
    CHECK(mid.a == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lambda = 0 trajectories are exactly linear") {
    const double abs_tol = 1e-12;
    const auto ode = classic_ode(0.0, 1.7, 0.35);
    const auto traj = integrate(ode, 6.0, 1e-10, abs_tol);
    for (const auto& s : traj.samples()) {
        CHECK(std::fabs(s.a - (1.7 + 0.35 * s.t)) <= abs_tol);
    }
}

TEST_CASE("lambda = 0 descending line vanishes at -a0/a1") {
    const auto traj = integrate(classic_ode(0.0, 2.0, -1.0), 10.0, 1e-10, 1e-12);
    REQUIRE(traj.status() == TrajectoryStatus::VanishDetected);
    CHECK(traj.vanish_t_lower() <= 2.0);
    CHECK(traj.vanish_t_upper() >= 2.0);
    CHECK(traj.vanish_t_upper() - traj.vanish_t_lower() <= 1e-10);
    // The vanish level is zero here: the right-hand side is regular, so the
    // true zero crossing itself is bracketed.
    CHECK(traj.vanish_level() == 0.0);
}

TEST_CASE("classic lambda > 0 vanishes; cross-check against independent oracle") {
    const auto ode = classic_ode(1.0, 1.0, 0.0);
    const auto traj = integrate(ode, 5.0, 1e-10, 1e-12);
    REQUIRE(traj.status() == TrajectoryStatus::VanishDetected);
    CHECK(traj.vanish_level() == doctest::Approx(1e-8).epsilon(1e-12));

    // Independent route: time-rescaled fixed-step RK4 with Richardson
    // extrapolation, bracketing the same threshold crossing.
    const double t_oracle = testsupport::vanish_time_oracle(ode, traj.vanish_level());
    REQUIRE(t_oracle > 0.0);
    CHECK(std::fabs(0.5 * (traj.vanish_t_lower() + traj.vanish_t_upper()) -
                    t_oracle) <= 1e-8);

    // The threshold crossing sits just below the true vanishing time
    // sqrt(pi/2) of this descent (bias about level/|a'| ~ 1.6e-9).
    const double t_true = std::sqrt(std::acos(-1.0) / 2.0);
    CHECK(traj.vanish_t_upper() <= t_true);
    CHECK(t_true - traj.vanish_t_lower() <= 1e-6);
}

TEST_CASE("dense output matches an independent integration between samples") {
    const auto ode = classic_ode(0.8, 1.3, -0.2);
    const auto traj = integrate(ode, 1.0, 1e-10, 1e-12);
    for (double t : {0.1, 0.37, 0.52, 0.81, 0.99}) {
        const auto s = traj.at(t);
        const auto ref = testsupport::scale_state_rk4(ode, t, 4000);
        CHECK(std::fabs(s.a - ref[0]) <= 1e-9);
        CHECK(std::fabs(s.adot - ref[1]) <= 1e-9);
    }
}

TEST_CASE("energy integral values and conservation") {
    CHECK(energy_integral(classic_ode(1.0, 1.0, 0.0), 1.0, 0.0) == 0.0);
    CHECK(energy_integral(classic_ode(1.0, std::exp(1.0), 0.0), std::exp(1.0), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(energy_integral(damped_ode(1.0, 0.5, 1.0, 0.0), 1.0, 0.0),
                    DomainError);

    // theta = lambda ln a0 + a1^2 / 2 = 2 for this draw.
    const auto ode = classic_ode(1.0, 1.0, 2.0);
    const auto traj = integrate(ode, 20.0, 1e-10, 1e-12);
    REQUIRE(traj.status() == TrajectoryStatus::VanishDetected);
    for (const auto& s : traj.samples()) {
        if (s.a < 0.01 * ode.a0) continue;  // below the double-precision floor
        CHECK(std::fabs(energy_integral(ode, s.a, s.adot) - 2.0) < 1e-8);
    }
}

TEST_CASE("energy conservation across tolerances and random draws") {
    Rng rng(12345);
    for (double rel_tol : {1e-8, 1e-10}) {
        for (int i = 0; i < 12; ++i) {
            const double lambda = rng.uniform(0.25, 2.0);
            const double a0 = rng.uniform(0.5, 2.0);
            const double a1 = rng.uniform(-1.0, 1.0);
            const auto ode = classic_ode(lambda, a0, a1);
            const double theta = lambda * std::log(a0) + 0.5 * a1 * a1;
            const auto traj = integrate(ode, 8.0, rel_tol, rel_tol * 1e-2);
            const double bound = 10.0 * rel_tol * (1.0 + std::fabs(theta));
            for (const auto& s : traj.samples()) {
                // Below ~0.01 a0 the 1/a sensitivity of ln a pushes the
                // energy check under the double-precision floor.
                if (s.a < 0.01 * a0) continue;
                CHECK(std::fabs(energy_integral(ode, s.a, s.adot) - theta) <= bound);
            }
        }
    }
}

TEST_CASE("classic lambda > 0 obeys the a <= e^(theta/lambda) bound") {
    Rng rng(2024);
    for (int i = 0; i < 10; ++i) {
        const double lambda = rng.uniform(0.3, 2.0);
        const double a0 = rng.uniform(0.5, 2.0);
        const double a1 = rng.uniform(-1.0, 1.0);
        const auto ode = classic_ode(lambda, a0, a1);
        const double theta = lambda * std::log(a0) + 0.5 * a1 * a1;
        const double bound = std::exp(theta / lambda);
        const auto traj = integrate(ode, 20.0, 1e-10, 1e-12);
        for (const auto& s : traj.samples()) {
            CHECK(s.a <= bound * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("pressureless first integral") {
    CHECK(pressureless_first_integral(pressureless_theta1_ode(1.0, 1.0, 0.0), 1.0,
                                      0.0) == doctest::Approx(1.0));
    // lambda = 0 reduces to linear motion: the constant is a' itself.
    CHECK(pressureless_first_integral(pressureless_theta1_ode(0.0, 2.0, -0.7), 2.0,
                                      -0.7) == doctest::Approx(-0.7));
    CHECK_THROWS_AS(pressureless_first_integral(classic_ode(1.0, 1.0, 0.0), 1.0, 0.0),
                    DomainError);

    const auto ode = pressureless_theta1_ode(1.0, 2.0, -1.0);
    const double constant = -1.0 + 1.0 / 2.0;
    const auto traj = integrate(ode, 20.0, 1e-12, 1e-14);
    for (const auto& s : traj.samples()) {
        if (s.a < 0.01 * ode.a0) continue;
        CHECK(std::fabs(pressureless_first_integral(ode, s.a, s.adot) - constant) <=
              1e-9);
    }
}

TEST_CASE("pressureless theta=1 descent vanishes at the separable-solution time") {
    // a' = -lambda/a + (a1 + lambda/a0); for lambda=1, a0=1, a1=-1/2 the
    // descent reaches zero at 4 ln 2 - 2 (closed form by separation).
    const auto ode = pressureless_theta1_ode(1.0, 1.0, -0.5);
    const auto traj = integrate(ode, 10.0, 1e-12, 1e-14);
    REQUIRE(traj.status() == TrajectoryStatus::VanishDetected);
    const double t_true = 4.0 * std::log(2.0) - 2.0;
    CHECK(traj.vanish_t_lower() <= t_true + 1e-12);
    CHECK(traj.vanish_t_upper() >= t_true - 1e-9);
    CHECK(traj.vanish_t_upper() - traj.vanish_t_lower() <= 1e-8);
}

TEST_CASE("pressureless theta=1 with positive slope grows globally") {
    // a' = -1/a + 2 > 0 at a = 1 and increases with a: no vanish.
    const auto rep = detect_blowup(pressureless_theta1_ode(1.0, 1.0, 1.0), 10.0, 1e-8);
    CHECK(rep.status == BlowupStatus::GlobalExistenceWitnessed);

    // Independent check of the growth at t = 5.
    const auto ref = testsupport::scale_state_rk4(pressureless_theta1_ode(1.0, 1.0, 1.0),
                                                  5.0, 20000);
    const auto traj = integrate(pressureless_theta1_ode(1.0, 1.0, 1.0), 5.0);
    CHECK(traj.at(5.0).a == doctest::Approx(ref[0]).epsilon(1e-9));
}

TEST_CASE("detect_blowup brackets and bound reporting") {
    SUBCASE("linear vanish at t = 3") {
        const auto rep = detect_blowup(classic_ode(0.0, 3.0, -1.0), 10.0, 1e-8);
        REQUIRE(rep.status == BlowupStatus::FiniteTimeVanish);
        CHECK(rep.t_lower <= 3.0);
        CHECK(rep.t_upper >= 3.0);
        CHECK(rep.t_upper - rep.t_lower <= 1e-8);
        CHECK_FALSE(rep.bound_e_theta_lambda.has_value());
    }
    SUBCASE("classic lambda=1 reports the e^(theta/lambda) bound") {
        const auto rep = detect_blowup(classic_ode(1.0, 1.0, 0.0), 5.0, 1e-8);
        REQUIRE(rep.status == BlowupStatus::FiniteTimeVanish);
        REQUIRE(rep.bound_e_theta_lambda.has_value());
        CHECK(*rep.bound_e_theta_lambda == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("expanding damped motion is witnessed as global") {
        const auto rep = detect_blowup(damped_ode(-1.0, 0.5, 1.0, 0.0), 10.0, 1e-8);
        CHECK(rep.status == BlowupStatus::GlobalExistenceWitnessed);
        CHECK_FALSE(rep.bound_e_theta_lambda.has_value());
    }
    SUBCASE("stalling general-damped descent is undetermined") {
        // a'' = -a'/a^5 with a(0)=1, a'(0)=-1/2 stalls at a* = 3^(-1/4).
        const auto ode = general_damped_ode(1.0, 0.0, 5.0, 1.0, -0.5);
        const auto rep = detect_blowup(ode, 50.0, 1e-8);
        CHECK(rep.status == BlowupStatus::Undetermined);
        const auto traj = integrate(ode, 50.0, 1e-12, 1e-14);
        CHECK(traj.at(50.0).a ==
              doctest::Approx(std::pow(3.0, -0.25)).epsilon(1e-9));
    }
}

TEST_CASE("restart reproduces a single integration") {
    const auto ode = classic_ode(1.0, 2.0, 0.3);
    const double rel_tol = 1e-10, abs_tol = 1e-12;
    const auto first = integrate(ode, 0.5, rel_tol, abs_tol);
    const auto s1 = first.at(0.5);
    const auto second = integrate(classic_ode(1.0, s1.a, s1.adot), 0.4, rel_tol, abs_tol);
    const auto direct = integrate(ode, 0.9, rel_tol, abs_tol);
    const double diff = std::fabs(second.at(0.4).a - direct.at(0.9).a);
    CHECK(diff <= 10.0 * (rel_tol * direct.at(0.9).a + abs_tol));
    // Frozen reference from an independent high-order integration.
    CHECK(direct.at(0.9).a == doctest::Approx(2.0730649826508496).epsilon(1e-10));
}

TEST_CASE("trajectory sample invariants and domain errors") {
    const auto traj = integrate(classic_ode(1.0, 1.0, 0.0), 5.0, 1e-10, 1e-12);
    double prev = -1.0;
    for (const auto& s : traj.samples()) {
        CHECK(s.t > prev);
        CHECK(s.a > 0.0);
        prev = s.t;
    }
    CHECK_THROWS_AS(traj.at(traj.t_reach() + 0.1), DomainError);
    CHECK_THROWS_AS(traj.at(-0.1), DomainError);
    CHECK_THROWS_AS(integrate(classic_ode(0.0, 1.0, 0.0), 1.0, 1e-10, 1e-12)
                        .vanish_t_lower(),
                    DomainError);
}
