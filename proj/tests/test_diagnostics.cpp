#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "radialns/diagnostics.hpp"
#include "reference_ode.hpp"

using namespace rns;
using testsupport::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

FamilyParams isothermal(int n, double k, double lambda, double alpha, double a0,
                        double a1) {
    FamilyParams p;
    p.variant = FamilyVariant::IsothermalNS;
    p.dim_n = n;
    p.pressure_k = k;
    p.lambda = lambda;
    p.alpha = alpha;
    p.a0 = a0;
    p.a1 = a1;
    return p;
}

}  // namespace

TEST_CASE("surface coefficients") {
    CHECK(surface_coefficient(1, SurfaceMode::Standard) == 1.0);
    CHECK(surface_coefficient(2, SurfaceMode::Standard) ==
          doctest::Approx(2.0 * kPi).epsilon(1e-15));
    CHECK(surface_coefficient(1, SurfaceMode::Alternate) == 1.0);
    CHECK(surface_coefficient(2, SurfaceMode::Alternate) ==
          doctest::Approx(2.0 * kPi).epsilon(1e-15));

    // The two conventions agree at N = 3 (both 4 pi)...
    CHECK(surface_coefficient(3, SurfaceMode::Standard) ==
          doctest::Approx(4.0 * kPi).epsilon(1e-14));
    CHECK(surface_coefficient(3, SurfaceMode::Alternate) ==
          doctest::Approx(4.0 * kPi).epsilon(1e-14));

    // ...and disagree from N = 4 on: 2 pi^2 vs 4 pi^2.
    CHECK(surface_coefficient(4, SurfaceMode::Standard) ==
          doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
    CHECK(surface_coefficient(4, SurfaceMode::Alternate) ==
          doctest::Approx(4.0 * kPi * kPi).epsilon(1e-14));

    // N = 5 via the Gamma function: 2 pi^2.5 / Gamma(2.5) = 8 pi^2 / 3 and
    // 15 V(5) = 8 pi^2.
    CHECK(surface_coefficient(5, SurfaceMode::Standard) ==
          doctest::Approx(8.0 * kPi * kPi / 3.0).epsilon(1e-14));
    CHECK(surface_coefficient(5, SurfaceMode::Alternate) ==
          doctest::Approx(8.0 * kPi * kPi).epsilon(1e-14));

    CHECK_THROWS_AS(surface_coefficient(0), DomainError);
}

TEST_CASE("mass classification by the sign of lambda") {
    CHECK(total_mass(SolutionFamily::create(isothermal(3, 1.0, 1.0, 0.0, 1.0, 0.0)),
                     0.0, 1e-9)
              .kind == MassResult::Kind::Divergent);
    CHECK(total_mass(SolutionFamily::create(isothermal(2, 1.0, 0.0, 0.0, 1.0, 0.0), 1.0),
                     0.0, 1e-9)
              .kind == MassResult::Kind::Divergent);
    CHECK(total_mass(SolutionFamily::create(isothermal(2, 1.0, -2.0, 0.0, 1.0, 0.0), 1.0),
                     0.0, 1e-9)
              .kind == MassResult::Kind::Finite);
}

TEST_CASE("Gaussian mass: N=2, K=1, lambda=-2 gives exactly pi") {
    auto fam = SolutionFamily::create(isothermal(2, 1.0, -2.0, 0.0, 1.0, 0.0), 1.0);
    const MassResult m = total_mass(fam, 0.0, 1e-10);
    REQUIRE(m.kind == MassResult::Kind::Finite);
    CHECK(std::fabs(m.value - kPi) / kPi <= 1e-8);
}

TEST_CASE("very negative alpha makes the mass arbitrarily small") {
    auto fam = SolutionFamily::create(isothermal(2, 1.0, -2.0, -20.0, 1.0, 0.0), 1.0);
    const MassResult m = total_mass(fam, 0.0, 1e-9);
    REQUIRE(m.kind == MassResult::Kind::Finite);
    CHECK(m.value > 0.0);
    CHECK(m.value < 1e-7);
    CHECK(m.value == doctest::Approx(kPi * std::exp(-20.0)).epsilon(1e-7));
}

TEST_CASE("quadrature matches the Gamma-moment closed form") {
    for (int n : {1, 2, 3, 4, 5}) {
        for (double k : {0.5, 1.0, 2.0}) {
            for (double lambda : {-0.5, -1.0, -2.0}) {
                auto fam = SolutionFamily::create(isothermal(n, k, lambda, 0.3, 1.0, 0.0), 1.0);
                const double quad_tol = 1e-9;
                const MassResult m = total_mass(fam, 0.0, quad_tol);
                REQUIRE(m.kind == MassResult::Kind::Finite);
                const double oracle = testsupport::gaussian_mass_oracle(
                    surface_coefficient(n), n, k, lambda, 0.3);
                CHECK(std::fabs(m.value - oracle) / oracle <= 10.0 * quad_tol);
            }
        }
    }
}

TEST_CASE("mass is conserved in time") {
    // The quadrature runs on the time-evolved fields; the value must not
    // depend on t while the trajectory lives.
    auto fam = SolutionFamily::create(isothermal(3, 1.0, -1.5, 0.2, 1.0, 0.4), 1.0);
    const double m0 = total_mass(fam, 0.0, 1e-9).value;
    const double m1 = total_mass(fam, 0.8, 1e-9).value;
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-7));
}

TEST_CASE("truncated mass is monotone in r_max") {
    auto fam = SolutionFamily::create(isothermal(2, 1.0, 1.0, 0.0, 1.0, 0.0));
    double prev = 0.0;
    for (double r_max : {0.5, 1.0, 1.5, 2.0}) {
        const MassResult m = total_mass(fam, 0.0, 1e-9, r_max);
        REQUIRE(m.kind == MassResult::Kind::Truncated);
        CHECK(m.r_max == r_max);
        CHECK(m.value >= prev);
        prev = m.value;
    }
}

TEST_CASE("theta != 1 mass by support shape") {
    SUBCASE("compact support, theta = 2: closed form 2 sqrt(2)/3") {
        FamilyParams p;
        p.variant = FamilyVariant::PressurelessThetaNe1;
        p.dim_n = 1;
        p.kappa = 1.0;
        p.theta = 2.0;
        p.lambda = 2.0;
        p.alpha = 1.0;
        p.a0 = 1.0;
        p.a1 = -0.2;
        auto fam = SolutionFamily::create(p, 0.5);
        const MassResult m = total_mass(fam, 0.0, 1e-10);
        REQUIRE(m.kind == MassResult::Kind::Finite);
        CHECK(m.value == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-8));
    }
    SUBCASE("full support, theta = 2: polynomial growth diverges") {
        FamilyParams p;
        p.variant = FamilyVariant::PressurelessThetaNe1;
        p.dim_n = 1;
        p.kappa = 1.0;
        p.theta = 2.0;
        p.lambda = -2.0;
        p.alpha = 1.0;
        p.a0 = 1.0;
        p.a1 = -0.2;
        auto fam = SolutionFamily::create(p, 0.5);
        CHECK(total_mass(fam, 0.0, 1e-9).kind == MassResult::Kind::Divergent);
    }
    SUBCASE("compact support, theta < 1: non-integrable edge diverges") {
        FamilyParams p;
        p.variant = FamilyVariant::PressurelessThetaNe1;
        p.dim_n = 2;
        p.kappa = 1.0;
        p.theta = 0.5;
        p.lambda = -1.0;
        p.alpha = 1.0;
        p.a0 = 1.0;
        p.a1 = -0.2;
        auto fam = SolutionFamily::create(p, 0.5);
        CHECK(total_mass(fam, 0.0, 1e-9).kind == MassResult::Kind::Divergent);
    }
    SUBCASE("full support, theta = 0.5, N = 1: decaying tail, value pi sqrt(2)/4") {
        FamilyParams p;
        p.variant = FamilyVariant::PressurelessThetaNe1;
        p.dim_n = 1;
        p.kappa = 1.0;
        p.theta = 0.5;
        p.lambda = 1.0;
        p.alpha = 1.0;
        p.a0 = 1.0;
        p.a1 = -0.2;
        auto fam = SolutionFamily::create(p, 0.5);
        const MassResult m = total_mass(fam, 0.0, 1e-9);
        REQUIRE(m.kind == MassResult::Kind::Finite);
        CHECK(m.value == doctest::Approx(kPi * std::sqrt(2.0) / 4.0).epsilon(1e-7));
    }
}

TEST_CASE("center density") {
    auto fam = SolutionFamily::create(isothermal(3, 1.0, 1.0, 0.4, 2.0, 0.0));
    CHECK(center_density(fam, 0.0) ==
          doctest::Approx(std::exp(0.4) / 8.0).epsilon(1e-13));

    SUBCASE("constant when the scale factor is static") {
        auto still = SolutionFamily::create(isothermal(2, 1.0, 0.0, 0.1, 1.5, 0.0), 4.0);
        CHECK(center_density(still, 0.0) ==
              doctest::Approx(center_density(still, 3.5)).epsilon(1e-13));
    }
    SUBCASE("strictly increasing toward blowup") {
        auto collapsing = SolutionFamily::create(isothermal(3, 1.0, 1.0, 0.0, 1.0, 0.0));
        REQUIRE(collapsing.trajectory().vanished());
        const double t_hi = 0.9 * collapsing.trajectory().vanish_t_lower();
        double prev = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double v = center_density(collapsing, t_hi * i / 10.0);
            CHECK(v > prev);
            prev = v;
        }
    }
    SUBCASE("center density times a^N is constant") {
        auto fam2 = SolutionFamily::create(isothermal(3, 1.0, -0.7, 0.25, 1.0, 0.5), 2.0);
        const double ref = std::exp(0.25);
        for (double t : {0.0, 0.7, 1.9}) {
            const double a = fam2.state_at(t).a;
            CHECK(center_density(fam2, t) * std::pow(a, 3) ==
                  doctest::Approx(ref).epsilon(1e-12));
        }
    }
    SUBCASE("theta != 1 center is alpha / a^N; solid core excluded") {
        FamilyParams p;
        p.variant = FamilyVariant::PressurelessThetaNe1;
        p.dim_n = 2;
        p.kappa = 1.0;
        p.theta = 2.0;
        p.lambda = 1.0;
        p.alpha = 0.8;
        p.a0 = 1.0;
        p.a1 = -0.1;
        auto ne1 = SolutionFamily::create(p, 0.5);
        const double a = ne1.state_at(0.2).a;
        CHECK(center_density(ne1, 0.2) ==
              doctest::Approx(0.8 / (a * a)).epsilon(1e-13));

        FamilyParams sc;
        sc.variant = FamilyVariant::SolidCore2D;
        sc.dim_n = 2;
        sc.pressure_k = 1.0;
        sc.lambda = 1.0;
        sc.alpha = 1.0;
        sc.core_mass = 1.0;
        sc.core_radius = 0.5;
        auto solid = SolutionFamily::create(sc, 0.5);
        CHECK_THROWS_AS(center_density(solid, 0.1), DomainError);
    }
}

TEST_CASE("blowup rate products") {
    SUBCASE("linear collapse has closed-form products") {
        // a = 1 - t exactly; exponent 1.5 < N = 2 gives products
        // e^alpha (t* - t)^(-1/2), increasing without bound.
        auto fam = SolutionFamily::create(isothermal(2, 1.0, 0.0, 0.3, 1.0, -1.0), 5.0);
        const auto est = blowup_rate_estimate(fam, 1.5, 24);
        CHECK(est.verdict == RateVerdict::BoundedBelow);
        CHECK(est.t_star == doctest::Approx(1.0).epsilon(1e-10));
        for (const auto& s : est.products) {
            const double tau = est.t_star - s.t;
            CHECK(s.product ==
                  doctest::Approx(std::exp(0.3) / std::sqrt(tau)).epsilon(1e-6));
        }
    }
    SUBCASE("collapsing isothermal family, exponent below N") {
        auto fam = SolutionFamily::create(isothermal(3, 1.0, 1.0, 0.0, 1.0, 0.0));
        const auto est = blowup_rate_estimate(fam, 2.5, 28);
        CHECK(est.verdict == RateVerdict::BoundedBelow);
        CHECK(est.products.back().product > 10.0 * est.products.front().product);
        // Bracket-edge proxies agree here.
        CHECK(est.verdict_at_t_lower == RateVerdict::BoundedBelow);
        CHECK(est.verdict_at_t_upper == RateVerdict::BoundedBelow);
    }
    SUBCASE("exponent at N is not bounded below (log-corrected decay)") {
        auto fam = SolutionFamily::create(isothermal(3, 1.0, 1.0, 0.0, 1.0, 0.0));
        const auto est = blowup_rate_estimate(fam, 3.0 - 1e-12, 28);
        CHECK(est.verdict == RateVerdict::Inconclusive);
    }
    SUBCASE("preconditions") {
        auto fam = SolutionFamily::create(isothermal(3, 1.0, 1.0, 0.0, 1.0, 0.0));
        CHECK_THROWS_AS(blowup_rate_estimate(fam, 3.5, 28), DomainError);
        auto global = SolutionFamily::create(isothermal(3, 1.0, -1.0, 0.0, 1.0, 0.0), 2.0);
        CHECK_THROWS_AS(blowup_rate_estimate(global, 2.5, 28), DomainError);
    }
}
