#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "npr/maps.hpp"

using namespace npr;

TEST_CASE("quadratic map basics") {
    QuadraticMap p(0.25);
    REQUIRE(std::abs(p.value(cplx(0, 0))) == 0.0);
    REQUIRE(std::abs(p.derivative(cplx(0, 0)) - cplx(0, 1)) < 1e-15);  // e^{i pi/2} = i
    REQUIRE(std::abs(std::abs(p.multiplier()) - 1.0) < 1e-15);

    // fixed point 1 - e^{2 pi i alpha}, solved from lambda z + z^2 = z
    QuadraticMap q(0.02);
    const cplx fp = 1.0 - q.multiplier();
    REQUIRE(std::abs(q.value(fp) - fp) < 1e-15);
    REQUIRE(std::abs(q.sigma() - fp) < 1e-16);
}

TEST_CASE("model cubic critical data") {
    REQUIRE(std::abs(ModelCubic::value(cplx(-1.0 / 3.0, 0)) - cplx(-4.0 / 27.0, 0)) < 1e-16);
    REQUIRE(std::abs(ModelCubic::value(cplx(-1, 0))) < 1e-16);
    REQUIRE(std::abs(ModelCubic::derivative(cplx(-1.0 / 3.0, 0))) < 1e-16);
    REQUIRE(std::abs(ModelCubic::derivative(cplx(-1, 0))) < 1e-16);
}

TEST_CASE("canonical map h = lambda P on U") {
    CanonicalMap h(0.02);
    REQUIRE(std::abs(h.value(cplx(0, 0))) == 0.0);
    REQUIRE(std::abs(h.derivative(cplx(0, 0)) - h.multiplier()) < 1e-15);
    REQUIRE(std::abs(h.critical_point() - cplx(-1.0 / 3.0, 0)) < 1e-16);
    REQUIRE(std::abs(h.value(h.critical_point()) -
                     h.multiplier() * cplx(-4.0 / 27.0, 0)) < 1e-16);
    // derivative vanishes at the critical point for both families
    QuadraticMap q(0.02);
    REQUIRE(std::abs(q.derivative(q.critical_point())) < 1e-13);
    REQUIRE(std::abs(h.derivative(h.critical_point())) < 1e-13);
}

TEST_CASE("sigma fixed point: closed forms, Newton, asymptotics") {
    QuadraticMap q(0.02);
    // Newton from the asymptotic seed agrees with the closed form
    const cplx f2 = q.second_derivative(cplx(0, 0)) / q.multiplier();
    const cplx seed = cplx(0, -4.0 * kPi * q.alpha()) / f2;
    const cplx newton = sigma_by_newton(q, seed);
    REQUIRE(std::abs(newton - q.sigma()) < 1e-14);

    CanonicalMap h(0.02);
    REQUIRE(std::abs(h.value(h.sigma()) - h.sigma()) < 1e-12);
    // |sigma - asymptotic seed| / |sigma| stays under 15% at alpha = 0.02;
    // seed = -4 pi alpha i / f''(0) with f = P, f''(0) = 4
    const cplx hseed = cplx(0, -kPi * h.alpha());
    REQUIRE(std::abs(h.sigma() - hseed) / std::abs(h.sigma()) < 0.15);
    // Newton from several nearby seeds lands on the same root
    for (int k = 0; k < 5; ++k) {
        const cplx jseed = hseed * (1.0 + 0.3 * std::cos(k)) + 1e-3 * unit_circle(k / 5.0);
        REQUIRE(std::abs(sigma_by_newton(h, jseed) - h.sigma()) < 1e-10);
    }

    // sigma -> 0 monotonically along alpha = 1/n
    double prev = 1e9;
    for (int n = 10; n <= 60; n += 10) {
        QuadraticMap qa(1.0 / n);
        const double s = std::abs(qa.sigma());
        REQUIRE(s < prev);
        prev = s;
    }
}

TEST_CASE("fixed point residuals") {
    for (double a : {0.02, 0.01, 0.005}) {
        QuadraticMap q(a);
        REQUIRE(std::abs(q.value(q.sigma()) - q.sigma()) < 1e-12);
        CanonicalMap h(a);
        REQUIRE(std::abs(h.value(h.sigma()) - h.sigma()) < 1e-12);
    }
}

TEST_CASE("critical orbit") {
    QuadraticMap q(0.25);
    auto o1 = critical_orbit(q, 1);
    // first entry is P(cp) = -lambda^2/4, by direct substitution
    const cplx lam = q.multiplier();
    REQUIRE(o1.points.size() == 1);
    REQUIRE(std::abs(o1.points[0] - (-lam * lam / 4.0)) < 1e-15);

    CanonicalMap h(0.1);
    auto oc = critical_orbit(h, 1);
    REQUIRE(std::abs(oc.points[0] - (-4.0 / 27.0) * h.multiplier()) < 1e-15);

    auto o0 = critical_orbit(q, 0);
    REQUIRE(o0.points.empty());
    REQUIRE_FALSE(o0.escaped);
}

TEST_CASE("domain U membership") {
    REQUIRE(DomainU::contains(cplx(0, 0)));
    REQUIRE(DomainU::contains(cplx(-1.0 / 3.0, 0)));
    REQUIRE_FALSE(DomainU::contains(cplx(-1, 0)));

    // boundary consistency: images of ellipse boundary points are ambiguous
    // within the tolerance band
    for (int k = 0; k < 64; ++k) {
        const double t = kTwoPi * k / 64;
        const cplx w(-0.18 + 1.24 * std::cos(t), 1.04 * std::sin(t));
        const cplx z = -4.0 * w / ((1.0 + w) * (1.0 + w));
        REQUIRE(DomainU::near_boundary(z, 1e-9));
    }
}

TEST_CASE("domain V membership and U closure inside V") {
    DomainV v;
    // defining inequality
    REQUIRE_FALSE(v.contains(cplx(50.0, 0.0)));
    REQUIRE(v.contains(cplx(0.2, 0.1)));
    REQUIRE_FALSE(v.contains(cplx(-2.0, 0.0)));              // slit
    REQUIRE_FALSE(v.contains(cplx(-1.0, 1e-5)));             // blob around -1

    // sampled boundary of U stays well inside V
    for (int k = 0; k < 128; ++k) {
        const double t = kTwoPi * k / 128;
        const cplx w(-0.18 + 1.24 * std::cos(t), 1.04 * std::sin(t));
        const cplx z = -4.0 * w / ((1.0 + w) * (1.0 + w));
        REQUIRE(v.contains(z));
    }
}

TEST_CASE("quadratic u is identically one") {
    QuadraticMap q(0.02);
    std::mt19937_64 rng(3);
    auto urand = [&] { return 2.0 * (rng() / double(UINT64_MAX)) - 1.0; };
    for (int i = 0; i < 100; ++i) {
        const cplx z(2.0 * urand(), 2.0 * urand());
        const cplx den = z * (z - q.sigma());
        if (std::abs(den) < 1e-6) continue;
        const cplx u = (q.value(z) - z) / den;
        REQUIRE(std::abs(u - 1.0) < 1e-12);
    }
}
