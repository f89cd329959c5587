#include <catch2/catch_amalgamated.hpp>

#include "npr/model.hpp"

using namespace npr;

namespace {

struct ModelFixture {
    QuadraticMap map{0.02};
    Covering cov{map};
    LiftedMap F{cov};
    // anchor: mid column between lattice exclusions, Im A = 0
    ModelH H{F, cplx(25.0, 0.0), 3.0 / 0.02};
};

ModelFixture& fixture() {
    static ModelFixture f;
    return f;
}

}  // namespace

TEST_CASE("model anchor clearance") {
    auto& f = fixture();
    REQUIRE(f.H.r_eff() > 0.4);
}

TEST_CASE("H(0,t) = A + it exactly, H(1,t) = F(A+it) to rounding") {
    auto& f = fixture();
    for (double t : {0.0, 0.7, 3.0, 20.0, 80.0}) {
        REQUIRE(std::abs(f.H.value(0.0, t) - (f.H.anchor() + cplx(0.0, t))) == 0.0);
        REQUIRE(std::abs(f.H.value(1.0, t) - f.F.value(f.H.anchor() + cplx(0.0, t))) < 1e-12);
    }
}

TEST_CASE("coefficient identities") {
    auto& f = fixture();
    for (double t : {0.0, 1.3, 11.0, 60.0}) {
        const auto c = f.H.coefficients(t);
        REQUIRE(c.a[0] + c.a[2] + c.a[4] == Catch::Approx(1.0).margin(1e-15));
        REQUIRE(c.b[0] + c.b[2] + c.b[4] == Catch::Approx(0.0).margin(1e-15));
        // all deviations from the translation profile are small and decay
        for (int j = 1; j < 5; ++j) {
            REQUIRE(std::abs(c.a[j]) < 0.3);
            REQUIRE(std::abs(c.b[j]) < 0.3);
        }
    }
}

TEST_CASE("seam checks and derivative decay") {
    auto& f = fixture();
    const double alpha = f.map.alpha();
    auto rep = model_checks(f.H, 2.0 / alpha);

    REQUIRE(rep.seam_value < 1e-12);

    // one-sided mismatches scale ~ linearly with the step
    REQUIRE(rep.seams.size() == 2);
    REQUIRE(rep.seams[0].first < 10.0 * rep.seams[0].step);
    REQUIRE(rep.seams[1].first < 10.0 * rep.seams[1].step);
    REQUIRE(rep.pass_seam_scaling);

    REQUIRE_FALSE(rep.ds_decay.degenerate);
    REQUIRE(rep.ds_decay.slope == Catch::Approx(-kTwoPi * alpha).epsilon(0.10));
    REQUIRE(rep.dt_decay.slope == Catch::Approx(-kTwoPi * alpha).epsilon(0.10));

    // far field: dH/dt ~ i
    REQUIRE(rep.dt_far < 1e-8);

    // second partials decay as well (sign of the fitted slope)
    REQUIRE(rep.dss_decay.slope < -0.5 * kTwoPi * alpha);
    REQUIRE(rep.dtt_decay.slope < -0.5 * kTwoPi * alpha);
    REQUIRE(rep.dst_decay.slope < -0.5 * kTwoPi * alpha);
}

TEST_CASE("anchor violating the clearance is rejected") {
    auto& f = fixture();
    REQUIRE_THROWS_AS(ModelH(f.F, cplx(1.0, 0.0), 10.0), DomainError);
}
