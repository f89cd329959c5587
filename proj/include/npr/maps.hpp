#pragma once

// The dynamical maps: the quadratic family P_alpha(z) = e^{2 pi i alpha} z + z^2,
// the model cubic P(z) = z(1+z)^2 with its ellipse-based domain U, the larger
// domain V, and the canonical composite h = e^{2 pi i alpha} P restricted to U.
//
// Maps expose value/derivative data plus the two distinguished fixed points
// 0 and sigma (the one that collides with 0 as alpha -> 0), and the factored
// form u(z) = (h(z)-z)/(z(z-sigma)) used by the lift.

#include <memory>
#include <optional>

#include "npr/core.hpp"

namespace npr {

class AnalyticMap {
public:
    virtual ~AnalyticMap() = default;

    virtual cplx value(cplx z) const = 0;
    virtual cplx derivative(cplx z) const = 0;
    virtual cplx second_derivative(cplx z) const = 0;

    virtual double alpha() const = 0;
    virtual cplx multiplier() const { return unit_circle(alpha()); }

    virtual cplx critical_point() const = 0;
    virtual cplx critical_value() const { return value(critical_point()); }

    // Non-zero fixed point nearest 0.
    virtual cplx sigma() const = 0;
    // Multiplier at sigma; drives the repelling-end normalization of charts.
    virtual cplx sigma_multiplier() const { return derivative(sigma()); }

    // u(z) = (h(z)-z)/(z(z-sigma)), in a form safe at z=0 and z=sigma.
    virtual cplx u(cplx z) const {
        const cplx s = sigma();
        const cplx den = z * (z - s);
        if (std::abs(den) < 1e-280)
            throw DomainError("u(z) evaluated at a fixed point; no analytic override");
        return (value(z) - z) / den;
    }

    virtual bool in_domain(cplx z) const { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

    // Branch-tracked preimage: the solution of value(z) = y nearest the seed,
    // used when pulling boundary curves back by continuity. Newton by default.
    virtual cplx preimage_near(cplx y, cplx seed) const {
        cplx z = seed;
        for (int it = 0; it < 80; ++it) {
            const cplx f = value(z) - y;
            if (std::abs(f) < 1e-11 * std::max(1.0, std::abs(y))) return z;
            const cplx df = derivative(z);
            if (std::abs(df) < 1e-300)
                throw ConvergenceError("preimage Newton stalled at a critical point");
            cplx dz = f / df;
            const double lim = 0.5 * std::max(0.05, std::abs(z));
            if (std::abs(dz) > lim) dz *= lim / std::abs(dz);
            z -= dz;
        }
        throw ConvergenceError("preimage Newton did not converge");
    }

    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Quadratic family P_alpha.

class QuadraticMap final : public AnalyticMap {
public:
    explicit QuadraticMap(double alpha) : alpha_(alpha), lambda_(unit_circle(alpha)) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("QuadraticMap requires alpha in (0,1)");
    }

    cplx value(cplx z) const override { return (lambda_ + z) * z; }
    cplx derivative(cplx z) const override { return lambda_ + 2.0 * z; }
    cplx second_derivative(cplx) const override { return cplx(2.0, 0.0); }

    double alpha() const override { return alpha_; }
    cplx multiplier() const override { return lambda_; }

    cplx critical_point() const override { return -lambda_ / 2.0; }

    cplx sigma() const override { return 1.0 - lambda_; }  // closed form
    cplx sigma_multiplier() const override { return 2.0 - lambda_; }

    // h(z)-z = z(z-sigma) exactly, so u == 1.
    cplx u(cplx) const override { return cplx(1.0, 0.0); }

    // closed-form roots of z^2 + lambda z - y
    cplx preimage_near(cplx y, cplx seed) const override {
        const cplx disc = std::sqrt(lambda_ * lambda_ + 4.0 * y);
        const cplx r1 = (-lambda_ + disc) / 2.0;
        const cplx r2 = (-lambda_ - disc) / 2.0;
        return std::abs(r1 - seed) <= std::abs(r2 - seed) ? r1 : r2;
    }

    std::string name() const override { return "quadratic"; }

private:
    double alpha_;
    cplx lambda_;
};

// ---------------------------------------------------------------------------
// Model cubic P(z) = z(1+z)^2 and its domains.

struct ModelCubic {
    static cplx value(cplx z) { return z * (1.0 + z) * (1.0 + z); }
    static cplx derivative(cplx z) { return (1.0 + z) * (1.0 + 3.0 * z); }
    static cplx second_derivative(cplx z) { return 4.0 + 6.0 * z; }
    static constexpr double critical_point() { return -1.0 / 3.0; }
    static constexpr double critical_value() { return -4.0 / 27.0; }
};

// U = g(C^ \ E) with g(z) = -4z/(1+z)^2 and E a fixed ellipse. A point lies
// in U iff one of its two g-preimages (they are reciprocal) escapes E; the
// point at infinity counts as escaping.
class DomainU {
public:
    static bool ellipse_contains(cplx w) {
        return sqr((w.real() + 0.18) / 1.24) + sqr(w.imag() / 1.04) <= 1.0;
    }

    static bool contains(cplx z) {
        if (std::abs(z) < 1e-300) return true;  // preimage at infinity escapes E
        // g(w) = z  <=>  z w^2 + (2z+4) w + z = 0
        const cplx disc = std::sqrt(cplx(16.0) * (z + 1.0));
        const cplx w1 = (-(2.0 * z + 4.0) + disc) / (2.0 * z);
        const cplx w2 = (-(2.0 * z + 4.0) - disc) / (2.0 * z);
        return !ellipse_contains(w1) || !ellipse_contains(w2);
    }

    // Distance band within which membership is treated as boundary-ambiguous.
    static bool near_boundary(cplx z, double tol = 1e-9) {
        if (std::abs(z) < 1e-300) return false;
        const cplx disc = std::sqrt(cplx(16.0) * (z + 1.0));
        const cplx w1 = (-(2.0 * z + 4.0) + disc) / (2.0 * z);
        const cplx w2 = (-(2.0 * z + 4.0) - disc) / (2.0 * z);
        auto lvl = [](cplx w) {
            return sqr((w.real() + 0.18) / 1.24) + sqr(w.imag() / 1.04) - 1.0;
        };
        return std::abs(lvl(w1)) < tol || std::abs(lvl(w2)) < tol;
    }
};

// V = P^{-1}(B(0,(4/27)e^{4 pi})) minus the slit (-inf,-1] and the preimage
// blob around -1. The blob is approximated by a disk whose radius solves
// |P(-1+r)| = (4/27)e^{-4 pi} along a few rays (flagged approximation).
class DomainV {
public:
    DomainV() {
        const double target = (4.0 / 27.0) * std::exp(-4.0 * kPi);
        double rmax = 0.0;
        for (int k = 0; k < 8; ++k) {
            const cplx dir = unit_circle(k / 8.0);
            double r = std::sqrt(target);  // |P(-1+u)| ~ |u|^2
            for (int it = 0; it < 40; ++it) {
                const double f = std::abs(ModelCubic::value(-1.0 + r * dir)) - target;
                const double df = (std::abs(ModelCubic::value(-1.0 + (r + 1e-9) * dir)) -
                                   std::abs(ModelCubic::value(-1.0 + (r - 1e-9) * dir))) /
                                  2e-9;
                if (std::abs(df) < 1e-300) break;
                r -= f / df;
            }
            rmax = std::max(rmax, r);
        }
        blob_radius_ = rmax;
    }

    double outer_radius() const { return (4.0 / 27.0) * std::exp(4.0 * kPi); }
    double blob_radius() const { return blob_radius_; }

    bool contains(cplx z) const {
        if (std::abs(ModelCubic::value(z)) >= outer_radius()) return false;
        if (z.imag() == 0.0 && z.real() <= -1.0) return false;
        if (std::abs(z + 1.0) <= blob_radius_) return false;
        return true;
    }

private:
    double blob_radius_;
};

// ---------------------------------------------------------------------------
// Canonical class representative h(z) = e^{2 pi i alpha} P(z) on U.

class CanonicalMap final : public AnalyticMap {
public:
    explicit CanonicalMap(double alpha) : alpha_(alpha), lambda_(unit_circle(alpha)) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("CanonicalMap requires alpha in (0,1)");
        // fixed points: lambda (1+z)^2 = 1, branch nearest 0
        sigma_ = std::exp(cplx(0.0, -kPi * alpha)) - 1.0;
    }

    cplx value(cplx z) const override { return lambda_ * ModelCubic::value(z); }
    cplx derivative(cplx z) const override { return lambda_ * ModelCubic::derivative(z); }
    cplx second_derivative(cplx z) const override { return lambda_ * ModelCubic::second_derivative(z); }

    double alpha() const override { return alpha_; }
    cplx multiplier() const override { return lambda_; }

    cplx critical_point() const override { return cplx(ModelCubic::critical_point(), 0.0); }

    cplx sigma() const override { return sigma_; }

    // (h(z)-z)/(z(z-sigma)) = lambda (z + sigma + 2), by factoring the cubic
    // through its fixed points.
    cplx u(cplx z) const override { return lambda_ * (z + sigma_ + 2.0); }

    bool in_domain(cplx z) const override { return DomainU::contains(z); }

    std::string name() const override { return "canonical"; }

private:
    double alpha_;
    cplx lambda_;
    cplx sigma_;
};

// ---------------------------------------------------------------------------
// Shared operations.

// Newton refinement of the sigma fixed point from the asymptotic seed
// -4 pi alpha i / f''(0), f = e^{-2 pi i alpha} h. Used for maps without a
// closed form (renormalized maps); residual target 1e-12.
template <typename MapLike>
cplx sigma_by_newton(const MapLike& h, cplx seed, int max_iter = 50, double tol = 1e-12) {
    cplx z = seed;
    for (int it = 0; it < max_iter; ++it) {
        const cplx f = h.value(z) - z;
        if (std::abs(f) < tol) return z;
        const cplx df = h.derivative(z) - 1.0;
        if (std::abs(df) < 1e-300)
            throw ConvergenceError("sigma Newton hit a critical point of h(z)-z");
        z -= f / df;
    }
    if (std::abs(h.value(z) - z) < tol) return z;
    throw ConvergenceError("sigma Newton did not converge; alpha too large for this map");
}

struct OrbitResult {
    std::vector<cplx> points;  // h(z0), h^2(z0), ...
    bool escaped = false;
    std::size_t escape_index = 0;
};

// First n iterates of the critical value. Truncates with a flag once the
// orbit leaves |z| <= escape_radius (both families satisfy |h(z)| > |z|
// beyond radius 10).
inline OrbitResult critical_orbit(const AnalyticMap& h, std::size_t n,
                                  double escape_radius = 10.0) {
    OrbitResult r;
    if (n == 0) return r;
    cplx z = h.critical_value();
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(z) > escape_radius) {
            r.escaped = true;
            r.escape_index = j;
            break;
        }
        r.points.push_back(z);
        if (j + 1 < n) z = h.value(z);
    }
    return r;
}

}  // namespace npr
