#pragma once

// The covering tau(w) = sigma/(1 - e^{-2 pi i alpha w}) to the F-plane, the
// lifted near-translation F(w) = w + (1/2 pi alpha i) log(1 - sigma u/(1+zu)),
// the renormalization projection Exp, inverse log branches, and the grid
// checks that fit the non-constructive constants (C1, C2, C3, decay slopes).

#include <functional>

#include "npr/core.hpp"
#include "npr/maps.hpp"

namespace npr {

// ---------------------------------------------------------------------------
// Theta regions: the plane minus balls around the lattice Z/alpha, optionally
// clipped below Im w = -2/alpha (the scaled variant).

struct ThetaRegion {
    double alpha;
    double radius;             // exclusion radius around each n/alpha
    bool scaled = false;       // if set, also require Im w >= -2/alpha

    static ThetaRegion plain(double alpha, double R) { return {alpha, R, false}; }
    static ThetaRegion scaled_r(double alpha, double r) { return {alpha, r / alpha, true}; }

    double lattice_distance(cplx w) const {
        const double period = 1.0 / alpha;
        const double k = std::round(w.real() / period);
        return std::abs(w - cplx(k * period, 0.0));
    }

    bool contains(cplx w) const {
        if (scaled && w.imag() < -2.0 / alpha) return false;
        return lattice_distance(w) >= radius;
    }
};

// ---------------------------------------------------------------------------
// Covering tau and its branch inverse.

class Covering {
public:
    Covering(const AnalyticMap& map)
        : map_(&map), alpha_(map.alpha()), sigma_(map.sigma()) {}

    double alpha() const { return alpha_; }
    cplx sigma() const { return sigma_; }
    const AnalyticMap& map() const { return *map_; }

    cplx deck_E(cplx w) const { return std::exp(cplx(0.0, -kTwoPi * alpha_) * w); }

    cplx tau(cplx w) const {
        const cplx den = 1.0 - deck_E(w);
        if (std::abs(den) < 1e-300)
            throw DomainError("tau evaluated at a pole (alpha*w integral)");
        return sigma_ / den;
    }

    cplx dtau(cplx w) const {
        const cplx E = deck_E(w);
        const cplx t = sigma_ / (1.0 - E);
        return -(cplx(0.0, kTwoPi * alpha_) / sigma_) * E * t * t;
    }

    cplx d2tau(cplx w) const {
        const cplx E = deck_E(w);
        const cplx t = sigma_ / (1.0 - E);
        const cplx dt = -(cplx(0.0, kTwoPi * alpha_) / sigma_) * E * t * t;
        const cplx dE = cplx(0.0, -kTwoPi * alpha_) * E;
        return -(cplx(0.0, kTwoPi * alpha_) / sigma_) * (dE * t * t + 2.0 * E * t * dt);
    }

    // Solve tau(w) = z for the branch with Re w in [window_lo, window_hi).
    // Candidates are spaced 1/alpha apart.
    cplx tau_inverse(cplx z, double window_lo, double window_hi) const {
        if (std::abs(z) < 1e-300 || std::abs(z - sigma_) < 1e-300)
            throw DomainError("tau_inverse: z at an omitted value (0 or sigma)");
        const cplx E = 1.0 - sigma_ / z;  // e^{-2 pi i alpha w}
        if (std::abs(E) < 1e-300)
            throw DomainError("tau_inverse: z at the covering branch point");
        const cplx w0 = std::log(E) / cplx(0.0, -kTwoPi * alpha_);
        const double period = 1.0 / alpha_;
        // shift w0 by multiples of the period into the window
        const double k0 = std::floor((window_lo - w0.real()) / period);
        for (int dk = 0; dk <= 2; ++dk) {
            const cplx w = w0 + cplx((k0 + dk) * period, 0.0);
            if (w.real() >= window_lo && w.real() < window_hi) return w;
        }
        throw BranchError("tau_inverse: no candidate in the requested window");
    }

private:
    const AnalyticMap* map_;
    double alpha_;
    cplx sigma_;
};

// ---------------------------------------------------------------------------
// Lifted map F with analytic first and second derivatives.

class LiftedMap {
public:
    explicit LiftedMap(const Covering& cov) : cov_(cov) {}

    const Covering& covering() const { return cov_; }
    double alpha() const { return cov_.alpha(); }

    // log argument Q(z) = 1 - sigma u/(1+zu); branch fixed to (-pi, pi).
    cplx log_argument(cplx z) const {
        const cplx u = cov_.map().u(z);
        const cplx den = 1.0 + z * u;
        if (std::abs(den) < 1e-280)
            throw DomainError("lifted map: 1 + z u(z) vanished");
        return 1.0 - cov_.sigma() * u / den;
    }

    cplx value(cplx w) const {
        const cplx z = cov_.tau(w);
        if (!cov_.map().in_domain(z))
            throw DomainError("lifted map: tau(w) outside Dom h");
        const cplx q = log_argument(z);
        if (q.real() < 0.0 && std::abs(q.imag()) < 1e-15 * std::abs(q.real()))
            throw BranchError("lifted map: log argument on the branch cut");
        return w + std::log(q) / cplx(0.0, kTwoPi * alpha());
    }

    // F'(w) = h'(z) tau'(w) / tau'(F(w)), from the semi-conjugacy.
    cplx derivative(cplx w) const {
        const cplx z = cov_.tau(w);
        const cplx fw = value(w);
        return cov_.map().derivative(z) * cov_.dtau(w) / cov_.dtau(fw);
    }

    // Differentiate the product above once more.
    cplx second_derivative(cplx w) const {
        const cplx z = cov_.tau(w);
        const cplx fw = value(w);
        const cplx hp = cov_.map().derivative(z);
        const cplx hpp = cov_.map().second_derivative(z);
        const cplx t1 = cov_.dtau(w);
        const cplx t2 = cov_.d2tau(w);
        const cplx s1 = cov_.dtau(fw);
        const cplx s2 = cov_.d2tau(fw);
        const cplx fp = hp * t1 / s1;
        return (hpp * t1 * t1 + hp * t2) / s1 - hp * t1 * s2 * fp / (s1 * s1);
    }

private:
    Covering cov_;
};

// ---------------------------------------------------------------------------
// Renormalization projection Exp(zeta) = (-4/27) conj(e^{2 pi i zeta}) and its
// inverse branches.

inline cplx exp_projection(cplx zeta) {
    return (-4.0 / 27.0) * std::conj(std::exp(cplx(0.0, kTwoPi) * zeta));
}

// zeta with Exp(zeta) = z and Re zeta in [window_lo, window_hi); candidates
// are spaced by 1, so any window of width >= 1 contains one.
inline cplx log_branch(cplx z, double window_lo, double window_hi) {
    if (std::abs(z) < 1e-300) throw DomainError("log_branch: z = 0 has no preimage");
    const cplx L = std::log(z * (-27.0 / 4.0));
    const cplx zeta0 = cplx(0.0, -1.0) * std::conj(L) / kTwoPi;
    const double k0 = std::floor(zeta0.real() - window_lo);
    for (int dk = -1; dk <= 2; ++dk) {
        const cplx zeta = zeta0 - (k0 + static_cast<double>(dk));
        if (zeta.real() >= window_lo && zeta.real() < window_hi) return zeta;
    }
    throw BranchError("log_branch: no candidate in the requested window");
}

// Constant from the univalence radius bookkeeping: D = 1 + log(16/9)/(2 pi),
// chosen so |Exp(D i)| <= 1/12.
inline double exp_height_constant() { return 1.0 + std::log(16.0 / 9.0) / kTwoPi; }

// ---------------------------------------------------------------------------
// Quantitative checks on F over sample sets (near-translation bounds, decay
// slope in Im w, critical-orbit drift).

struct CylinderFit {
    double max_translation_error = 0.0;   // max |F(w)-w-1|
    double max_derivative_error = 0.0;    // max |F'(w)-1|
    LineFit decay;                        // log|F(w)-w-1| vs Im w
    double expected_slope = 0.0;          // -2 pi alpha
    double fitted_C2 = 0.0;               // sup |F-w-1| (r/alpha) e^{2 pi alpha Im w}
    double fitted_C3 = 0.0;               // critical-orbit drift constant
    std::size_t samples_used = 0;
    bool inconclusive = false;
};

inline CylinderFit cylcond_check(const LiftedMap& F, const std::vector<cplx>& samples,
                                 double r) {
    CylinderFit fit;
    const double a = F.alpha();
    fit.expected_slope = -kTwoPi * a;
    std::vector<double> xs, ys;
    for (const cplx& w : samples) {
        cplx e, dp;
        try {
            e = F.value(w) - w - 1.0;
            dp = F.derivative(w) - 1.0;
        } catch (const Error&) {
            continue;
        }
        ++fit.samples_used;
        fit.max_translation_error = std::max(fit.max_translation_error, std::abs(e));
        fit.max_derivative_error = std::max(fit.max_derivative_error, std::abs(dp));
        if (std::abs(e) > 1e-300) {
            xs.push_back(w.imag());
            ys.push_back(std::log(std::abs(e)));
            fit.fitted_C2 = std::max(fit.fitted_C2,
                                     std::abs(e) * (r / a) * std::exp(kTwoPi * a * w.imag()));
        }
    }
    fit.decay = fit_line(xs, ys);
    if (fit.decay.degenerate || fit.samples_used < 8) fit.inconclusive = true;
    return fit;
}

struct CriticalDriftFit {
    double fitted_C3 = 0.0;         // max |F^j(cp)-cp-j| / (1+log j)
    std::size_t steps = 0;
    bool truncated = false;         // orbit left the evaluable region early
};

// Iterate F from the lift of cp_h nearest 0 and fit the logarithmic drift
// bound |F^j(cp) - cp - j| <= C3 (1 + log j).
inline CriticalDriftFit critical_drift(const LiftedMap& F, std::size_t max_steps) {
    CriticalDriftFit out;
    const Covering& cov = F.covering();
    const double period = 1.0 / F.alpha();
    cplx cp_lift = cov.tau_inverse(cov.map().critical_point(), -period / 2.0, period / 2.0);
    cplx w = cp_lift;
    for (std::size_t j = 1; j <= max_steps; ++j) {
        try {
            w = F.value(w);
        } catch (const Error&) {
            out.truncated = true;
            break;
        }
        out.steps = j;
        const double drift = std::abs(w - cp_lift - cplx(static_cast<double>(j), 0.0));
        out.fitted_C3 = std::max(out.fitted_C3, drift / (1.0 + std::log(static_cast<double>(j))));
    }
    return out;
}

// Expand a candidate C1 until the 1/4 bounds hold on a probe grid, mirroring
// how the non-constructive constant is pinned in practice.
inline double refine_C1(const LiftedMap& F, double c1_start = 3.0, int probe = 100) {
    double c1 = c1_start;
    const double a = F.alpha();
    for (int attempt = 0; attempt < 8; ++attempt) {
        bool ok = true;
        // probe ring: points at lattice distance exactly c1..c1*1.2, heights +-
        for (int i = 0; i < probe && ok; ++i) {
            const double ang = kTwoPi * i / probe;
            const double rad = c1 * (1.0 + 0.2 * (i % 7) / 7.0);
            const cplx w = cplx(rad * std::cos(ang), rad * std::sin(ang));
            try {
                if (std::abs(F.value(w) - w - 1.0) >= 0.25) ok = false;
                else if (std::abs(F.derivative(w) - 1.0) >= 0.25) ok = false;
            } catch (const Error&) {
                ok = false;
            }
            (void)a;
        }
        if (ok) return c1;
        c1 *= 1.5;
    }
    return c1;
}

}  // namespace npr
