#pragma once

// Numerical perturbed Fatou coordinate.
//
// The chart evaluates Phi(z) by following the forward orbit of z until its
// seed coordinate crosses a fixed vertical exit line near the right end of
// the strip, then anchoring the value there:
//
//   Phi(z) = anchor(exit of the orbit) - (number of steps taken),
//
// with the anchor interpolated linearly between the two orbit points that
// straddle the exit line and refined by a triangular-weighted (Cesaro)
// telescoped tail. Orbit points of z and of h(z) coincide, so the Abel
// equation Phi(h(z)) = Phi(z) + 1 holds to rounding by construction; the
// residual is measured on a validation grid and certifies the usable region.
//
// The seed is a two-term logarithm matched to the multipliers at both fixed
// points 0 and sigma,
//
//   seed(z) = log(z)/(2 pi i alpha) + log(z - sigma)/log(h'(sigma)),
//
// so its translation defect decays toward both ends of the strip. Branch
// cuts point away from the strip (from 0 away from sigma, from sigma away
// from 0); along orbits the seed is continued through principal logs of
// step ratios.

#include <optional>

#include "npr/core.hpp"
#include "npr/lift.hpp"
#include "npr/maps.hpp"

namespace npr {

// Defaults for the paper-side constants that are not constructive; probe
// routines refine C1, k'' and friends, and reports carry the values used.
struct FittedConstants {
    double k_bold = 2.0;    // strip-width trim
    double k_hat = 2.0;     // winding bound, branch windows
    double k_prime = 3.0;   // extension overlap
    double delta1 = 0.125;  // ball radius in the descent constraint
    double C1 = 3.0;        // lattice exclusion radius for the lift

    void validate(int type_floor) const {
        if (type_floor > 0 && type_floor < 2 * k_prime + k_bold + 1)
            throw ConfigError("type floor must satisfy N >= 2k' + k + 1 for the "
                              "extension machinery; got N = " + std::to_string(type_floor));
    }
};

struct ChartOptions {
    double abel_tol = 1e-6;
    double inv_tol = 1e-8;
    double alpha_max = 0.05;
    double k_bold = 2.0;
    int cesaro_tail = 0;          // 0: use 16/alpha
    int max_steps = 0;            // 0: strip width + tail + margin
    double escape_radius = 1e6;   // orbit abandoned beyond this
    // The smoothing tail's weights fade out as the orbit drifts toward the
    // pole neighborhoods of the covering (large |z|), where the seed's log
    // phases turn noisy, and the tail ends at the first zero-weight point.
    // A hard cutoff would make the anchored value jump whenever the
    // truncation index slips; the taper keeps it continuous in z.
    double taper_lo = 0.45;
    double taper_hi = 0.75;
    std::size_t validation_points = 1200;
    bool validate = true;
};

struct ChartEval {
    cplx phi{};
    bool ok = false;
    bool flagged = false;      // shortened window / escape / domain exit
    int steps = 0;
    double anchor_defect = 0;  // |e| at the anchor, achieved-residual proxy
};

class FatouChart {
public:
    FatouChart(const AnalyticMap& h, ChartOptions opts = {})
        : h_(&h), opts_(opts), alpha_(h.alpha()), sigma_(h.sigma()) {
        if (!(alpha_ > 0.0 && alpha_ <= opts.alpha_max))
            throw DomainError("chart requires 0 < alpha <= alpha_max");
        coef0_ = 1.0 / cplx(0.0, kTwoPi * alpha_);
        const cplx lam_sigma = h.sigma_multiplier();
        coefs_ = 1.0 / std::log(lam_sigma);
        theta0_ = std::arg(-sigma_);
        thetas_ = std::arg(sigma_);

        strip_width_ = std::floor(1.0 / alpha_) - opts.k_bold;
        tail_ = opts.cesaro_tail > 0 ? opts.cesaro_tail
                                     : static_cast<int>(std::ceil(16.0 / alpha_));
        max_steps_ = opts.max_steps > 0
                         ? opts.max_steps
                         : static_cast<int>(std::ceil(strip_width_)) + tail_ + 512;

        // Anchor the exit line one strip width to the right of the critical
        // point and normalize Phi(cp) = 0. Maps without a tractable critical
        // point (renormalized ones) anchor at the critical value instead,
        // which equals -4/27 exactly by the projection normalization; the
        // Abel equation makes Phi(cv) = 1 the equivalent normalization.
        offset_ = cplx(0, 0);
        cplx anchor_pt;
        double anchor_phi_re = 0.0;
        try {
            anchor_pt = h.critical_point();
        } catch (const Error&) {
            anchor_pt = h.critical_value();
            anchor_phi_re = 1.0;
        }
        base_re_ = seed(anchor_pt).real() - anchor_phi_re;
        exit_re_ = base_re_ + strip_width_ - 1.0;
        auto anchor_eval = value_checked(anchor_pt);
        if (!anchor_eval.ok)
            throw ConvergenceError("chart: normalization anchor not evaluable");
        offset_ = anchor_eval.phi - cplx(anchor_phi_re, 0.0);

        if (opts.validate) run_validation();
    }

    const AnalyticMap& map() const { return *h_; }
    double alpha() const { return alpha_; }
    cplx sigma() const { return sigma_; }
    double strip_width() const { return strip_width_; }
    double abel_tol() const { return opts_.abel_tol; }
    int cesaro_tail() const { return tail_; }
    cplx normalization_offset() const { return offset_; }

    double validation_residual() const { return validation_residual_; }
    std::size_t validation_count() const { return validation_count_; }
    std::size_t flagged_count() const { return flagged_count_; }

    // Seed coordinate (raw frame, before cp-normalization).
    cplx seed(cplx z) const {
        return coef0_ * log_cut(z, theta0_) + coefs_ * log_cut(z - sigma_, thetas_);
    }

    ChartEval value_checked(cplx z) const {
        ChartEval out;
        if (!h_->in_domain(z) || std::abs(z) < 1e-280 ||
            std::abs(z - sigma_) < 1e-280)
            return out;

        cplx w = seed(z);
        if (w.real() >= exit_re_) return out;  // beyond the anchor line

        // Cesaro-corrected value at orbit index k:
        //   v_k = w_k + sum_{m=0}^{Mt-1} (1 - m/Mt) taper_k+m e_{k+m},
        // built for the two indices straddling the exit line. The taper
        // factor is evaluated at the running maximum of |z| over the tail:
        // once the orbit has grazed a pole neighborhood, everything after
        // is discounted the same way, which keeps the sum continuous in z
        // (a pointwise taper would resume full weights after the pass and
        // jump against neighbors whose pass was a shade deeper).
        cplx zc = z;
        int n_cross = -1;
        cplx w_before{}, w_after{};
        cplx acc_before{}, acc_after{};
        int tail_steps = 0;
        double tail_zmax = 0.0;
        const int mt = tail_;

        for (int j = 0; j < max_steps_; ++j) {
            cplx zn;
            try {
                zn = h_->value(zc);
            } catch (const Error&) {
                out.flagged = true;
                break;
            }
            if (!h_->in_domain(zn) || std::abs(zn) > opts_.escape_radius ||
                std::abs(zn) < 1e-280) {
                out.flagged = true;
                break;
            }
            const cplx e = step_defect(zc, zn);  // e_j
            const cplx wn = w + 1.0 + e;

            if (n_cross < 0) {
                if (wn.real() >= exit_re_) {
                    n_cross = j + 1;  // first index past the line
                    w_before = w;
                    w_after = wn;
                    out.anchor_defect = std::abs(e);
                    tail_zmax = std::abs(zn);
                    acc_before += taper(tail_zmax) * e;  // m = 0 term, before-tail
                }
            } else {
                ++tail_steps;
                tail_zmax = std::max(tail_zmax, std::abs(zn));
                // this e has index (n_cross - 1) + tail_steps
                const double tp = taper(tail_zmax);
                const double mb = static_cast<double>(tail_steps);      // before-tail m
                const double ma = static_cast<double>(tail_steps - 1);  // after-tail m
                if (mb <= mt - 1) acc_before += (1.0 - mb / mt) * tp * e;
                if (ma <= mt - 1) acc_after += (1.0 - ma / mt) * tp * e;
                if (tail_steps >= mt) break;
                if (tp == 0.0) break;  // pole grazed; zero weight from here on
            }
            zc = zn;
            w = wn;
            out.steps = j + 1;
        }

        if (n_cross < 0) {
            out.flagged = true;
            return out;
        }

        const cplx vb = w_before + acc_before;
        const cplx va = w_after + acc_after;
        const double denom = (va - vb).real();
        const double s = std::abs(denom) > 1e-9 ? (exit_re_ - vb.real()) / denom : 0.5;
        const cplx anchor = (1.0 - s) * vb + s * va;
        out.phi = anchor - cplx(static_cast<double>(n_cross - 1) + s, 0.0) - offset_;
        out.ok = true;
        return out;
    }

    // Normalized coordinate; throws outside the evaluable region.
    cplx value(cplx z) const {
        auto r = value_checked(z);
        if (!r.ok)
            throw DomainError("fatou chart: point outside the evaluable region");
        return r.phi;
    }

    // Newton inversion with numerically differentiated Phi, seeded from the
    // cached grid built during validation.
    cplx inverse(cplx zeta) const { return inverse_from(zeta, seed_for_inverse(zeta)); }

    // Same Newton loop from an explicit seed; used when tracing curves where
    // the previous point is a far better start than the coarse grid. Steps
    // that leave the evaluable region or increase the residual are halved
    // (the region boundary is ragged near the critical hairs). `accept`
    // overrides the stagnation bar: in the low band the coordinate carries a
    // bounded non-conformal wiggle and targets can sit a few 1e-2 off the
    // attained values; curve tracing there only needs that accuracy.
    cplx inverse_from(cplx zeta, cplx z, double accept = 0.0) const {
        auto ev = value_checked(z);
        for (int hop = 0; hop < 12 && !ev.ok; ++hop) {
            z *= 0.97;  // nudge toward the fixed point until evaluable
            ev = value_checked(z);
        }
        if (!ev.ok)
            throw ConvergenceError("fatou chart inversion: seed not evaluable");
        // The anchored coordinate is only quasi-conformal in the low band (it
        // differs from a conformal chart by a bounded periodic wiggle), so
        // the Newton uses the full 2x2 real Jacobian rather than a complex
        // derivative.
        double err = std::abs(ev.phi - zeta);
        for (int it = 0; it < 60; ++it) {
            if (err < opts_.inv_tol) return z;
            const double step = std::max(1e-10, 1e-6 * std::abs(z));
            auto exp_ = value_checked(z + step);
            auto exm = value_checked(z - step);
            auto eyp = value_checked(z + cplx(0.0, step));
            auto eym = value_checked(z - cplx(0.0, step));
            if (!exp_.ok || !exm.ok || !eyp.ok || !eym.ok) break;
            const cplx dx = (exp_.phi - exm.phi) / (2.0 * step);
            const cplx dy = (eyp.phi - eym.phi) / (2.0 * step);
            const double det = dx.real() * dy.imag() - dy.real() * dx.imag();
            if (std::abs(det) < 1e-300) break;
            const cplx r = zeta - ev.phi;
            cplx dz(( dy.imag() * r.real() - dy.real() * r.imag()) / det,
                    (-dx.imag() * r.real() + dx.real() * r.imag()) / det);
            const double lim = 0.25 * std::max(0.02, std::abs(z));
            if (std::abs(dz) > lim) dz *= lim / std::abs(dz);
            bool advanced = false;
            for (int bt = 0; bt < 8; ++bt) {
                auto trial = value_checked(z + dz);
                if (trial.ok) {
                    const double e2 = std::abs(trial.phi - zeta);
                    if (e2 < err || bt == 7) {
                        z += dz;
                        ev = trial;
                        err = e2;
                        advanced = true;
                        break;
                    }
                }
                dz *= 0.5;
            }
            if (!advanced) break;
        }
        if (err < std::max(accept, 1e3 * opts_.inv_tol)) return z;
        throw ConvergenceError("fatou chart inversion stagnated; best residual " +
                               std::to_string(err));
    }

    // Phi^l(z) = Phi(h^j z) - j for the smallest j putting h^j z in the strip.
    cplx left_extension(cplx z, int j_max = 64) const {
        cplx zc = z;
        for (int j = 0; j <= j_max; ++j) {
            auto ev = value_checked(zc);
            if (ev.ok && !ev.flagged && in_strip(ev.phi)) return ev.phi - static_cast<double>(j);
            try {
                zc = h_->value(zc);
            } catch (const Error&) {
                break;
            }
            if (!h_->in_domain(zc)) break;
        }
        throw DomainError("left extension: no forward iterate lands in the chart");
    }

    // Phi^dagger on W_h: the plain inverse on the central strip, and
    // h^j . Phi^{-1}(zeta - j) on the sector translates.
    cplx dagger(cplx zeta, double k_prime = 3.0, int j_max = 16) const {
        const double lo = k_prime;
        const double hi = strip_width_ - 1.0;
        if (zeta.real() > lo && zeta.real() < hi) return inverse(zeta);
        int j = static_cast<int>(std::ceil(zeta.real() - hi + 0.5));
        if (j < 1 || j > j_max)
            throw DomainError("dagger: requested point outside the extension range");
        cplx z = inverse(zeta - static_cast<double>(j));
        for (int i = 0; i < j; ++i) {
            z = h_->value(z);
            if (!h_->in_domain(z))
                throw DomainError("dagger: orbit left the domain during extension");
        }
        return z;
    }

    bool in_strip(cplx phi, double margin = 0.0) const {
        return phi.real() > margin && phi.real() < strip_width_ - 1.0 - margin;
    }

    // (zeta, z) pairs cached by validation; inversion seeds.
    const std::vector<std::pair<cplx, cplx>>& inverse_seeds() const { return inv_seeds_; }
    void set_inverse_seeds(std::vector<std::pair<cplx, cplx>> s) { inv_seeds_ = std::move(s); }
    cplx inverse_seed_point(cplx zeta) const { return seed_for_inverse(zeta); }

private:
    static cplx log_cut(cplx x, double theta) {
        // branch cut along the ray arg = theta; range (theta - 2 pi, theta]
        const cplx rotated = x * std::exp(cplx(0.0, -(theta - kPi)));
        return cplx(std::log(std::abs(x)), std::arg(rotated) + theta - kPi);
    }

    cplx step_defect(cplx z0, cplx z1) const {
        return coef0_ * std::log(z1 / z0) +
               coefs_ * std::log((z1 - sigma_) / (z0 - sigma_)) - 1.0;
    }

    // smooth cutoff for tail weights as the orbit nears the covering poles
    double taper(cplx z) const {
        const double r = std::abs(z);
        if (r <= opts_.taper_lo) return 1.0;
        if (r >= opts_.taper_hi) return 0.0;
        const double x = (opts_.taper_hi - r) / (opts_.taper_hi - opts_.taper_lo);
        return x * x * (3.0 - 2.0 * x);
    }

    cplx seed_for_inverse(cplx zeta) const {
        if (inv_seeds_.empty())
            throw ConvergenceError("fatou chart inversion needs the seed grid; "
                                   "build the chart with validation enabled");
        cplx best_z;
        double best = 1e300;
        for (const auto& [zv, z] : inv_seeds_) {
            const double d = std::abs(zv - zeta);
            if (d < best) { best = d; best_z = z; }
        }
        return best_z;
    }

    void run_validation() {
        // grid over the strip via the covering parametrization
        Covering cov(*h_);
        const std::size_t n_re = 40;
        const std::size_t n_im = std::max<std::size_t>(
            (opts_.validation_points + n_re - 1) / n_re, 8);
        const double re0 = base_re_;
        double worst = 0.0;
        std::size_t used = 0, flagged = 0;
        for (std::size_t i = 0; i < n_re; ++i) {
            const double fr = (i + 0.5) / n_re;
            for (std::size_t k = 0; k < n_im; ++k) {
                // heights biased toward the sector band, reaching 3/alpha
                const double fk = (k + 0.5) / n_im;
                const double im = -3.0 + (3.0 / alpha_) * fk * fk + 3.0 * fk;
                const cplx w_probe(re0 + 1.0 + fr * (strip_width_ - 2.5), im);
                cplx z;
                try {
                    z = cov.tau(w_probe);
                } catch (const Error&) {
                    continue;
                }
                auto e0 = value_checked(z);
                if (!e0.ok || e0.flagged) { ++flagged; continue; }
                cplx hz;
                try {
                    hz = h_->value(z);
                } catch (const Error&) {
                    ++flagged;
                    continue;
                }
                // pairs whose step crosses the seed's branch cut sit on
                // different monodromy sheets; they are not chart material
                try {
                    if (std::abs(seed(hz) - seed(z) - 1.0) > 0.5) { ++flagged; continue; }
                } catch (const Error&) {
                    ++flagged;
                    continue;
                }
                auto e1 = value_checked(hz);
                if (!e1.ok || e1.flagged) { ++flagged; continue; }
                ++used;
                worst = std::max(worst, std::abs(e1.phi - e0.phi - 1.0));
                inv_seeds_.emplace_back(e0.phi, z);
            }
        }
        validation_residual_ = worst;
        validation_count_ = used;
        flagged_count_ = flagged;
        if (used < opts_.validation_points / 2)
            throw ConvergenceError("chart validation: too few evaluable grid points (" +
                                   std::to_string(used) + ")");
        if (worst > opts_.abel_tol)
            throw ConvergenceError("chart quality: residual " + std::to_string(worst) +
                                   " above abel_tol");
    }

    const AnalyticMap* h_;
    ChartOptions opts_;
    double alpha_;
    cplx sigma_;
    cplx coef0_, coefs_;
    double theta0_, thetas_;
    double strip_width_;
    double base_re_ = 0.0;
    double exit_re_;
    cplx offset_;
    int tail_ = 0;
    int max_steps_ = 0;
    double validation_residual_ = 0.0;
    std::size_t validation_count_ = 0;
    std::size_t flagged_count_ = 0;
    std::vector<std::pair<cplx, cplx>> inv_seeds_;
};

// ---------------------------------------------------------------------------
// Sector strips in Phi-coordinates (membership through the chart).

struct SectorSpec {
    enum class Kind { C, CSharp };
    Kind kind;

    static SectorSpec c() { return {Kind::C}; }
    static SectorSpec c_sharp() { return {Kind::CSharp}; }

    bool contains_phi(cplx phi) const {
        if (phi.real() < 0.5 || phi.real() > 1.5) return false;
        if (kind == Kind::C) return phi.imag() > -2.0 && phi.imag() <= 2.0;
        return phi.imag() >= 2.0;
    }

    bool contains(const FatouChart& chart, cplx z) const {
        auto ev = chart.value_checked(z);
        return ev.ok && contains_phi(ev.phi);
    }
};

// chi = Log . Phi^dagger, an inverse Exp-branch applied to the extended
// inverse coordinate.
inline cplx chi_value(const FatouChart& chart, cplx w, double window_lo,
                      double window_hi, double k_prime = 3.0) {
    const cplx z = chart.dagger(w, k_prime);
    return log_branch(z, window_lo, window_hi);
}

// L = Phi . tau, the linearizing coordinate of the lifted map.
inline cplx linearizer_value(const FatouChart& chart, const Covering& cov, cplx w) {
    return chart.value(cov.tau(w));
}

}  // namespace npr
