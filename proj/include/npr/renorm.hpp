#pragma once

// The near-parabolic renormalization operator. One level of the tower keeps
// a map f_n with its chart, the sector index k_n (smallest pullback count
// landing the 0-attached sector components inside the trimmed strip), and a
// boundary sample of the sector S_n^0. The renormalized map
//
//   f_{n+1}(zeta) = Exp( Phi_n( f_n^{k_n}( Phi_n^{-1}( lift of zeta ) ) ) )
//
// is evaluated by tracing through the level-n chart; a polar memo grid with
// bicubic interpolation serves repeated queries (chart building on level
// n+1 costs millions of evaluations otherwise).

#include <array>
#include <memory>

#include "npr/arith.hpp"
#include "npr/fatou.hpp"

namespace npr {

// ---------------------------------------------------------------------------
// Sector boundary polylines and pullbacks.

struct SectorSample {
    std::vector<cplx> csharp;  // boundary of (C#)^{-k}, tip first
    std::vector<cplx> c;       // boundary of C^{-k}, shared corner first
    int k = 0;

    std::vector<cplx> all() const {
        std::vector<cplx> out = csharp;
        out.insert(out.end(), c.begin(), c.end());
        return out;
    }
};

namespace detail {

// Polyline along the boundary of the sector strips in Phi-coordinates.
// The C# part runs tip first (top of the truncated stack down to the shared
// corner at (1/2, 2)), so pullback branch tracking can start at the point
// nearest 0; `corner` reports that point's index.
inline void sector_phi_polylines(double im_cap, int density, std::vector<cplx>& cs,
                                 std::vector<cplx>& c, std::size_t& corner) {
    auto seg = [&](std::vector<cplx>& out, cplx a, cplx b) {
        const int n = std::max(2, static_cast<int>(std::abs(b - a) * density));
        for (int i = 0; i < n; ++i)
            out.push_back(a + (b - a) * (static_cast<double>(i) / n));
    };
    cs.clear();
    c.clear();
    seg(cs, cplx(0.5, im_cap), cplx(0.5, 2.0));
    corner = cs.size();
    seg(cs, cplx(0.5, 2.0), cplx(1.5, 2.0));
    seg(cs, cplx(1.5, 2.0), cplx(1.5, im_cap));
    cs.push_back(cplx(1.5, im_cap));
    seg(c, cplx(0.5, 2.0), cplx(0.5, -2.0));
    seg(c, cplx(0.5, -2.0), cplx(1.5, -2.0));
    seg(c, cplx(1.5, -2.0), cplx(1.5, 2.0));
    c.push_back(cplx(1.5, 2.0));
}

// One pullback step of a polyline under h, tracking branches by continuity.
// `seed0` starts the first point; consecutive points reuse their neighbor.
inline std::vector<cplx> pull_back_polyline(const AnalyticMap& h,
                                            const std::vector<cplx>& curve, cplx seed0) {
    std::vector<cplx> out;
    out.reserve(curve.size());
    cplx seed = seed0;
    for (const cplx& y : curve) {
        const cplx z = h.preimage_near(y, seed);
        out.push_back(z);
        seed = z;
    }
    return out;
}

}  // namespace detail

// Builds the pullback sectors and finds the smallest k whose sector sample
// lands in the strip {0 < Re Phi < floor(1/alpha) - k_bold - 1}. Pullback
// branch selection is continuity along densely sampled boundary curves; the
// 0-attached component is seeded at the C# tip through the linear branch.
struct KComputation {
    int k = 0;
    SectorSample sector;
    double strip_hi = 0;      // right bound of the admissible strip
    double worst_margin = 0;  // min distance of samples to the strip bounds at k
};

inline KComputation compute_k(const FatouChart& chart, const AnalyticMap& h,
                              double k_bold = 2.0, int k_max = 20, int density = 24,
                              double im_cap_factor = 1.0) {
    KComputation out;
    const double alpha = chart.alpha();
    out.strip_hi = std::floor(1.0 / alpha) - k_bold - 1.0;
    const double im_cap = 2.0 + im_cap_factor / alpha;

    std::vector<cplx> phi_cs, phi_c;
    std::size_t corner = 0;
    detail::sector_phi_polylines(im_cap, density, phi_cs, phi_c, corner);

    // Map the Phi-frame polylines to the dynamical plane. The tip of C# sits
    // deep toward the fixed point where the coarse inverse grid is thin, so
    // walk each polyline starting from the shared corner (0.5, 2) and follow
    // the curve with continuity seeding.
    // Walls below the critical-orbit level live in the chart's wiggle band;
    // trace them with the loose acceptance (sector geometry only needs a few
    // 1e-2 of coordinate accuracy).
    const double wall_accept = 0.15;
    std::vector<cplx> cs(phi_cs.size()), c(phi_c.size());
    // cold start at an interior point, then walk to the corner
    cplx seed = chart.inverse(cplx(1.25, 2.0));
    for (int warm = 0; warm <= 8; ++warm)
        seed = chart.inverse_from(cplx(1.25 - warm * 0.75 / 8.0, 2.0), seed);
    for (std::size_t i = corner + 1; i-- > 0;) {  // corner down to the tip
        seed = chart.inverse_from(phi_cs[i], seed, wall_accept);
        cs[i] = seed;
    }
    seed = cs[corner];
    for (std::size_t i = corner + 1; i < phi_cs.size(); ++i) {
        seed = chart.inverse_from(phi_cs[i], seed, wall_accept);
        cs[i] = seed;
    }
    seed = cs[corner];
    for (std::size_t i = 0; i < phi_c.size(); ++i) {
        seed = chart.inverse_from(phi_c[i], seed, wall_accept);
        c[i] = seed;
    }

    for (int k = 1; k <= k_max; ++k) {
        // tip of C# is attached to 0: seed its preimage on the linear branch;
        // the C polyline starts at the shared corner, whose pullback is the
        // corresponding point on the pulled C# polyline
        const cplx tip_seed = cs.front() / h.multiplier();
        cs = detail::pull_back_polyline(h, cs, tip_seed);
        c = detail::pull_back_polyline(h, c, cs[corner]);

        bool inside = true;
        double margin = 1e300;
        for (const auto* poly : {&cs, &c}) {
            for (const cplx& z : *poly) {
                auto ev = chart.value_checked(z);
                if (!ev.ok) { inside = false; break; }
                const double re = ev.phi.real();
                if (re <= 0.0 || re >= out.strip_hi) { inside = false; break; }
                margin = std::min(margin, std::min(re, out.strip_hi - re));
            }
            if (!inside) break;
        }
        if (inside) {
            out.k = k;
            out.sector.k = k;
            out.sector.csharp = cs;
            out.sector.c = c;
            out.worst_margin = margin;
            return out;
        }
    }
    throw ConvergenceError("compute_k: no admissible k up to " + std::to_string(k_max) +
                           "; fitted constants are likely misconfigured");
}

// ---------------------------------------------------------------------------
// Return map and the renormalization operator.

// Phi . h^k . Phi^{-1} evaluated by tracing; the orbit leaving Dom h raises
// with the exit index.
inline cplx return_map(const FatouChart& chart, int k, cplx zeta) {
    cplx z = chart.inverse(zeta);
    for (int i = 0; i < k; ++i) {
        z = chart.map().value(z);
        if (!chart.map().in_domain(z))
            throw DomainError("return map: orbit left the domain at step " +
                              std::to_string(i + 1));
    }
    return chart.value(z);
}

struct PhiHull {
    double re_lo = 0, re_hi = 0, im_lo = 0;

    bool contains(cplx w) const {
        return w.real() >= re_lo && w.real() <= re_hi && w.imag() >= im_lo;
    }
};

inline PhiHull sector_phi_hull(const FatouChart& chart, const SectorSample& s) {
    PhiHull h;
    h.re_lo = 1e300;
    h.re_hi = -1e300;
    h.im_lo = 1e300;
    for (const cplx& z : s.all()) {
        auto ev = chart.value_checked(z);
        if (!ev.ok) continue;
        h.re_lo = std::min(h.re_lo, ev.phi.real());
        h.re_hi = std::max(h.re_hi, ev.phi.real());
        h.im_lo = std::min(h.im_lo, ev.phi.imag());
    }
    if (h.re_hi <= h.re_lo)
        throw ConvergenceError("sector hull degenerate");
    return h;
}

// ---------------------------------------------------------------------------
// Renormalized map with an optional polar memo grid.

struct MemoOptions {
    int n_radius = 192;
    int n_theta = 192;
    double r_min = 1e-8;
    double r_max = 2.2;
    bool enabled = true;
    // acceptance bar for the lift-representative inversion; big-|zeta|
    // queries invert inside the chart's wiggle band
    double inverse_accept = 0.10;
};

class RenormalizedMap final : public AnalyticMap {
public:
    RenormalizedMap(std::shared_ptr<const FatouChart> chart,
                    std::shared_ptr<const AnalyticMap> parent, int k, PhiHull hull,
                    double rho_cap, MemoOptions memo = {})
        : chart_(std::move(chart)), parent_(std::move(parent)), k_(k), hull_(hull),
          rho_cap_(rho_cap), memo_opts_(memo) {
        const double a0 = chart_->alpha();
        alpha_ = 1.0 / a0 - std::floor(1.0 / a0);
        if (memo_opts_.enabled) fill_memo();
        // sigma via Newton from the asymptotic seed -4 pi alpha i / f''(0);
        // f'' estimated by a circle fit at a radius where traced values are
        // well above the tracing noise. The achievable residual is bounded
        // by that noise, so the target here is looser than for closed-form
        // maps and the result is recorded.
        const cplx lam = unit_circle(alpha_);
        cplx f2 = 0;
        const double rc = 0.02;
        for (int i = 0; i < 8; ++i) {
            const cplx z = std::polar(rc, kTwoPi * (i + 0.13) / 8.0);
            f2 += (value(z) / z - lam) / z;
        }
        f2 *= 2.0 / 8.0;
        f2 /= lam;
        sigma_ = sigma_by_newton(*this, cplx(0.0, -4.0 * kPi * alpha_) / f2, 80, 1e-8);
        sigma_residual_ = std::abs(value(sigma_) - sigma_);
        sigma_multiplier_ = derivative_fd(sigma_);
    }

    double alpha() const override { return alpha_; }
    cplx sigma() const override { return sigma_; }
    cplx sigma_multiplier() const override { return sigma_multiplier_; }

    // The projection normalization pins the critical value exactly: the
    // parent chart sends cv to 1, and Exp(integers) = -4/27. The critical
    // point itself has no closed form here; charts anchor at cv instead.
    cplx critical_value() const override { return cplx(-4.0 / 27.0, 0.0); }

    cplx critical_point() const override {
        throw DomainError("renormalized map: critical point not tracked; "
                          "charts on this map use the critical value anchor");
    }

    double sigma_residual() const { return sigma_residual_; }

    cplx value(cplx zeta) const override {
        if (std::abs(zeta) < 1e-280) return cplx(0, 0);
        if (memo_opts_.enabled) {
            const double r = std::abs(zeta);
            if (r >= memo_opts_.r_min * 1.02 && r <= memo_opts_.r_max * 0.98) {
                cplx v;
                if (memo_lookup(zeta, v)) return v;
            }
        }
        return value_direct(zeta);
    }

    cplx value_direct(cplx zeta) const { return value_traced(zeta, cplx(0, 0), false); }

    // Full trace through the parent chart. `rep_seed` short-circuits the
    // inversion seed lookup when the caller knows a nearby representative
    // preimage (grid fills walk neighboring nodes).
    cplx value_traced(cplx zeta, cplx rep_seed, bool have_seed) const {
        if (std::abs(zeta) < 1e-280) return cplx(0, 0);
        if (!in_domain(zeta))
            throw DomainError("renormalized map: query outside the domain cap");
        // lift of zeta under Exp, shifted into the sector hull
        cplx w = log_branch(zeta, hull_.re_lo, hull_.re_lo + 1.0);
        int tries = 0;
        while (!hull_.contains(w)) {
            // try integer translates of increasing magnitude
            ++tries;
            const int mag = (tries + 1) / 2;
            const int sgn = (tries % 2 == 1) ? 1 : -1;
            const cplx cand = w + cplx(static_cast<double>(sgn * mag), 0.0);
            if (hull_.contains(cand)) { w = cand; break; }
            if (tries > 8)
                throw DomainError("renormalized map: no representative in the sector hull");
        }
        cplx z = chart_->inverse_from(w, have_seed ? rep_seed : chart_->inverse_seed_point(w),
                                      memo_opts_.inverse_accept);
        last_rep_ = z;
        for (int i = 0; i < k_; ++i) {
            z = parent_->value(z);
            if (!parent_->in_domain(z))
                throw DomainError("renormalized map: return orbit left the domain");
        }
        return exp_projection(chart_->value(z));
    }

    cplx last_representative() const { return last_rep_; }

    cplx derivative(cplx z) const override { return derivative_fd(z); }

    cplx second_derivative(cplx z) const override {
        const double step = std::max(1e-5, 1e-3 * std::abs(z));
        cplx acc = 0;
        // 4-point circle average of the second difference
        for (int i = 0; i < 4; ++i) {
            const cplx d = std::polar(step, kTwoPi * i / 4.0);
            acc += (value(z + d) - 2.0 * value(z) + value(z - d)) / (d * d);
        }
        return acc / 4.0;
    }

    bool in_domain(cplx zeta) const override { return std::abs(zeta) < rho_cap_; }

    std::string name() const override { return "renormalized(" + parent_->name() + ")"; }

    double memo_worst_error() const { return memo_error_; }

private:
    cplx derivative_fd(cplx z) const {
        const double step = std::max(1e-6, 1e-4 * std::abs(z));
        cplx acc = 0;
        for (int i = 0; i < 4; ++i) {
            const cplx d = std::polar(step, kTwoPi * i / 4.0);
            acc += (value(z + d) - value(z - d)) / (2.0 * d);
        }
        return acc / 4.0;
    }

    // The grid stores f(zeta)/zeta, which varies slowly across the annulus
    // (the linear factor dominates f near 0), so bicubic interpolation holds
    // accuracy on a modest grid.
    void fill_memo() {
        const int nr = memo_opts_.n_radius, nt = memo_opts_.n_theta;
        grid_.assign(static_cast<std::size_t>(nr) * nt, cplx(0, 0));
        grid_ok_.assign(static_cast<std::size_t>(nr) * nt, 0);
        log_r0_ = std::log(memo_opts_.r_min);
        dlr_ = (std::log(memo_opts_.r_max) - log_r0_) / (nr - 1);
        // Walk each radius row seeding the representative inversion from the
        // previous node; cold Newton starts per node would dominate the fill.
        for (int i = 0; i < nr; ++i) {
            const double r = std::exp(log_r0_ + i * dlr_);
            bool have = false;
            cplx seed{};
            for (int j = 0; j < nt; ++j) {
                const cplx zeta = std::polar(r, kTwoPi * j / nt);
                try {
                    const cplx v = value_traced(zeta, seed, have);
                    grid_[static_cast<std::size_t>(i) * nt + j] = v / zeta;
                    grid_ok_[static_cast<std::size_t>(i) * nt + j] = 1;
                    seed = last_rep_;
                    have = true;
                } catch (const Error&) {
                    have = false;
                }
            }
        }
        // spot check the interpolation against direct traces
        std::uint64_t s = 0x9e3779b97f4a7c15ull;
        auto next = [&] {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            return (s >> 11) * 0x1.0p-53;
        };
        double worst = 0;
        for (int probe = 0; probe < 24; ++probe) {
            const double r = std::exp(log_r0_ + (0.1 + 0.8 * next()) * (nr - 1) * dlr_);
            const cplx zeta = std::polar(r, kTwoPi * next());
            cplx vi;
            if (!memo_lookup(zeta, vi)) continue;
            try {
                worst = std::max(worst, std::abs(vi - value_direct(zeta)));
            } catch (const Error&) {
            }
        }
        memo_error_ = worst;
    }

    // Catmull-Rom in log r and theta (theta wraps); false when any needed
    // node failed to evaluate.
    bool memo_lookup(cplx zeta, cplx& out) const {
        const int nr = memo_opts_.n_radius, nt = memo_opts_.n_theta;
        const double lr = std::log(std::abs(zeta));
        const double th = std::arg(zeta) < 0 ? std::arg(zeta) + kTwoPi : std::arg(zeta);
        const double fi = (lr - log_r0_) / dlr_;
        const double fj = th / (kTwoPi / nt);
        const int i1 = static_cast<int>(std::floor(fi));
        const int j1 = static_cast<int>(std::floor(fj));
        if (i1 < 1 || i1 + 2 >= nr) return false;
        const double u = fi - i1, v = fj - j1;
        auto node = [&](int i, int j, cplx& val) {
            const int jw = ((j % nt) + nt) % nt;
            const std::size_t idx = static_cast<std::size_t>(i) * nt + jw;
            if (!grid_ok_[idx]) return false;
            val = grid_[idx];
            return true;
        };
        auto cr = [](cplx p0, cplx p1, cplx p2, cplx p3, double x) {
            return p1 + 0.5 * x * (p2 - p0 +
                   x * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                   x * (3.0 * (p1 - p2) + p3 - p0)));
        };
        std::array<cplx, 4> rows;
        for (int di = -1; di <= 2; ++di) {
            std::array<cplx, 4> p;
            for (int dj = -1; dj <= 2; ++dj)
                if (!node(i1 + di, j1 + dj, p[dj + 1])) return false;
            rows[di + 1] = cr(p[0], p[1], p[2], p[3], v);
        }
        out = zeta * cr(rows[0], rows[1], rows[2], rows[3], u);
        return true;
    }

    std::shared_ptr<const FatouChart> chart_;
    std::shared_ptr<const AnalyticMap> parent_;
    int k_;
    PhiHull hull_;
    double rho_cap_;
    MemoOptions memo_opts_;
    double alpha_;
    cplx sigma_, sigma_multiplier_;
    double sigma_residual_ = 0;
    std::vector<cplx> grid_;
    std::vector<char> grid_ok_;
    double log_r0_ = 0, dlr_ = 1;
    double memo_error_ = 0;
    mutable cplx last_rep_{};
};

// ---------------------------------------------------------------------------
// The tower.

struct RenormLevel {
    int index = 0;
    std::shared_ptr<const AnalyticMap> map;
    std::shared_ptr<const FatouChart> chart;
    double alpha = 0;
    int k = 0;
    SectorSample sector;          // S_n^0 boundary sample in the level plane
    PhiHull hull;                 // Phi_n(S_n^0) bounding box
    double rotation_check = 0;    // |frac(arg f'(0)/2pi) - alpha_n|
    double memo_error = 0;
};

struct TowerOptions {
    ChartOptions chart;
    double k_bold = 2.0;
    int k_max = 20;
    int sector_density = 24;
    double rho_cap = 2.0;
    MemoOptions memo;
    int max_depth_guard = 2;
};

// Finite-difference rotation number at 0: 8-point circle average of f(z)/z.
template <typename MapLike>
double rotation_number_at_zero(const MapLike& f, double radius = 1e-4) {
    cplx acc = 0;
    for (int i = 0; i < 8; ++i) {
        const cplx z = std::polar(radius, kTwoPi * (i + 0.3) / 8.0);
        acc += f.value(z) / z;
    }
    acc /= 8.0;
    double t = std::arg(acc) / kTwoPi;
    if (t < 0) t += 1.0;
    return t;
}

class RenormTower {
public:
    RenormTower(const HighTypeAngle& angle, int depth, TowerOptions opts = {})
        : angle_(angle) {
        if (depth > opts.max_depth_guard)
            throw ConfigError("tower depth capped at " +
                              std::to_string(opts.max_depth_guard) +
                              " (each level multiplies orbit cost by ~1/alpha)");
        if (static_cast<std::size_t>(depth) >= angle.tower.size())
            throw DomainError("tower depth exceeds the angle's digit depth");

        auto base = std::make_shared<QuadraticMap>(angle.alpha());
        push_level(base, 0, opts);
        for (int n = 1; n <= depth; ++n) {
            const RenormLevel& prev = levels_[n - 1];
            auto rmap = std::make_shared<RenormalizedMap>(
                prev.chart, prev.map, prev.k, prev.hull, opts.rho_cap, opts.memo);
            push_level(rmap, n, opts);
        }
    }

    const RenormLevel& level(std::size_t n) const { return levels_.at(n); }
    std::size_t depth() const { return levels_.size() - 1; }
    const HighTypeAngle& angle() const { return angle_; }

private:
    void push_level(std::shared_ptr<const AnalyticMap> map, int n, const TowerOptions& opts) {
        RenormLevel lvl;
        lvl.index = n;
        lvl.map = map;
        lvl.alpha = map->alpha();
        ChartOptions copts = opts.chart;
        lvl.chart = std::make_shared<FatouChart>(*map, copts);
        auto kc = compute_k(*lvl.chart, *map, opts.k_bold, opts.k_max, opts.sector_density);
        lvl.k = kc.k;
        lvl.sector = kc.sector;
        lvl.hull = sector_phi_hull(*lvl.chart, kc.sector);
        const double expected = angle_.alpha_level(static_cast<std::size_t>(n));
        lvl.rotation_check = std::abs(rotation_number_at_zero(*map) - expected);
        if (auto* rm = dynamic_cast<const RenormalizedMap*>(map.get()))
            lvl.memo_error = rm->memo_worst_error();
        levels_.push_back(std::move(lvl));
    }

    HighTypeAngle angle_;
    std::vector<RenormLevel> levels_;
};

// ---------------------------------------------------------------------------
// Changes of coordinates psi_n = Phi_{n-1}^{-1} . eta_n and the conjugacy
// residuals. eta_n is the inverse Exp-branch with real part in the fixed
// window [1/4, 5/4) (a choice within the admissible band, recorded here).

inline constexpr double kEtaWindowLo = 0.25;

inline cplx eta_branch(cplx z_level_n) {
    return log_branch(z_level_n, kEtaWindowLo, kEtaWindowLo + 1.0);
}

inline cplx psi_map(const RenormLevel& coarser, cplx w_level_n) {
    return coarser.chart->inverse(eta_branch(w_level_n));
}

// Psi_n = psi_1 . ... . psi_n down the whole tower.
inline cplx big_psi(const RenormTower& tower, std::size_t n, cplx w) {
    cplx z = w;
    for (std::size_t lev = n; lev >= 1; --lev)
        z = psi_map(tower.level(lev - 1), z);
    return z;
}

struct ConjugacyReport {
    double residual_orbit = 0;   // identity with q_n iterates
    double residual_sector = 0;  // identity with k_n q_n + q_{n-1} iterates on S_n^0
    std::size_t samples_orbit = 0;
    std::size_t samples_sector = 0;
};

// Residuals of  f_0^{q_n} . Psi_n = Psi_n . f_n  on the trimmed strip and of
// f_0^{(k_n q_n + q_{n-1})} . Psi_n = Psi_n . f_n^{k_n}  on the sector sample.
inline ConjugacyReport conjugacy_residual(const RenormTower& tower, std::size_t n,
                                          std::size_t n_samples = 50) {
    if (n < 1 || n > tower.depth())
        throw DomainError("conjugacy test needs 1 <= n <= tower depth");
    ConjugacyReport rep;
    const RenormLevel& lvl = tower.level(n);
    const auto& f0 = *tower.level(0).map;
    const double qn = tower.angle().q(n - 1);       // q_n (convergents are 1-based)
    const double qn1 = n >= 2 ? tower.angle().q(n - 2) : 1.0;  // q_{n-1}; q_0 = 1
    const auto iterate0 = [&](cplx z, long m) {
        for (long i = 0; i < m; ++i) z = f0.value(z);
        return z;
    };

    // strip samples
    const double hi = std::floor(1.0 / lvl.alpha) - 2.0 - 1.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double re = 0.5 + (hi - 1.0) * (i + 0.5) / n_samples;
        const double im = 0.5 + 2.0 * ((i * 7) % 10) / 10.0;
        cplx w;
        try {
            w = lvl.chart->inverse(cplx(re, im));
        } catch (const Error&) {
            continue;
        }
        try {
            const cplx lhs = iterate0(big_psi(tower, n, w), static_cast<long>(qn));
            const cplx rhs = big_psi(tower, n, lvl.map->value(w));
            rep.residual_orbit = std::max(rep.residual_orbit, std::abs(lhs - rhs));
            ++rep.samples_orbit;
        } catch (const Error&) {
        }
    }

    // sector samples: interior points near the boundary sample
    const long m2 = static_cast<long>(lvl.k * qn + qn1);
    std::size_t stride = std::max<std::size_t>(1, lvl.sector.csharp.size() / n_samples);
    for (std::size_t i = 0; i + 1 < lvl.sector.csharp.size(); i += stride) {
        const cplx w = lvl.sector.csharp[i];
        try {
            cplx fk = w;
            for (int t = 0; t < lvl.k; ++t) fk = lvl.map->value(fk);
            const cplx lhs = iterate0(big_psi(tower, n, w), m2);
            const cplx rhs = big_psi(tower, n, fk);
            rep.residual_sector = std::max(rep.residual_sector, std::abs(lhs - rhs));
            ++rep.samples_sector;
        } catch (const Error&) {
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Two-path check: Exp . Phi_n(f_n^{l}(z)) against f_{n+1}(Exp . Phi_n(z)),
// searching l over the admissible range.

struct TwoPathResult {
    bool found = false;
    int ell = 0;
    double mismatch = 1e300;
};

inline TwoPathResult renorm_two_path(const RenormLevel& lvl, const AnalyticMap& next_map,
                                     cplx z, double k_bold = 2.0) {
    TwoPathResult out;
    auto ev = lvl.chart->value_checked(z);
    if (!ev.ok) return out;
    const cplx w = exp_projection(ev.phi);
    cplx fw;
    try {
        fw = next_map.value(w);
    } catch (const Error&) {
        return out;
    }
    const int ell_max = static_cast<int>(std::floor(1.0 / lvl.alpha) - k_bold + lvl.k - 1);
    cplx zi = z;
    for (int ell = 1; ell <= ell_max; ++ell) {
        try {
            zi = lvl.map->value(zi);
        } catch (const Error&) {
            break;
        }
        if (!lvl.map->in_domain(zi)) break;
        auto ei = lvl.chart->value_checked(zi);
        if (!ei.ok) continue;
        const double d = std::abs(exp_projection(ei.phi) - fw);
        if (d < out.mismatch) {
            out.mismatch = d;
            out.ell = ell;
            out.found = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Descent pairs (z_i, zeta_i): zeta from the chart (the anchored coordinate
// doubles as the inverse-extension coordinate on the sector fan), z_{i+1}
// from the projection.

struct DescentStep {
    cplx z;
    cplx zeta;
    bool in_ball_region = false;  // zeta in one of the B(j, delta1)
    bool placement_ok = false;    // the strip/ball placement constraint
};

inline std::vector<DescentStep> descend_pairs(const RenormTower& tower, cplx z0,
                                              std::size_t depth,
                                              const FittedConstants& fc = {}) {
    if (depth > tower.depth())
        throw DomainError("descent depth exceeds tower depth");
    std::vector<DescentStep> out;
    cplx z = z0;
    for (std::size_t lev = 0; lev <= depth; ++lev) {
        const RenormLevel& L = tower.level(lev);
        DescentStep step;
        step.z = z;
        auto ev = L.chart->value_checked(z);
        if (!ev.ok) {
            // try a few forward iterates (left-extension style)
            bool found = false;
            cplx zi = z;
            for (int j = 1; j <= 8 && !found; ++j) {
                try {
                    zi = L.map->value(zi);
                } catch (const Error&) {
                    break;
                }
                auto e2 = L.chart->value_checked(zi);
                if (e2.ok) {
                    ev = e2;
                    ev.phi -= static_cast<double>(j);
                    found = true;
                }
            }
            if (!found)
                throw ConvergenceError("descent stuck at level " + std::to_string(lev));
        }
        // the A-region keeps the chart value; everything else is a sector-fan
        // point whose dagger coordinate differs by the exact monodromy 1/alpha
        // (residue of Phi' at the fixed point)
        cplx zeta = ev.phi;
        bool in_ball = false;
        for (int j = 1; j <= static_cast<int>(fc.k_prime); ++j)
            if (std::abs(zeta - cplx(static_cast<double>(j), 0.0)) <= fc.delta1)
                in_ball = true;
        const bool in_a_strip = zeta.real() > fc.k_prime + 0.5 &&
                                zeta.real() < 1.0 / L.alpha - fc.k_bold;
        if (!in_ball && !in_a_strip) zeta += cplx(1.0 / L.alpha, 0.0);
        step.zeta = zeta;
        step.in_ball_region = in_ball;
        const double lo = fc.k_prime + 0.5;
        const double hi = 1.0 / L.alpha - fc.k_bold + L.k + fc.k_prime;
        step.placement_ok =
            in_ball || (step.zeta.real() >= lo && step.zeta.real() <= hi);
        out.push_back(step);
        z = exp_projection(step.zeta);
    }
    return out;
}

}  // namespace npr
