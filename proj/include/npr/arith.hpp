#pragma once

// Continued-fraction arithmetic for rotation numbers: digit sequences,
// the Gauss tower alpha_0, alpha_1, ..., convergents p_k/q_k, Brjuno sums,
// and the high-type test inf a_i >= N.
//
// The digit sequence is the primary representation. Tower entries are
// re-expanded from digit tails rather than iterating frac(1/x) in floating
// point, which loses the tail after a handful of levels.

#include <algorithm>
#include <cstdint>
#include <utility>

#include "npr/core.hpp"

namespace npr {

struct CFDigits {
    std::vector<int> digits;

    std::size_t depth() const { return digits.size(); }

    void validate() const {
        if (digits.empty())
            throw DomainError("continued fraction needs at least one digit");
        for (int a : digits)
            if (a < 1)
                throw DomainError("continued fraction digit must be >= 1, got " +
                                  std::to_string(a));
    }
};

inline bool is_high_type(const CFDigits& d, int n_floor) {
    return std::all_of(d.digits.begin(), d.digits.end(),
                       [&](int a) { return a >= n_floor; });
}

// Value of [0; a_{from+1}, ..., a_{to}] by backward evaluation (stable).
inline long double cf_tail_value(const CFDigits& d, std::size_t from, std::size_t to) {
    long double x = 0.0L;
    for (std::size_t i = to; i > from; --i)
        x = 1.0L / (static_cast<long double>(d.digits[i - 1]) + x);
    return x;
}

struct HighTypeAngle {
    CFDigits digits;
    long double value = 0.0L;                      // [0; a_1, ..., a_depth]
    std::vector<long double> tower;                // alpha_0 .. alpha_{depth-1}
    std::vector<std::pair<std::uint64_t, std::uint64_t>> convergents;  // (p_k, q_k)
    int type_floor = 0;                            // 0 = not flagged high-type

    double alpha() const { return static_cast<double>(value); }

    double alpha_level(std::size_t n) const {
        if (n >= tower.size())
            throw DomainError("gauss tower level " + std::to_string(n) +
                              " exceeds depth " + std::to_string(tower.size()));
        return static_cast<double>(tower[n]);
    }

    // q_k as double; wraps past ~1.8e19, callers only use shallow levels.
    double q(std::size_t k) const {
        if (k >= convergents.size()) throw DomainError("convergent index out of range");
        return static_cast<double>(convergents[k].second);
    }
    double p(std::size_t k) const {
        if (k >= convergents.size()) throw DomainError("convergent index out of range");
        return static_cast<double>(convergents[k].first);
    }
};

inline HighTypeAngle cf_from_digits(const CFDigits& d, std::size_t depth, int type_floor = 0) {
    d.validate();
    if (depth == 0 || depth > d.depth())
        throw DomainError("depth must be in [1, stored digit count]");

    HighTypeAngle a;
    a.digits.digits.assign(d.digits.begin(), d.digits.begin() + depth);
    a.type_floor = type_floor;
    a.value = cf_tail_value(a.digits, 0, depth);
    if (!(a.value > 0.0L && a.value < 1.0L))
        throw DomainError("finite continued fraction value must lie in (0,1)");
    if (type_floor > 0 && !is_high_type(a.digits, type_floor))
        throw DomainError("digit sequence violates the requested type floor");

    a.tower.resize(depth);
    for (std::size_t i = 0; i < depth; ++i)
        a.tower[i] = cf_tail_value(a.digits, i, depth);

    // p_{-1}=1, p_0=0 ; q_{-1}=0, q_0=1, then the standard recurrence.
    // Products wrap mod 2^64 at large depth; the determinant identity is
    // preserved under wrapping, which is all the tests rely on.
    a.convergents.resize(depth);
    std::uint64_t pm1 = 1, p0 = 0, qm1 = 0, q0 = 1;
    for (std::size_t k = 0; k < depth; ++k) {
        const std::uint64_t ak = static_cast<std::uint64_t>(a.digits.digits[k]);
        const std::uint64_t pk = ak * p0 + pm1;
        const std::uint64_t qk = ak * q0 + qm1;
        a.convergents[k] = {pk, qk};
        pm1 = p0; p0 = pk;
        qm1 = q0; q0 = qk;
    }
    return a;
}

// Determinant p_k q_{k-1} - p_{k-1} q_k computed in wrapping arithmetic;
// equals +-1 exactly (mod 2^64) for a correct convergent table.
inline std::int64_t convergent_determinant(const HighTypeAngle& a, std::size_t k) {
    if (k >= a.convergents.size()) throw DomainError("convergent index out of range");
    const std::uint64_t pk = a.convergents[k].first;
    const std::uint64_t qk = a.convergents[k].second;
    std::uint64_t pk1 = 0, qk1 = 1;  // (p_0, q_0) = (0, 1) below the first entry
    if (k > 0) { pk1 = a.convergents[k - 1].first; qk1 = a.convergents[k - 1].second; }
    return static_cast<std::int64_t>(pk * qk1 - pk1 * qk);
}

struct ExpandResult {
    CFDigits digits;
    bool hit_precision_floor = false;  // stopped because digits became unreliable
    bool hit_tol = false;              // remainder fell below tol (rational-like input)
    long double residual = 0.0L;       // |x - value(digits)|
};

// Gauss-map expansion of x with running error tracking. Never emits a digit
// once the propagated input uncertainty could flip it; reports which stop
// rule fired. Floating inputs carry ~1 ulp of uncertainty, amplified by
// (1/x_k)^2 per level, so deep tails of large-digit fractions are not
// recoverable from a 64-bit mantissa; expansion stops there instead of
// guessing.
inline ExpandResult cf_expand(long double x, std::size_t max_depth = 64,
                              long double tol = 1e-15L) {
    if (!(x > 0.0L && x < 1.0L))
        throw DomainError("cf_expand requires x in (0,1)");

    ExpandResult r;
    long double cur = x;
    // initial absolute uncertainty: one ulp of the input
    long double err = std::max(std::abs(x) * 1.1e-19L, 1e-30L);
    for (std::size_t k = 0; k < max_depth; ++k) {
        if (cur < tol) { r.hit_tol = true; break; }
        const long double inv = 1.0L / cur;
        long double a = std::floor(inv);
        long double frac = inv - a;
        // error after the Gauss step: d(1/x) = -1/x^2 dx
        const long double err_next = err * inv * inv + std::abs(inv) * 1.1e-19L;
        // remainders indistinguishable from 0 or 1 terminate as rational;
        // only meaningful while the ambiguity window is far below any
        // legitimate remainder, else the precision floor rules below decide
        const long double snap = std::min(std::max(tol, 64.0L * err_next), 1e-4L);
        if (frac < snap || 1.0L - frac < snap) {
            if (1.0L - frac < snap) a += 1.0L;
            r.digits.digits.push_back(static_cast<int>(a));
            r.hit_tol = true;
            break;
        }
        // digit could flip under propagated input uncertainty: stop cleanly
        if (err_next > 0.25L * std::min(frac, 1.0L - frac)) {
            r.hit_precision_floor = true;
            break;
        }
        r.digits.digits.push_back(static_cast<int>(a));
        cur = frac;
        err = err_next;
    }
    if (r.digits.digits.empty())
        throw DomainError("cf_expand produced no reliable digit");
    r.residual = std::abs(x - cf_tail_value(r.digits, 0, r.digits.depth()));
    return r;
}

inline std::vector<long double> gauss_tower(const HighTypeAngle& a, std::size_t n) {
    if (n >= a.tower.size())
        throw DomainError("requested tower level exceeds digit depth");
    return std::vector<long double>(a.tower.begin(), a.tower.begin() + n + 1);
}

struct BrjunoValue {
    double value = 0.0;
    std::size_t truncation_depth = 0;
    double tail_bound = 0.0;
};

// Partial Brjuno sum  sum_{k=0}^{depth} (prod_{i<k} alpha_i) log(1/alpha_k),
// with a geometric tail bound: consecutive products satisfy
// alpha_i alpha_{i+1} <= 1/2 always, and alpha_i <= 1/2 when all digits
// are >= 2, so the remainder is bounded by beta * L * 2 (or * 4 in the
// digit-1 case), L being log(1/alpha) at the largest stored digit.
inline BrjunoValue brjuno_sum(const HighTypeAngle& a, std::size_t depth) {
    if (depth >= a.tower.size())
        throw DomainError("brjuno depth exceeds tower depth");
    BrjunoValue b;
    b.truncation_depth = depth;
    long double beta = 1.0L;  // prod_{i<k} alpha_i
    long double acc = 0.0L;
    for (std::size_t k = 0; k <= depth; ++k) {
        acc += beta * std::log(1.0L / a.tower[k]);
        beta *= a.tower[k];
    }
    b.value = static_cast<double>(acc);
    const int max_digit = *std::max_element(a.digits.digits.begin(), a.digits.digits.end());
    const int min_digit = *std::min_element(a.digits.digits.begin(), a.digits.digits.end());
    const long double max_log = std::log(static_cast<long double>(max_digit) + 1.0L);
    const long double geom = (min_digit >= 2) ? 2.0L : 4.0L;
    b.tail_bound = static_cast<double>(beta * max_log * geom);
    return b;
}

}  // namespace npr
