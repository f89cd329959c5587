#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace npr {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Base error for all precondition / domain violations in the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

struct BranchError : Error {
    explicit BranchError(const std::string& what) : Error(what) {}
};

struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

inline double sqr(double x) { return x * x; }

inline cplx unit_circle(double turns) {
    return std::polar(1.0, kTwoPi * turns);
}

// Ordinary least squares y = a + b x; used for decay-rate fits.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    std::size_t n = 0;
    bool degenerate = false;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.n = x.size();
    if (x.size() != y.size() || x.size() < 2) {
        f.degenerate = true;
        return f;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double n = static_cast<double>(x.size());
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-30) {
        f.degenerate = true;
        return f;
    }
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        ss += sqr(y[i] - (f.intercept + f.slope * x[i]));
    f.rms_residual = std::sqrt(ss / n);
    return f;
}

// FNV-1a, used to stamp reports with a config fingerprint.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace npr
