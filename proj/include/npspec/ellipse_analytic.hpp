#pragma once

// Closed-form NP spectral data for ellipses in elliptic coordinates.
//
// All exponentially large factors are kept in combined form (e.g.
// cosh(n*rho) * e^{-n*rho_z} is evaluated as (e^{n(rho-rho_z)} + e^{-n(rho+rho_z)})/2)
// so every helper stays finite for arbitrarily high mode index.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "npspec/curve.hpp"
#include "npspec/errors.hpp"

namespace npspec::ellipse {

enum class Parity { cosine, sine };

struct EllipseMode {
    int n = 1;
    Parity parity = Parity::cosine;
    double rho0 = std::numbers::ln2;
};

inline void check_mode_args(int n, double rho0) {
    if (n < 1)
        throw DomainError("mode index must be a positive integer");
    if (!(rho0 > 0.0) || !std::isfinite(rho0))
        throw DomainError("elliptic radius rho0 must be positive and finite");
}

// Eigenvalue magnitude 1/(2 e^{2 n rho0}); the cosine family sits at +this value.
inline double eigenvalue_n(double rho0, int n) {
    check_mode_args(n, rho0);
    return 0.5 * std::exp(-2.0 * n * rho0);
}

// Signed eigenvalue: K* phi_n^c = +lambda_n phi_n^c, K* phi_n^s = -lambda_n phi_n^s.
inline double family_eigenvalue(double rho0, int n, Parity parity) {
    const double lam = eigenvalue_n(rho0, n);
    return parity == Parity::cosine ? lam : -lam;
}

// cosh(n rho0) e^{-n rho0} resp. sinh(n rho0) e^{-n rho0}, both in (0, 1].
inline double scaled_hyp(double rho0, int n, Parity parity) {
    const double q = std::exp(-2.0 * n * rho0);
    return parity == Parity::cosine ? 0.5 * (1.0 + q) : 0.5 * (1.0 - q);
}

inline double xi(const EllipseShape& shape, double rho, double omega) {
    const double sh = std::sinh(rho);
    const double sn = std::sin(omega);
    return shape.R * std::sqrt(sh * sh + sn * sn);
}

// Unnormalized eigendensity cos(n w)/Xi resp. sin(n w)/Xi on the boundary.
inline double mode_density(const EllipseShape& shape, int n, Parity parity, double omega) {
    check_mode_args(n, shape.rho0);
    const double trig =
        parity == Parity::cosine ? std::cos(n * omega) : std::sin(n * omega);
    return trig / xi(shape, shape.rho0, omega);
}

// H*-norm squared of the unnormalized density: pi (1 +- e^{-2 n rho0}) / (2n).
inline double hstar_norm_sq(double rho0, int n, Parity parity) {
    check_mode_args(n, rho0);
    return std::numbers::pi * scaled_hyp(rho0, n, parity) / n;
}

// Single-layer potential of the H*-normalized eigendensity psi_n^{c,s}.
inline double single_layer_mode(const EllipseMode& mode, const EllipticPoint& pt) {
    check_mode_args(mode.n, mode.rho0);
    if (!(pt.rho >= 0.0))
        throw DomainError("elliptic radius must be nonnegative");
    const int n = mode.n;
    const double rho0 = mode.rho0;
    const double fac = scaled_hyp(rho0, n, mode.parity);
    const double trig = mode.parity == Parity::cosine ? std::cos(n * pt.omega)
                                                      : std::sin(n * pt.omega);
    const double root_npi = std::sqrt(n * std::numbers::pi);
    double radial;
    if (pt.rho <= rho0) {
        // cosh resp. sinh of (n rho), carrying the e^{-n rho0} of the amplitude.
        const double up = std::exp(n * (pt.rho - rho0));
        const double dn = std::exp(-n * (pt.rho + rho0));
        const double hyp = mode.parity == Parity::cosine ? 0.5 * (up + dn) : 0.5 * (up - dn);
        radial = hyp / std::sqrt(fac);
    } else {
        radial = std::sqrt(fac) * std::exp(-n * (pt.rho - rho0));
    }
    return -radial * trig / root_npi;
}

namespace detail {

// a . U(theta) b for the rotation U(theta) = [[cos, -sin], [sin, cos]].
inline double rotated_dot(const Eigen::Vector2d& a, double theta, const Eigen::Vector2d& b) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return a.x() * (c * b.x() - s * b.y()) + a.y() * (s * b.x() + c * b.y());
}

} // namespace detail

// a . grad S[psi_n^p] evaluated at an exterior point z (elliptic coordinates).
inline double grad_exterior_mode(const EllipseShape& shape, int n, Parity parity,
                                 const EllipticPoint& z, const Eigen::Vector2d& a) {
    check_mode_args(n, shape.rho0);
    if (!(z.rho > shape.rho0))
        throw DomainError("grad_exterior_mode requires an exterior point (rho > rho0)");
    const double fac = scaled_hyp(shape.rho0, n, parity);
    const double amp = std::sqrt(fac / (n * std::numbers::pi));
    const double sh = std::sinh(z.rho);
    const double ch = std::cosh(z.rho);
    const double xi_sq = shape.R * shape.R * (sh * sh + std::sin(z.omega) * std::sin(z.omega));
    const Eigen::Vector2d b(std::cos(z.omega) * sh, std::sin(z.omega) * ch);
    const double theta = parity == Parity::cosine ? n * z.omega : n * z.omega - 0.5 * std::numbers::pi;
    const double decay = std::exp(-n * (z.rho - shape.rho0));
    return amp * shape.R * n * decay / xi_sq * detail::rotated_dot(a, theta, b);
}

// |alpha_n^c|^2 + |alpha_n^s|^2 with the signed per-family prefactors
// (1/2 - lambda)^2 and (1/2 + lambda)^2.
inline double pair_alpha_sq(int n, const EllipticPoint& z, const Eigen::Vector2d& a,
                            double rho0, double R) {
    EllipseShape shape;
    shape.R = R;
    shape.rho0 = rho0;
    shape.validate();
    const double lam = eigenvalue_n(rho0, n);
    const double gc = grad_exterior_mode(shape, n, Parity::cosine, z, a);
    const double gs = grad_exterior_mode(shape, n, Parity::sine, z, a);
    const double wc = 0.5 - lam;
    const double ws = 0.5 + lam;
    return wc * wc * gc * gc + ws * ws * gs * gs;
}

// Number of modes with lambda_n > delta; zero once delta reaches 1/2.
inline int cutoff_N(double delta, double rho0) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("delta must be positive and finite");
    if (!(rho0 > 0.0))
        throw DomainError("rho0 must be positive");
    if (delta >= 0.5)
        return 0;
    return static_cast<int>(std::floor(-std::log(2.0 * delta) / (2.0 * rho0)));
}

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
    int n_used = 0;
};

// Interior energy series || grad(u_delta - F_z) ||^2 for lambda = i delta:
//   sum_n [ (1/2 - lam_n) |alpha_n^c|^2 + (1/2 + lam_n) |alpha_n^s|^2 ] / (delta^2 + lam_n^2).
inline SeriesValue resonance_norm_series(double rho0, double R, const EllipticPoint& z,
                                         const Eigen::Vector2d& a, double delta, int n_max) {
    EllipseShape shape;
    shape.R = R;
    shape.rho0 = rho0;
    shape.validate();
    if (!(z.rho > rho0))
        throw InvalidSourceError("dipole source must lie outside the ellipse (rho_z > rho0)");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("delta must be positive and finite");
    const int needed = 2 * cutoff_N(delta, rho0);
    if (n_max < needed || n_max < 1)
        throw InsufficientTruncationError("N_max below twice the resonant cutoff");

    SeriesValue out;
    double last_term = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double lam = eigenvalue_n(rho0, n);
        const double gc = grad_exterior_mode(shape, n, Parity::cosine, z, a);
        const double gs = grad_exterior_mode(shape, n, Parity::sine, z, a);
        const double wc = 0.5 - lam;
        const double ws = 0.5 + lam;
        const double denom = delta * delta + lam * lam;
        last_term = (wc * wc * wc * gc * gc + ws * ws * ws * gs * gs) / denom;
        out.value += last_term;
    }
    out.n_used = n_max;
    // Geometric tail: term ratio tends to e^{-2(rho_z - rho0)} times a slowly
    // varying factor bounded by (1 + 1/n)^2.
    const double grow = 1.0 + 1.0 / n_max;
    const double ratio = std::exp(-2.0 * (z.rho - rho0)) * grow * grow;
    if (!(ratio < 1.0))
        throw InsufficientTruncationError("series tail is not yet geometric at N_max");
    out.tail_bound = std::abs(last_term) * ratio / (1.0 - ratio);
    return out;
}

enum class RateCase { power_log, log_squared, bounded };

struct RatePrediction {
    RateCase tag = RateCase::bounded;
    double p = 0.0;
    double q = 0.0;
};

// Leading small-delta behavior of the dissipated-energy scaling delta^p |log delta|^q.
inline RatePrediction predicted_rate(double rho0, double rho_z) {
    if (!(rho0 > 0.0))
        throw DomainError("rho0 must be positive");
    if (!(rho_z > rho0))
        throw InvalidSourceError("source must be outside the ellipse (rho_z > rho0)");
    const double ratio = rho_z / rho0;
    RatePrediction out;
    if (std::abs(ratio - 3.0) < 1e-9) {
        out.tag = RateCase::log_squared;
        out.p = 0.0;
        out.q = 2.0;
    } else if (ratio < 3.0) {
        out.tag = RateCase::power_log;
        out.p = -3.0 + ratio;
        out.q = 1.0;
    } else {
        out.tag = RateCase::bounded;
        out.p = 0.0;
        out.q = 0.0;
    }
    return out;
}

// u_delta(x) - F_z(x) as a mode series, for lambda = i delta.
inline std::complex<double> exterior_series(const EllipticPoint& z, const Eigen::Vector2d& a,
                                            const EllipticPoint& x, double delta, double rho0,
                                            double R, int n_max) {
    EllipseShape shape;
    shape.R = R;
    shape.rho0 = rho0;
    shape.validate();
    if (!(z.rho > rho0))
        throw InvalidSourceError("dipole source must lie outside the ellipse (rho_z > rho0)");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("delta must be positive and finite");
    if (n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");
    const std::complex<double> lambda(0.0, delta);
    std::complex<double> sum(0.0, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        const double lam = eigenvalue_n(rho0, n);
        const double ac = (0.5 - lam) * grad_exterior_mode(shape, n, Parity::cosine, z, a);
        const double as = (0.5 + lam) * grad_exterior_mode(shape, n, Parity::sine, z, a);
        EllipseMode mc{n, Parity::cosine, rho0};
        EllipseMode ms{n, Parity::sine, rho0};
        sum += ac / (lambda - lam) * single_layer_mode(mc, x);
        sum += as / (lambda + lam) * single_layer_mode(ms, x);
    }
    return sum;
}

// Geometric majorant sum_n e^{-n s} = 1/(e^s - 1) with s = rho_x + rho_z - 4 rho0.
inline double exterior_bound(double rho_x, double rho_z, double rho0) {
    if (!(rho0 > 0.0))
        throw DomainError("rho0 must be positive");
    const double s = rho_x + rho_z - 4.0 * rho0;
    if (!(s > 0.0))
        throw BoundInapplicableError("bound needs rho_x + rho_z > 4 rho0");
    return 1.0 / std::expm1(s);
}

} // namespace npspec::ellipse
