#pragma once

// NP spectral data on the unit ball: real spherical harmonics, their
// single-layer potentials, and the axisymmetric resonance series.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "npspec/errors.hpp"

namespace npspec::ball {

inline constexpr double four_pi = 4.0 * std::numbers::pi;

// lambda_n = 1/(2(2n+1)); n = 0 gives the capacity eigenvalue 1/2.
inline double ball_eigenvalue(int n) {
    if (n < 0)
        throw DomainError("degree must be nonnegative");
    return 0.5 / (2.0 * n + 1.0);
}

inline double legendre_p(int n, double x) {
    if (n < 0)
        throw DomainError("degree must be nonnegative");
    double pm1 = 1.0, p = x;
    if (n == 0)
        return 1.0;
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
        pm1 = p;
        p = next;
    }
    return p;
}

namespace detail {

// Fully normalized associated Legendre P~_n^m (no Condon-Shortley phase):
// integral over the sphere of (P~_n^m(cos theta) * sqrt(2) trig(m phi))^2 is 1.
inline double normalized_assoc_legendre(int n, int m, double x) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    double pmm = std::sqrt(1.0 / four_pi);
    for (int k = 1; k <= m; ++k)
        pmm *= s * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    if (n == m)
        return pmm;
    double pm1 = pmm;
    double p = x * std::sqrt(2.0 * m + 3.0) * pmm;
    if (n == m + 1)
        return p;
    for (int k = m + 2; k <= n; ++k) {
        const double a = std::sqrt((4.0 * k * k - 1.0) / (double(k) * k - double(m) * m));
        const double b =
            std::sqrt((2.0 * k + 1.0) / (2.0 * k - 3.0) *
                      (double(k - 1) * (k - 1) - double(m) * m) / (double(k) * k - double(m) * m));
        const double next = a * x * p - b * pm1;
        pm1 = p;
        p = next;
    }
    return p;
}

} // namespace detail

// Real orthonormal spherical harmonic Y_n^m; m > 0 pairs with cos(m phi),
// m < 0 with sin(|m| phi). Non-unit directions are normalized; the optional
// flag reports when that happened.
inline double spherical_harmonic(int n, int m, const Eigen::Vector3d& direction,
                                 bool* renormalized = nullptr) {
    if (n < 0 || std::abs(m) > n)
        throw DomainError("spherical harmonic needs n >= 0 and |m| <= n");
    const double r = direction.norm();
    if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError("direction must be a nonzero finite vector");
    if (renormalized)
        *renormalized = std::abs(r - 1.0) > 1e-12;
    const Eigen::Vector3d d = direction / r;
    const double ct = std::clamp(d.z(), -1.0, 1.0);
    const int ma = std::abs(m);
    const double pnm = detail::normalized_assoc_legendre(n, ma, ct);
    if (m == 0)
        return pnm;
    const double phi = std::atan2(d.y(), d.x());
    const double trig = m > 0 ? std::cos(ma * phi) : std::sin(ma * phi);
    return std::numbers::sqrt2 * pnm * trig;
}

// Unsold sum sum_m |Y_n^m(dir)|^2; equals (2n+1)/(4 pi) for every direction.
inline double unsold_check(int n, const Eigen::Vector3d& direction) {
    double sum = 0.0;
    for (int m = -n; m <= n; ++m) {
        const double y = spherical_harmonic(n, m, direction);
        sum += y * y;
    }
    return sum;
}

// Single layer of the density Y_n^m on the unit sphere:
// -r^n Y / (2n+1) inside, -r^{-(n+1)} Y / (2n+1) outside.
inline double single_layer_Ynm(int n, int m, const Eigen::Vector3d& x) {
    const double r = x.norm();
    if (r < 1e-300)
        return n == 0 ? -std::sqrt(1.0 / four_pi) : 0.0;
    const double y = spherical_harmonic(n, m, x);
    const double radial = r <= 1.0 ? std::pow(r, n) : std::pow(r, -(n + 1));
    return -radial * y / (2.0 * n + 1.0);
}

// H*-normalization of Y_n^m: psi_n^m = sqrt(2n+1) Y_n^m. The printed variant
// 1/sqrt(2n+1) is kept only as a typo witness.
inline double hstar_normalized_mode(int n, int m, bool use_printed_variant = false) {
    if (n < 1 || std::abs(m) > n)
        throw DomainError("normalized modes need n >= 1 and |m| <= n");
    const double root = std::sqrt(2.0 * n + 1.0);
    return use_printed_variant ? 1.0 / root : root;
}

// alpha_n for a unit dipole a = e_z at z = r0 e_z:
// (1/2 - lambda_n) (n+1) r0^{-(n+2)} / sqrt(4 pi).
inline double axisym_alpha(int n, double r0) {
    if (n < 1)
        throw DomainError("mode degree must be at least 1");
    if (!(r0 > 1.0))
        throw InvalidSourceError("dipole source must lie outside the unit ball (r0 > 1)");
    const double lam = ball_eigenvalue(n);
    return (0.5 - lam) * (n + 1.0) * std::pow(r0, -(n + 2.0)) / std::sqrt(four_pi);
}

// Exterior trace of the axisymmetric normalized mode: S[psi_n^0](r, theta).
inline double axisym_mode_exterior(int n, double r, double theta) {
    if (n < 1)
        throw DomainError("mode degree must be at least 1");
    if (!(r > 1.0))
        throw DomainError("exterior evaluation needs r > 1");
    return -std::pow(r, -(n + 1.0)) * legendre_p(n, std::cos(theta)) / std::sqrt(four_pi);
}

struct BallSeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
    int n_used = 0;
};

namespace detail {

inline void tail_from_ratio(BallSeriesValue& out, double last_term, double ratio) {
    if (!(ratio < 1.0))
        throw InsufficientTruncationError("series tail is not yet geometric at N_max");
    out.tail_bound = std::abs(last_term) * ratio / (1.0 - ratio);
}

} // namespace detail

// || grad(u_delta - F_z) ||^2 over the ball for lambda = i delta:
// sum_n (1/2 - lambda_n) alpha_n^2 |a|^2 / (delta^2 + lambda_n^2).
inline BallSeriesValue ball_resonance_series(double r0, double a_mag, double delta, int n_max) {
    if (!(r0 > 1.0))
        throw InvalidSourceError("dipole source must lie outside the unit ball (r0 > 1)");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("delta must be positive and finite");
    if (n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");
    BallSeriesValue out;
    double last = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double lam = ball_eigenvalue(n);
        const double a = axisym_alpha(n, r0) * a_mag;
        last = (0.5 - lam) * a * a / (delta * delta + lam * lam);
        out.value += last;
    }
    out.n_used = n_max;
    const double grow = 1.0 + 1.0 / n_max;
    const double denom_grow = (2.0 * n_max + 3.0) / (2.0 * n_max + 1.0);
    detail::tail_from_ratio(out, last, grow * grow * denom_grow * denom_grow / (r0 * r0));
    return out;
}

// Majorant series sum_n n^3 r0^{-2(n+2)} / (delta^2 + lambda_n^2).
inline BallSeriesValue ball_bound_series(double r0, double delta, int n_max) {
    if (!(r0 > 1.0))
        throw InvalidSourceError("bound series needs r0 > 1");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw DomainError("delta must be positive and finite");
    if (n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");
    BallSeriesValue out;
    double last = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double lam = ball_eigenvalue(n);
        last = std::pow(double(n), 3.0) * std::pow(r0, -2.0 * (n + 2.0)) /
               (delta * delta + lam * lam);
        out.value += last;
    }
    out.n_used = n_max;
    const double grow = 1.0 + 1.0 / n_max;
    const double denom_grow = (2.0 * n_max + 3.0) / (2.0 * n_max + 1.0);
    detail::tail_from_ratio(out, last,
                            grow * grow * grow * denom_grow * denom_grow / (r0 * r0));
    return out;
}

// || grad F_z ||^2 over the unit ball for the axisymmetric dipole:
// sum_n n (n+1)^2 r0^{-2(n+2)} |a|^2 / (4 pi (2n+1)).
inline double fz_gradient_norm_sq_ball(double r0, double a_mag) {
    if (!(r0 > 1.0))
        throw InvalidSourceError("dipole source must lie outside the unit ball (r0 > 1)");
    double sum = 0.0;
    for (int n = 1; n <= 20000; ++n) {
        const double term = n * (n + 1.0) * (n + 1.0) * std::pow(r0, -2.0 * (n + 2.0)) /
                            (four_pi * (2.0 * n + 1.0));
        sum += term;
        if (n > 8 && term < 1e-18 * sum)
            break;
    }
    return sum * a_mag * a_mag;
}

} // namespace npspec::ball
