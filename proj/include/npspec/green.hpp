#pragma once

// Eigenfunction expansion of the free-space Green function restricted to the
// inclusion, in the Nystrom basis and in closed form for ellipses and balls.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "npspec/assembly.hpp"
#include "npspec/ball_analytic.hpp"
#include "npspec/curve.hpp"
#include "npspec/errors.hpp"
#include "npspec/resonance.hpp"
#include "npspec/symmetrization.hpp"

namespace npspec {

inline double gamma_direct(const Eigen::Vector2d& x, const Eigen::Vector2d& z) {
    const double r = (x - z).norm();
    if (r < 1e-300)
        throw SingularityError("Green function evaluated on its diagonal");
    return std::log(r) / two_pi;
}

inline double gamma_direct(const Eigen::Vector3d& x, const Eigen::Vector3d& z) {
    const double r = (x - z).norm();
    if (r < 1e-300)
        throw SingularityError("Green function evaluated on its diagonal");
    return -1.0 / (ball::four_pi * r);
}

namespace detail {

inline double mode_value_at(const NpSystem& sys, const Spectrum& spectrum, int j,
                            const Eigen::Vector2d& x) {
    // A point sitting on a grid node gets the precomputed boundary trace; the
    // off-grid quadrature is only trusted away from the boundary.
    for (int i = 0; i < sys.grid.n; ++i)
        if ((sys.grid.positions.col(i) - x).norm() < 1e-9)
            return spectrum.traces(i, j);
    return single_layer_offgrid(sys, spectrum.eigendensities.col(j), x).value;
}

} // namespace detail

// Gamma(x - z) = -sum_j S[psi_j](z) S[psi_j](x) + S[phi0](z) for x in the
// closed inclusion and z outside.
inline double expand_numeric(const NpSystem& sys, const Spectrum& spectrum,
                             const Eigen::Vector2d& x, const Eigen::Vector2d& z, int n_max) {
    if (n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");
    if (detail::winding_number(sys.grid, z) != 0)
        throw InvalidSourceError("expansion point z must lie outside the inclusion");
    const int m = std::min(n_max, spectrum.size());
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
        const double sz = single_layer_offgrid(sys, spectrum.eigendensities.col(j), z).value;
        sum -= sz * detail::mode_value_at(sys, spectrum, j, x);
    }
    return sum + single_layer_offgrid(sys, spectrum.phi0, z).value;
}

struct ExpansionReport {
    int n_used = 0;
    double constant_term = 0.0;       // S[phi0](z)
    std::vector<double> mode_coeff;   // |S[psi_j](z)| per retained mode
    std::vector<double> probe_errors; // |expansion - direct| per probe
    double max_abs_error = 0.0;
};

inline ExpansionReport green_report(const NpSystem& sys, const Spectrum& spectrum,
                                    const Eigen::Vector2d& z,
                                    const std::vector<Eigen::Vector2d>& probes, int n_max) {
    ExpansionReport rep;
    rep.n_used = std::min(n_max, spectrum.size());
    rep.constant_term = single_layer_offgrid(sys, spectrum.phi0, z).value;
    rep.mode_coeff.reserve(rep.n_used);
    for (int j = 0; j < rep.n_used; ++j)
        rep.mode_coeff.push_back(
            std::abs(single_layer_offgrid(sys, spectrum.eigendensities.col(j), z).value));
    rep.probe_errors.reserve(probes.size());
    for (const auto& x : probes) {
        const double err =
            std::abs(expand_numeric(sys, spectrum, x, z, n_max) - gamma_direct(x, z));
        rep.probe_errors.push_back(err);
        rep.max_abs_error = std::max(rep.max_abs_error, err);
    }
    return rep;
}

struct ClosedExpansion {
    double value = 0.0;
    double tail_bound = 0.0;
    int n_used = 0;
};

// Closed-form ellipse expansion:
// -(1/pi) sum_n (1/n) [cosh(n rho_x) cos(n w_x) e^{-n rho_z} cos(n w_z)
//                      + sinh(n rho_x) sin(n w_x) e^{-n rho_z} sin(n w_z)]
// + (rho_z + log(R/2)) / (2 pi).
inline ClosedExpansion expand_ellipse_closed(const EllipticPoint& x, const EllipticPoint& z,
                                             double R, double rho0, int n_max) {
    EllipseShape shape;
    shape.R = R;
    shape.rho0 = rho0;
    shape.validate();
    if (!(z.rho > rho0))
        throw InvalidSourceError("expansion point z must lie outside the ellipse");
    if (x.rho > rho0 * (1.0 + 1e-12) + 1e-12)
        throw DomainError("evaluation point must lie in the closed inclusion");
    if (n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");
    ClosedExpansion out;
    out.n_used = n_max;
    double sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double up = std::exp(n * (x.rho - z.rho));
        const double dn = std::exp(-n * (x.rho + z.rho));
        const double ch = 0.5 * (up + dn); // cosh(n rho_x) e^{-n rho_z}
        const double sh = 0.5 * (up - dn); // sinh(n rho_x) e^{-n rho_z}
        sum += (ch * std::cos(n * x.omega) * std::cos(n * z.omega) +
                sh * std::sin(n * x.omega) * std::sin(n * z.omega)) /
               n;
    }
    out.value = -sum / std::numbers::pi + (z.rho + std::log(R / 2.0)) / two_pi;
    const double r = std::exp(x.rho - z.rho);
    out.tail_bound = 2.0 / ((n_max + 1.0) * std::numbers::pi) * std::pow(r, n_max + 1.0) /
                     (1.0 - r);
    return out;
}

// Ball expansion through the normalized eigenfunctions; the printed variant
// swaps the mode normalization for its misprinted reciprocal, which breaks
// every degree by (2n+1)^2.
inline ClosedExpansion expand_ball_closed(const Eigen::Vector3d& x, const Eigen::Vector3d& z,
                                          int n_max, bool use_printed_variant = false) {
    const double rx = x.norm();
    const double rz = z.norm();
    if (!(rz > 1.0))
        throw InvalidSourceError("expansion point z must lie outside the unit ball");
    if (rx > 1.0 + 1e-12)
        throw DomainError("evaluation point must lie in the closed unit ball");
    if (n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");
    ClosedExpansion out;
    out.n_used = n_max;
    double sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        double deg = 0.0;
        for (int m = -n; m <= n; ++m)
            deg += ball::single_layer_Ynm(n, m, z) * ball::single_layer_Ynm(n, m, x);
        const double weight = use_printed_variant ? 1.0 / (2.0 * n + 1.0) : 2.0 * n + 1.0;
        sum -= weight * deg;
    }
    out.value = sum - 1.0 / (ball::four_pi * rz);
    const double r = rx / rz;
    out.tail_bound =
        std::pow(r, n_max + 1.0) / (ball::four_pi * rz * std::max(1e-300, 1.0 - r));
    return out;
}

} // namespace npspec
