#pragma once

// Plasmon-resonance driver: dipole data, spectral resolvent solves, energy
// functionals, delta sweeps for the numeric and analytic engines, and the
// blow-up rate fit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "npspec/assembly.hpp"
#include "npspec/ball_analytic.hpp"
#include "npspec/curve.hpp"
#include "npspec/ellipse_analytic.hpp"
#include "npspec/errors.hpp"
#include "npspec/symmetrization.hpp"

namespace npspec {

struct DipoleSource {
    Eigen::Vector2d z = Eigen::Vector2d(2.0, 0.0);
    Eigen::Vector2d a = Eigen::Vector2d(1.0, 0.0);

    void validate() const {
        if (!z.allFinite() || !a.allFinite())
            throw InvalidSourceError("dipole position and moment must be finite");
        if (a.norm() < 1e-300)
            throw InvalidSourceError("dipole moment must be nonzero");
    }
};

struct MaterialParams {
    double eps_c = -2.0; // core permittivity (negative, metallic)
    double eps_m = 1.0;  // background permittivity
    double delta = 1e-3; // dissipation

    void validate() const {
        if (!(eps_c < 0.0))
            throw DomainError("core permittivity must be negative");
        if (!(eps_m > 0.0))
            throw DomainError("background permittivity must be positive");
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw DomainError("dissipation delta must be positive and finite");
    }
};

// lambda = (eps_c + eps_m + i delta) / (2 (eps_c - eps_m) + 2 i delta).
inline std::complex<double> plasmonic_lambda(const MaterialParams& mat) {
    mat.validate();
    const std::complex<double> num(mat.eps_c + mat.eps_m, mat.delta);
    const std::complex<double> den(2.0 * (mat.eps_c - mat.eps_m), 2.0 * mat.delta);
    return num / den;
}

// How the spectral parameter depends on delta along a sweep.
struct LambdaRule {
    enum class Kind { material, simplified, tuned };
    Kind kind = Kind::simplified;
    double eps_c = -2.0;
    double eps_m = 1.0;
    double tuned_center = 0.125;

    static LambdaRule material(double eps_c, double eps_m) {
        LambdaRule r;
        r.kind = Kind::material;
        r.eps_c = eps_c;
        r.eps_m = eps_m;
        return r;
    }
    static LambdaRule simplified() { return LambdaRule{}; }
    static LambdaRule tuned(double center) {
        LambdaRule r;
        r.kind = Kind::tuned;
        r.tuned_center = center;
        return r;
    }

    std::complex<double> lambda(double delta) const {
        switch (kind) {
        case Kind::material: {
            MaterialParams m{eps_c, eps_m, delta};
            return plasmonic_lambda(m);
        }
        case Kind::tuned:
            return {tuned_center, delta};
        case Kind::simplified:
        default:
            return {0.0, delta};
        }
    }

    const char* name() const {
        switch (kind) {
        case Kind::material:
            return "material";
        case Kind::tuned:
            return "tuned";
        default:
            return "simplified";
        }
    }
};

// F_z(x) = -a.(x - z) / (2 pi |x - z|^2), the dipole field of the source.
inline double dipole_field(const DipoleSource& src, const Eigen::Vector2d& x) {
    const Eigen::Vector2d d = x - src.z;
    const double r2 = d.squaredNorm();
    if (r2 < 1e-300)
        throw SingularityError("dipole field evaluated at its own source point");
    return -src.a.dot(d) / (two_pi * r2);
}

inline Eigen::VectorXd dipole_fz_values(const DipoleSource& src, const BoundaryGrid& grid) {
    Eigen::VectorXd out(grid.n);
    for (int i = 0; i < grid.n; ++i)
        out[i] = dipole_field(src, grid.positions.col(i));
    return out;
}

namespace detail {

// Winding number of the node polygon around z; +-1 inside, 0 outside.
inline int winding_number(const BoundaryGrid& grid, const Eigen::Vector2d& z) {
    double total = 0.0;
    double prev = std::atan2(grid.positions(1, grid.n - 1) - z.y(),
                             grid.positions(0, grid.n - 1) - z.x());
    for (int i = 0; i < grid.n; ++i) {
        const double cur =
            std::atan2(grid.positions(1, i) - z.y(), grid.positions(0, i) - z.x());
        double d = cur - prev;
        while (d > std::numbers::pi)
            d -= two_pi;
        while (d < -std::numbers::pi)
            d += two_pi;
        total += d;
        prev = cur;
    }
    return static_cast<int>(std::lround(total / two_pi));
}

} // namespace detail

// Nodal values of the Neumann trace d_nu F_z; the source must be exterior.
inline Eigen::VectorXd dipole_trace(const DipoleSource& src, const BoundaryGrid& grid) {
    src.validate();
    double min_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n; ++i)
        min_dist = std::min(min_dist, (grid.positions.col(i) - src.z).norm());
    if (min_dist < 1e-12)
        throw InvalidSourceError("dipole source sits on the boundary");
    if (detail::winding_number(grid, src.z) != 0)
        throw InvalidSourceError("dipole source must lie outside the inclusion");
    Eigen::VectorXd out(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const Eigen::Vector2d d = grid.positions.col(i) - src.z;
        const Eigen::Vector2d nu = grid.normals.col(i);
        const double r2 = d.squaredNorm();
        out[i] = -(src.a.dot(nu) / r2 - 2.0 * src.a.dot(d) * nu.dot(d) / (r2 * r2)) / two_pi;
    }
    return out;
}

// || grad F_z ||^2 over the inclusion, by the boundary quadrature
// integral of F_z d_nu F_z.
inline double fz_gradient_norm_sq(const DipoleSource& src, const BoundaryGrid& grid) {
    const Eigen::VectorXd f = dipole_fz_values(src, grid);
    const Eigen::VectorXd df = dipole_trace(src, grid);
    return grid.weights.cwiseProduct(f).dot(df);
}

// alpha_j = (1/2 - lambda_j) a . grad S[psi_j](z); cross-checked against the
// metric inner product <d_nu F_z, psi_j>.
inline Eigen::VectorXd alpha_coefficients(const NpSystem& sys, const HStarMetric& metric,
                                          const Spectrum& spectrum, const DipoleSource& src) {
    const Eigen::VectorXd trace = dipole_trace(src, sys.grid);
    const Eigen::VectorXd via_metric =
        spectrum.eigendensities.transpose() * (metric.gram * trace);
    const int k = spectrum.size();
    Eigen::VectorXd closed(k);
    for (int j = 0; j < k; ++j) {
        const auto g = gradient_single_layer_offgrid(sys, spectrum.eigendensities.col(j), src.z);
        closed[j] = (0.5 - spectrum.eigenvalues[j]) * src.a.dot(g.value);
    }
    const double amax = closed.cwiseAbs().maxCoeff();
    for (int j = 0; j < k; ++j) {
        const double denom =
            std::max({std::abs(closed[j]), std::abs(via_metric[j]), 1e-4 * amax, 1e-300});
        if (std::abs(closed[j] - via_metric[j]) / denom > 1e-6)
            throw ConsistencyError("dipole coefficients disagree between the gradient "
                                   "formula and the metric inner product");
    }
    return closed;
}

// c_j = alpha_j / (lambda - lambda_j); real lambda hitting an eigenvalue is singular.
inline Eigen::VectorXcd solve_density(const Spectrum& spectrum, const Eigen::VectorXd& alpha,
                                      std::complex<double> lambda) {
    if (alpha.size() != spectrum.size())
        throw InvalidShapeError("coefficient vector does not match the spectrum size");
    Eigen::VectorXcd c(alpha.size());
    const double scale = std::max(1.0, std::abs(lambda));
    for (int j = 0; j < alpha.size(); ++j) {
        const std::complex<double> d = lambda - spectrum.eigenvalues[j];
        if (std::abs(d) < 1e-13 * scale)
            throw SingularResolventError("spectral parameter coincides with an eigenvalue");
        c[j] = alpha[j] / d;
    }
    return c;
}

// || grad(u - F_z) ||^2 over the inclusion = sum (1/2 - lambda_j) |c_j|^2.
inline double interior_gradient_norm(const Spectrum& spectrum, const Eigen::VectorXcd& c) {
    return gradient_form(spectrum, c);
}

// || grad u ||^2 over the inclusion via the boundary quadrature route:
// || grad F_z ||^2 + 2 Re int F_z d_nu S[phi]|_- + || grad S[phi] ||^2.
inline double full_gradient_norm(const NpSystem& sys, const Spectrum& spectrum,
                                 const DipoleSource& src, const Eigen::VectorXcd& c) {
    const Eigen::VectorXd f = dipole_fz_values(src, sys.grid);
    const Eigen::VectorXcd phi = spectrum.eigendensities * c;
    const Eigen::VectorXcd dn_inner = -0.5 * phi + sys.kstar * phi;
    const std::complex<double> cross =
        sys.grid.weights.cwiseProduct(f).transpose().cast<std::complex<double>>() * dn_inner;
    return fz_gradient_norm_sq(src, sys.grid) + 2.0 * cross.real() +
           interior_gradient_norm(spectrum, c);
}

struct ComplexSample {
    std::complex<double> value{0.0, 0.0};
    bool near_boundary = false;
};

// u(x) - F_z(x) = S[phi_delta](x) at an off-grid point.
inline ComplexSample exterior_field(const NpSystem& sys, const Spectrum& spectrum,
                                    const Eigen::VectorXcd& c, const Eigen::Vector2d& x) {
    const Eigen::VectorXcd phi = spectrum.eigendensities * c;
    const auto re = single_layer_offgrid(sys, phi.real(), x);
    const auto im = single_layer_offgrid(sys, phi.imag(), x);
    return {{re.value, im.value}, re.near_boundary};
}

struct SweepRow {
    double delta = 0.0;
    std::complex<double> lambda{0.0, 0.0};
    double grad_norm_sq = 0.0;      // || grad(u - F_z) ||^2 inside
    double full_grad_norm_sq = 0.0; // || grad u ||^2 inside
    double energy = 0.0;            // delta * || grad u ||^2
    std::vector<double> ext;        // |u - F_z| at the sample points
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string lambda_mode;
    int n_ext = 0;
};

inline std::vector<double> log_delta_grid(double start, double stop, int points) {
    if (!(start > 0.0) || !(stop > 0.0) || !std::isfinite(start) || !std::isfinite(stop))
        throw DomainError("delta grid endpoints must be positive and finite");
    if (points < 1)
        throw DomainError("delta grid needs at least one point");
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = start;
        return out;
    }
    const double la = std::log(start), lb = std::log(stop);
    for (int i = 0; i < points; ++i)
        out[i] = std::exp(la + (lb - la) * i / (points - 1.0));
    return out;
}

// Numeric-engine sweep; every energy quantity is recomputed per row through
// the quadrature route.
inline SweepResult delta_sweep(const NpSystem& sys, const HStarMetric& metric,
                               const Spectrum& spectrum, const DipoleSource& src,
                               const LambdaRule& rule, const std::vector<double>& deltas,
                               const std::vector<Eigen::Vector2d>& ext_points = {}) {
    const Eigen::VectorXd alpha = alpha_coefficients(sys, metric, spectrum, src);
    SweepResult out;
    out.lambda_mode = rule.name();
    out.n_ext = static_cast<int>(ext_points.size());
    out.rows.reserve(deltas.size());
    for (double delta : deltas) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw DomainError("sweep deltas must be positive and finite");
        SweepRow row;
        row.delta = delta;
        row.lambda = rule.lambda(delta);
        const Eigen::VectorXcd c = solve_density(spectrum, alpha, row.lambda);
        row.grad_norm_sq = interior_gradient_norm(spectrum, c);
        row.full_grad_norm_sq = full_gradient_norm(sys, spectrum, src, c);
        row.energy = delta * row.full_grad_norm_sq;
        row.ext.reserve(ext_points.size());
        for (const auto& x : ext_points)
            row.ext.push_back(std::abs(exterior_field(sys, spectrum, c, x).value));
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analytic engines.

struct EllipseSweepConfig {
    EllipseShape shape;
    EllipticPoint z{2.0 * std::numbers::ln2, 0.0};
    Eigen::Vector2d a = Eigen::Vector2d(1.0, 0.0);
    int n_max = 200;
    int quad_nodes = 512; // boundary grid used for || grad F_z ||^2
};

inline SweepResult ellipse_delta_sweep(const EllipseSweepConfig& cfg, const LambdaRule& rule,
                                       const std::vector<double>& deltas,
                                       const std::vector<EllipticPoint>& ext_points = {}) {
    cfg.shape.validate();
    if (!(cfg.z.rho > cfg.shape.rho0))
        throw InvalidSourceError("dipole source must lie outside the ellipse (rho_z > rho0)");
    if (cfg.n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");

    using ellipse::Parity;
    const int m = cfg.n_max;
    Eigen::VectorXd lam(m), ac(m), as(m);
    Eigen::MatrixXd tc(m, ext_points.size()), ts(m, ext_points.size());
    for (int n = 1; n <= m; ++n) {
        lam[n - 1] = ellipse::eigenvalue_n(cfg.shape.rho0, n);
        const double gc = ellipse::grad_exterior_mode(cfg.shape, n, Parity::cosine, cfg.z, cfg.a);
        const double gs = ellipse::grad_exterior_mode(cfg.shape, n, Parity::sine, cfg.z, cfg.a);
        ac[n - 1] = (0.5 - lam[n - 1]) * gc;
        as[n - 1] = (0.5 + lam[n - 1]) * gs;
        for (std::size_t k = 0; k < ext_points.size(); ++k) {
            ellipse::EllipseMode mc{n, Parity::cosine, cfg.shape.rho0};
            ellipse::EllipseMode ms{n, Parity::sine, cfg.shape.rho0};
            tc(n - 1, k) = ellipse::single_layer_mode(mc, ext_points[k]);
            ts(n - 1, k) = ellipse::single_layer_mode(ms, ext_points[k]);
        }
    }

    DipoleSource src;
    src.z = from_elliptic(cfg.z, cfg.shape.R);
    src.a = cfg.a;
    const auto grid = build_grid(ellipse_curve(cfg.shape), cfg.quad_nodes);
    const double fz_sq = fz_gradient_norm_sq(src, grid);

    SweepResult out;
    out.lambda_mode = rule.name();
    out.n_ext = static_cast<int>(ext_points.size());
    out.rows.reserve(deltas.size());
    for (double delta : deltas) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw DomainError("sweep deltas must be positive and finite");
        SweepRow row;
        row.delta = delta;
        row.lambda = rule.lambda(delta);
        double grad = 0.0, cross = 0.0;
        std::vector<std::complex<double>> ext(ext_points.size(), {0.0, 0.0});
        for (int j = 0; j < m; ++j) {
            const std::complex<double> dc = row.lambda - lam[j];
            const std::complex<double> ds = row.lambda + lam[j];
            const double sc = std::max(1.0, std::abs(row.lambda));
            if (std::abs(dc) < 1e-13 * sc || std::abs(ds) < 1e-13 * sc)
                throw SingularResolventError("spectral parameter coincides with an eigenvalue");
            const std::complex<double> cc = ac[j] / dc;
            const std::complex<double> cs = as[j] / ds;
            grad += (0.5 - lam[j]) * std::norm(cc) + (0.5 + lam[j]) * std::norm(cs);
            cross -= 2.0 * (ac[j] * ac[j] * (1.0 / dc).real() +
                            as[j] * as[j] * (1.0 / ds).real());
            for (std::size_t k = 0; k < ext_points.size(); ++k)
                ext[k] += cc * tc(j, k) + cs * ts(j, k);
        }
        row.grad_norm_sq = grad;
        row.full_grad_norm_sq = fz_sq + cross + grad;
        row.energy = delta * row.full_grad_norm_sq;
        row.ext.reserve(ext.size());
        for (const auto& v : ext)
            row.ext.push_back(std::abs(v));
        out.rows.push_back(std::move(row));
    }
    return out;
}

struct BallSweepConfig {
    double r0 = 2.0;
    double a_mag = 1.0;
    int n_max = 400;
};

struct BallSamplePoint {
    double r = 2.0;
    double theta = 0.0;
};

inline SweepResult ball_delta_sweep(const BallSweepConfig& cfg, const LambdaRule& rule,
                                    const std::vector<double>& deltas,
                                    const std::vector<BallSamplePoint>& ext_points = {}) {
    if (!(cfg.r0 > 1.0))
        throw InvalidSourceError("dipole source must lie outside the unit ball (r0 > 1)");
    if (cfg.n_max < 1)
        throw InsufficientTruncationError("N_max must be at least 1");

    const int m = cfg.n_max;
    Eigen::VectorXd lam(m), al(m);
    Eigen::MatrixXd tr(m, ext_points.size());
    for (int n = 1; n <= m; ++n) {
        lam[n - 1] = ball::ball_eigenvalue(n);
        al[n - 1] = ball::axisym_alpha(n, cfg.r0) * cfg.a_mag;
        for (std::size_t k = 0; k < ext_points.size(); ++k)
            tr(n - 1, k) = ball::axisym_mode_exterior(n, ext_points[k].r, ext_points[k].theta);
    }
    const double fz_sq = ball::fz_gradient_norm_sq_ball(cfg.r0, cfg.a_mag);

    SweepResult out;
    out.lambda_mode = rule.name();
    out.n_ext = static_cast<int>(ext_points.size());
    out.rows.reserve(deltas.size());
    for (double delta : deltas) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw DomainError("sweep deltas must be positive and finite");
        SweepRow row;
        row.delta = delta;
        row.lambda = rule.lambda(delta);
        double grad = 0.0, cross = 0.0;
        std::vector<std::complex<double>> ext(ext_points.size(), {0.0, 0.0});
        const double sc = std::max(1.0, std::abs(row.lambda));
        for (int j = 0; j < m; ++j) {
            const std::complex<double> d = row.lambda - lam[j];
            if (std::abs(d) < 1e-13 * sc)
                throw SingularResolventError("spectral parameter coincides with an eigenvalue");
            const std::complex<double> c = al[j] / d;
            grad += (0.5 - lam[j]) * std::norm(c);
            cross -= 2.0 * al[j] * al[j] * (1.0 / d).real();
            for (std::size_t k = 0; k < ext_points.size(); ++k)
                ext[k] += c * tr(j, k);
        }
        row.grad_norm_sq = grad;
        row.full_grad_norm_sq = fz_sq + cross + grad;
        row.energy = delta * row.full_grad_norm_sq;
        row.ext.reserve(ext.size());
        for (const auto& v : ext)
            row.ext.push_back(std::abs(v));
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rate fitting.

enum class FitColumn { grad, full, energy };

struct ScalingFit {
    double p = 0.0;         // exponent of delta
    double q = 0.0;         // exponent of |log delta|
    double intercept = 0.0; // constant of the log-log model
    double residual_rms = 0.0;
    int rows_used = 0;
};

// Least squares log y = p log delta + q log|log delta| + const; q is frozen at
// zero unless the log correction is requested. The largest and smallest deltas
// are trimmed to suppress truncation and pre-asymptotic contamination.
inline ScalingFit fit_blowup_rate(const SweepResult& sweep, bool with_log_correction,
                                  FitColumn column = FitColumn::grad, int trim_large = 2,
                                  int trim_small = 2) {
    if (trim_large < 0 || trim_small < 0)
        throw FitError("trim counts must be nonnegative");
    std::vector<SweepRow> rows = sweep.rows;
    std::sort(rows.begin(), rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.delta > b.delta; });
    if (static_cast<int>(rows.size()) - trim_large - trim_small < 5)
        throw FitError("rate fit needs at least 5 rows after trimming");
    rows.erase(rows.begin(), rows.begin() + trim_large);
    rows.erase(rows.end() - trim_small, rows.end());

    const int mrows = static_cast<int>(rows.size());
    const int ncols = with_log_correction ? 3 : 2;
    Eigen::MatrixXd X(mrows, ncols);
    Eigen::VectorXd y(mrows);
    for (int i = 0; i < mrows; ++i) {
        double v = 0.0;
        switch (column) {
        case FitColumn::grad:
            v = rows[i].grad_norm_sq;
            break;
        case FitColumn::full:
            v = rows[i].full_grad_norm_sq;
            break;
        case FitColumn::energy:
            v = rows[i].energy;
            break;
        }
        if (!(v > 0.0) || !std::isfinite(v))
            throw FitError("rate fit needs strictly positive finite samples");
        const double ld = std::log(rows[i].delta);
        const double lld = std::log(std::abs(ld));
        if (!std::isfinite(ld) || (with_log_correction && !std::isfinite(lld)))
            throw FitError("degenerate abscissa in the rate fit");
        y[i] = std::log(v);
        X(i, 0) = ld;
        if (with_log_correction)
            X(i, 1) = lld;
        X(i, ncols - 1) = 1.0;
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    if (!beta.allFinite())
        throw FitError("rate fit did not produce finite coefficients");
    ScalingFit fit;
    fit.p = beta[0];
    fit.q = with_log_correction ? beta[1] : 0.0;
    fit.intercept = beta[ncols - 1];
    fit.residual_rms = std::sqrt((y - X * beta).squaredNorm() / mrows);
    fit.rows_used = mrows;
    return fit;
}

} // namespace npspec
