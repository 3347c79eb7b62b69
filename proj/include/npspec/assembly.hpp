#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "curve.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace npspec {

/// Dense Nystrom discretizations of the boundary operators on one grid.
/// kstar applies the Neumann-Poincare operator K*, slayer applies the single
/// layer S; both act on nodal density samples and return nodal values.
struct NpSystem {
    BoundaryGrid grid;
    Eigen::MatrixXd kstar;
    Eigen::MatrixXd slayer;
};

/// K* with kernel <x - y, nu_x> / (2*pi*|x - y|^2); the diagonal carries the
/// smooth-curve limit kappa(x)/(4*pi). Plain trapezoid quadrature, which is
/// spectrally accurate here because the kernel is smooth on smooth curves.
inline Eigen::MatrixXd assemble_kstar(const BoundaryGrid& g) {
    const int n = g.n;
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d xi = g.positions.col(i);
        const Eigen::Vector2d nu = g.normals.col(i);
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                k(i, i) = g.curvatures[i] / (4.0 * std::numbers::pi) * g.weights[i];
                continue;
            }
            const Eigen::Vector2d d = xi - g.positions.col(j);
            const double r2 = d.squaredNorm();
            if (r2 < 1e-28)
                throw GridDegeneracyError("coincident distinct grid nodes");
            k(i, j) = d.dot(nu) / (two_pi * r2) * g.weights[j];
        }
    }
    return k;
}

namespace detail {

/// Weights of the periodic product rule for the ln(4*sin^2((t-s)/2)) factor,
/// tabulated by node offset d = (i-j) mod N. Exact for trigonometric
/// polynomials of degree < N/2 against the log kernel.
inline Eigen::VectorXd log_rule_weights(int n_nodes) {
    const int half = n_nodes / 2;
    Eigen::VectorXd r(n_nodes);
    for (int d = 0; d < n_nodes; ++d) {
        const double td = std::numbers::pi * d / half;
        double acc = 0.0;
        for (int m = 1; m < half; ++m)
            acc += std::cos(m * td) / m;
        r[d] = -two_pi / half * acc -
               std::numbers::pi / (half * half) * std::cos(half * td);
    }
    return r;
}

} // namespace detail

/// Single layer S with the 2D Laplace kernel (1/2*pi) ln|x - y|. The log
/// singularity is split against ln|2 sin((t-s)/2)| and integrated with the
/// product rule; the smooth remainder takes the plain trapezoid rule, with
/// ln|gamma'(t_i)| as its diagonal limit.
inline Eigen::MatrixXd assemble_single_layer(const BoundaryGrid& g) {
    const int n = g.n;
    const Eigen::VectorXd rule = detail::log_rule_weights(n);
    // Symmetric kernel part against arclength, before the weight factor: this
    // keeps w_i*S(i,j) == w_j*S(i,i) at the few-ulp level by construction.
    Eigen::MatrixXd core(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double smooth;
            if (i == j) {
                smooth = std::log(g.speeds[i]);
            } else {
                const double chord = (g.positions.col(i) - g.positions.col(j)).norm();
                if (chord < 1e-14)
                    throw GridDegeneracyError("coincident distinct grid nodes");
                const double gap = 2.0 * std::abs(std::sin((g.nodes[i] - g.nodes[j]) / 2.0));
                smooth = std::log(chord / gap);
            }
            const double v = rule[(i - j + n) % n] / (4.0 * std::numbers::pi) +
                             smooth / n;
            core(i, j) = v;
            core(j, i) = v;
        }
    }
    Eigen::MatrixXd s = core * g.speeds.asDiagonal();
    return s;
}

inline NpSystem assemble_np_system(const Curve& curve, int n) {
    NpSystem sys;
    sys.grid = build_grid(curve, n);
    sys.kstar = assemble_kstar(sys.grid);
    sys.slayer = assemble_single_layer(sys.grid);
    return sys;
}

/// Off-grid evaluation results carry a flag when the target sits inside the
/// quadrature accuracy-exclusion band near the boundary (3 mesh widths).
struct PotentialSample {
    double value = 0.0;
    bool near_boundary = false;
};

struct GradientSample {
    Eigen::Vector2d value = Eigen::Vector2d::Zero();
    bool near_boundary = false;
};

namespace detail {

inline double node_distance(const BoundaryGrid& g, const Eigen::Vector2d& x) {
    double d2 = (x - g.positions.col(0)).squaredNorm();
    for (int j = 1; j < g.n; ++j)
        d2 = std::min(d2, (x - g.positions.col(j)).squaredNorm());
    return std::sqrt(d2);
}

} // namespace detail

/// S[phi](x) for x strictly off the boundary, by the trapezoid rule.
inline PotentialSample single_layer_offgrid(const BoundaryGrid& g, const Eigen::VectorXd& phi,
                                            const Eigen::Vector2d& x) {
    const double dist = detail::node_distance(g, x);
    if (dist < 1e-14)
        throw SingularityError("evaluation point coincides with a grid node");
    PotentialSample out;
    out.near_boundary = dist < 3.0 * g.mesh_width();
    double acc = 0.0;
    for (int j = 0; j < g.n; ++j)
        acc += std::log((x - g.positions.col(j)).norm()) * phi[j] * g.weights[j];
    out.value = acc / two_pi;
    return out;
}

/// grad S[phi](x), same rule and exclusion band as single_layer_offgrid.
inline GradientSample gradient_single_layer_offgrid(const BoundaryGrid& g,
                                                    const Eigen::VectorXd& phi,
                                                    const Eigen::Vector2d& x) {
    const double dist = detail::node_distance(g, x);
    if (dist < 1e-14)
        throw SingularityError("evaluation point coincides with a grid node");
    GradientSample out;
    out.near_boundary = dist < 3.0 * g.mesh_width();
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int j = 0; j < g.n; ++j) {
        const Eigen::Vector2d d = x - g.positions.col(j);
        acc += d / d.squaredNorm() * (phi[j] * g.weights[j]);
    }
    out.value = acc / two_pi;
    return out;
}

inline PotentialSample single_layer_offgrid(const NpSystem& sys, const Eigen::VectorXd& phi,
                                            const Eigen::Vector2d& x) {
    return single_layer_offgrid(sys.grid, phi, x);
}

inline GradientSample gradient_single_layer_offgrid(const NpSystem& sys,
                                                    const Eigen::VectorXd& phi,
                                                    const Eigen::Vector2d& x) {
    return gradient_single_layer_offgrid(sys.grid, phi, x);
}

} // namespace npspec

