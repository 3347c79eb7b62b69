#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "curve.hpp"
#include "errors.hpp"

namespace npspec {

/// Uniform-parameter Nystrom grid on a closed curve. Node i sits at
/// t_i = 2*pi*i/N; w_i = 2*pi*s_i/N is the trapezoid arclength weight.
struct BoundaryGrid {
    int n = 0;
    Eigen::VectorXd nodes;       // parameter values t_i
    Eigen::VectorXd speeds;      // |gamma'(t_i)|
    Eigen::VectorXd weights;     // quadrature weights w_i
    Eigen::VectorXd curvatures;  // signed curvature at nodes
    Eigen::Matrix2Xd positions;  // gamma(t_i) as columns
    Eigen::Matrix2Xd normals;    // unit outward normals as columns

    double perimeter() const { return weights.sum(); }
    double mesh_width() const { return weights.maxCoeff(); }

    /// Quadrature of a nodal sampling against the arclength measure.
    double integrate(const Eigen::VectorXd& f) const { return weights.dot(f); }
};

/// Samples a curve at N equispaced parameters. N must be even (the singular
/// quadrature rule pairs nodes) and large enough to resolve the geometry.
inline BoundaryGrid build_grid(const Curve& curve, int n) {
    if (n < 16 || n % 2 != 0)
        throw InvalidResolutionError("grid size must be even and at least 16");
    BoundaryGrid g;
    g.n = n;
    g.nodes.resize(n);
    g.speeds.resize(n);
    g.weights.resize(n);
    g.curvatures.resize(n);
    g.positions.resize(2, n);
    g.normals.resize(2, n);
    for (int i = 0; i < n; ++i) {
        const double t = two_pi * i / n;
        g.nodes[i] = t;
        const Eigen::Vector2d p = curve.position(t);
        const Eigen::Vector2d d = curve.derivative(t);
        const double s = d.norm();
        if (!p.allFinite() || !d.allFinite() || s < 1e-14)
            throw GridDegeneracyError("degenerate node in boundary grid");
        g.positions.col(i) = p;
        g.speeds[i] = s;
        g.weights[i] = two_pi * s / n;
        g.normals.col(i) = Eigen::Vector2d(d.y() / s, -d.x() / s);
        g.curvatures[i] = curvature(curve, t);
    }
    return g;
}

} // namespace npspec
