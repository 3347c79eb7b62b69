#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "assembly.hpp"
#include "errors.hpp"

namespace npspec {

/// Eigendensity of K* for the eigenvalue 1/2, normalized to unit mass
/// (sum_i w_i phi0_i = 1). Shifted inverse iteration; the discrete eigenvalue
/// must reproduce 1/2 to quadrature accuracy or the grid is too coarse.
inline Eigen::VectorXd compute_phi0(const NpSystem& sys) {
    const int n = sys.grid.n;
    // A tiny off-shift keeps the factorization regular while still amplifying
    // the 1/2-eigendirection by ~1e12 per sweep.
    Eigen::MatrixXd shifted = sys.kstar;
    shifted.diagonal().array() -= 0.5 + 1e-12;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    double mu = 0.0;
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd next = lu.solve(v);
        const double scale = next.cwiseAbs().maxCoeff();
        if (!std::isfinite(scale) || scale == 0.0)
            throw DiscretizationFailureError("inverse iteration for phi0 broke down");
        next /= scale;
        v = next;
        const Eigen::VectorXd av = sys.kstar * v;
        mu = v.dot(av) / v.squaredNorm();
        if ((av - mu * v).cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, std::abs(mu)))
            break;
    }
    if (std::abs(mu - 0.5) > 1e-3)
        throw DiscretizationFailureError("leading NP eigenvalue is far from 1/2; grid too coarse");
    if (std::abs(mu - 0.5) > 1e-6)
        throw SymmetrizationFailureError("phi0 eigenvalue did not reach quadrature accuracy");
    const double mass = sys.grid.weights.dot(v);
    if (std::abs(mass) < 1e-12 * v.norm() * sys.grid.weights.norm())
        throw SymmetrizationFailureError("phi0 has numerically vanishing mass");
    return v / mass;
}

/// Rank-one extension of the single layer that pins S~[phi0] = 1. Repairs the
/// degenerate scale (vanishing interior constant) where S itself annihilates
/// the equilibrium density.
inline Eigen::MatrixXd build_stilde(const NpSystem& sys, const Eigen::VectorXd& phi0) {
    const Eigen::VectorXd trace = sys.slayer * phi0;
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(sys.grid.n) - trace;
    return sys.slayer + u * sys.grid.weights.transpose();
}

struct HStarMetric {
    Eigen::MatrixXd gram;        // G, symmetric positive definite
    Eigen::MatrixXd chol_lower;  // L with G = L*L^T
    Eigen::LLT<Eigen::MatrixXd> llt;
};

/// Discrete H* Gram matrix. On mean-zero densities this is -D_w S~ (the
/// negative single layer paired against arclength); the phi0 direction is
/// carried with weight +1 through the mass projector so the whole metric is
/// positive definite. Cholesky succeeding is the definiteness assertion.
inline HStarMetric hstar_gram(const NpSystem& sys, const Eigen::MatrixXd& stilde,
                              const Eigen::VectorXd& phi0) {
    const int n = sys.grid.n;
    const Eigen::VectorXd& w = sys.grid.weights;
    Eigen::MatrixXd g0 = -(w.asDiagonal() * stilde);
    // P0 = I - phi0 * w^T removes the phi0 component before applying the
    // mean-zero form; w^T phi0 = 1 by normalization.
    Eigen::MatrixXd p0 = Eigen::MatrixXd::Identity(n, n) - phi0 * w.transpose();
    Eigen::MatrixXd g = p0.transpose() * g0 * p0 + w * w.transpose();
    g = 0.5 * (g + g.transpose()).eval();

    HStarMetric m;
    m.gram = std::move(g);
    m.llt.compute(m.gram);
    if (m.llt.info() != Eigen::Success)
        throw MetricIndefiniteError("H* Gram matrix is not positive definite");
    m.chol_lower = m.llt.matrixL();
    return m;
}

/// H* inner product of two nodal densities.
inline double hstar_inner(const HStarMetric& m, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) {
    return a.dot(m.gram * b);
}

/// Retained part of the symmetrized NP eigensystem. Columns of
/// eigendensities are H*-orthonormal; traces hold the nodal boundary values
/// of the single layer applied to each eigendensity.
struct Spectrum {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigendensities;
    Eigen::MatrixXd traces;
    Eigen::VectorXd phi0;
    double s_phi0_interior = 0.0;

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Whitened eigensolve of K*: B = L^T A L^-T is symmetric exactly when K* is
/// self-adjoint in the H* metric; the residual asymmetry is a discretization
/// quality gate. The eigenvalue nearest 1/2 is split off as the equilibrium
/// direction, the rest are kept by decreasing |lambda|.
inline Spectrum symmetrized_spectrum(const NpSystem& sys, const HStarMetric& metric, int keep) {
    const int n = sys.grid.n;
    if (keep < 1 || keep > n - 1)
        throw InvalidResolutionError("keep must lie in [1, N-1]");

    const Eigen::MatrixXd& l = metric.chol_lower;
    Eigen::MatrixXd c = l.transpose() * sys.kstar;
    // B = C * L^-T, computed as (L^-1 * C^T)^T by a triangular solve.
    Eigen::MatrixXd b = l.triangularView<Eigen::Lower>()
                            .solve(Eigen::MatrixXd(c.transpose()))
                            .transpose();
    const double asym = (b - b.transpose()).norm() / std::max(1.0, b.norm());
    if (asym > 1e-8)
        throw SymmetrizationFailureError("whitened NP operator is not numerically symmetric");
    const Eigen::MatrixXd bs = 0.5 * (b + b.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bs);
    if (es.info() != Eigen::Success)
        throw SymmetrizationFailureError("symmetric eigensolve failed");
    const Eigen::VectorXd mu = es.eigenvalues();
    // Map eigenvectors back to densities: psi = L^-T v keeps G-orthonormality.
    Eigen::MatrixXd psi = l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());

    int i_half = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(mu[i] - 0.5) < std::abs(mu[i_half] - 0.5))
            i_half = i;
    if (std::abs(mu[i_half] - 0.5) > 1e-3)
        throw DiscretizationFailureError("no eigenvalue near 1/2 in the whitened spectrum");

    std::vector<int> order;
    order.reserve(n - 1);
    for (int i = 0; i < n; ++i)
        if (i != i_half)
            order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a2, int b2) { return std::abs(mu[a2]) > std::abs(mu[b2]); });

    // Within a magnitude tie the positive branch comes first, so +-pairs always
    // emerge as (+lambda, -lambda).
    {
        std::size_t lo2 = 0;
        while (lo2 < order.size()) {
            std::size_t hi2 = lo2 + 1;
            while (hi2 < order.size() &&
                   std::abs(std::abs(mu[order[hi2]]) - std::abs(mu[order[lo2]])) < 1e-12)
                ++hi2;
            std::stable_sort(order.begin() + lo2, order.begin() + hi2,
                             [&](int a2, int b2) { return mu[a2] > mu[b2]; });
            lo2 = hi2;
        }
    }

    // Deterministic basis inside degenerate pairs: order by the overlap with a
    // fixed generic probe, then fix signs by the first nonzero component.
    Eigen::VectorXd probe(n);
    for (int i = 0; i < n; ++i)
        probe[i] = std::exp(std::cos(sys.grid.nodes[i]));
    auto overlap = [&](int col) {
        return std::abs(sys.grid.weights.cwiseProduct(probe).dot(psi.col(col)));
    };
    int lo = 0;
    while (lo < keep) {
        int hi = lo + 1;
        while (hi < static_cast<int>(order.size()) &&
               std::abs(mu[order[hi]] - mu[order[lo]]) < 1e-12)
            ++hi;
        std::stable_sort(order.begin() + lo, order.begin() + hi,
                         [&](int a2, int b2) { return overlap(a2) > overlap(b2); });
        lo = hi;
    }

    Spectrum out;
    out.eigenvalues.resize(keep);
    out.eigendensities.resize(n, keep);
    for (int k = 0; k < keep; ++k) {
        const int col = order[k];
        if (std::abs(mu[col]) >= 0.5)
            throw DiscretizationFailureError("retained NP eigenvalue escaped (-1/2, 1/2)");
        out.eigenvalues[k] = mu[col];
        Eigen::VectorXd v = psi.col(col);
        const double nrm = std::sqrt(v.dot(metric.gram * v));
        if (!(nrm > 0.0) || !std::isfinite(nrm))
            throw SymmetrizationFailureError("degenerate eigendensity normalization");
        v /= nrm;
        const double cap = 1e-12 * v.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i) {
            if (std::abs(v[i]) > cap) {
                if (v[i] < 0.0)
                    v = -v;
                break;
            }
        }
        out.eigendensities.col(k) = v;
    }
    out.traces = sys.slayer * out.eigendensities;

    Eigen::VectorXd phi0 = psi.col(i_half);
    const double mass = sys.grid.weights.dot(phi0);
    if (std::abs(mass) < 1e-12 * phi0.norm() * sys.grid.weights.norm())
        throw SymmetrizationFailureError("equilibrium direction has vanishing mass");
    out.phi0 = phi0 / mass;

    const Eigen::Vector2d anchor =
        (sys.grid.positions * sys.grid.weights) / sys.grid.perimeter();
    out.s_phi0_interior = single_layer_offgrid(sys.grid, out.phi0, anchor).value;
    return out;
}

/// Squared H* gradient seminorm of the interior field with expansion
/// coefficients c: sum_j (1/2 - lambda_j) |c_j|^2.
inline double gradient_form(const Spectrum& sp, const Eigen::VectorXcd& c) {
    if (c.size() != sp.eigenvalues.size())
        throw DomainError("coefficient vector length does not match the spectrum");
    double acc = 0.0;
    for (int j = 0; j < sp.size(); ++j)
        acc += (0.5 - sp.eigenvalues[j]) * std::norm(c[j]);
    return acc;
}

/// H(partial Omega)-norm check data: the boundary traces S[psi_j] should be
/// orthonormal in the dual metric G_H = D_w G^-1 D_w. Returns the vector of
/// squared norms (all should be 1).
inline Eigen::VectorXd trace_h_norms(const NpSystem& sys, const HStarMetric& metric,
                                     const Spectrum& sp) {
    const Eigen::MatrixXd v = sys.grid.weights.asDiagonal() * sp.traces;
    const Eigen::MatrixXd y = metric.llt.solve(v);
    return (v.array() * y.array()).colwise().sum();
}

} // namespace npspec
