// Discretizes the NP operator on an ellipse, symmetrizes it, and prints the
// retained spectrum next to the closed-form eigenvalues.

#include <cstdio>
#include <numbers>

#include "npspec/npspec.hpp"

int main() {
    using namespace npspec;

    EllipseShape shape; // R = 1, rho0 = ln 2
    const int n = 192;
    const int keep = 12;

    const NpSystem sys = assemble_np_system(ellipse_curve(shape), n);
    const Eigen::VectorXd phi0 = compute_phi0(sys);
    const HStarMetric metric = hstar_gram(sys, build_stilde(sys, phi0), phi0);
    const Spectrum sp = symmetrized_spectrum(sys, metric, keep);

    std::printf("ellipse R=%g rho0=%g, %d nodes, %d retained modes\n\n", shape.R, shape.rho0,
                n, keep);
    std::printf("%4s  %22s  %22s  %10s\n", "j", "lambda (Nystrom)", "lambda (closed form)",
                "abs diff");
    for (int j = 0; j < sp.size(); ++j) {
        const int pair = j / 2 + 1;
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        const double exact = sign * ellipse::eigenvalue_n(shape.rho0, pair);
        std::printf("%4d  %22.15e  %22.15e  %10.2e\n", j + 1, sp.eigenvalues[j], exact,
                    std::abs(sp.eigenvalues[j] - exact));
    }

    std::printf("\nequilibrium density phi0 vs 1/(2 pi Xi) at four boundary angles:\n");
    for (int k = 0; k < 4; ++k) {
        const int i = k * n / 4;
        const double xi = ellipse::xi(shape, shape.rho0, sys.grid.nodes[i]);
        std::printf("  omega=%5.3f  phi0=%.12f  closed=%.12f\n", sys.grid.nodes[i], phi0[i],
                    1.0 / (two_pi * xi));
    }
    return 0;
}
