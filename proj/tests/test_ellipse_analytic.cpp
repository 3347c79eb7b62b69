#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "npspec/curve.hpp"
#include "npspec/ellipse_analytic.hpp"
#include "oracles.hpp"

using namespace npspec;
using namespace npspec::ellipse;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kRho0 = std::numbers::ln2;

double slm(const EllipseMode& mode, double rho, double omega) {
    return single_layer_mode(mode, EllipticPoint{rho, omega});
}

// Cartesian wrapper so finite differences can probe the potential freely.
double slm_xy(const EllipseMode& mode, double R, const Eigen::Vector2d& x) {
    return single_layer_mode(mode, to_elliptic(x, R));
}

} // namespace

TEST_CASE("closed-form eigenvalues decay geometrically", "[ellipse]") {
    SECTION("magnitudes at rho0 = log 2") {
        REQUIRE_THAT(eigenvalue_n(kRho0, 1), WithinRel(0.125, 1e-15));
        REQUIRE_THAT(eigenvalue_n(kRho0, 2), WithinRel(0.03125, 1e-15));
        REQUIRE_THAT(eigenvalue_n(kRho0, 3), WithinRel(1.0 / 128.0, 1e-15));
        REQUIRE_THAT(eigenvalue_n(kRho0, 4) / eigenvalue_n(kRho0, 5), WithinRel(4.0, 1e-13));
    }
    SECTION("signed families") {
        REQUIRE_THAT(family_eigenvalue(kRho0, 2, Parity::cosine), WithinRel(0.03125, 1e-15));
        REQUIRE_THAT(family_eigenvalue(kRho0, 2, Parity::sine), WithinRel(-0.03125, 1e-15));
    }
    SECTION("argument validation") {
        REQUIRE_THROWS_AS(eigenvalue_n(kRho0, 0), DomainError);
        REQUIRE_THROWS_AS(eigenvalue_n(-1.0, 1), DomainError);
        REQUIRE_THROWS_AS(eigenvalue_n(0.0, 1), DomainError);
    }
}

TEST_CASE("hyperbolic amplitudes stay scaled and bounded", "[ellipse]") {
    SECTION("matches cosh/sinh at small index") {
        for (int n = 1; n <= 6; ++n) {
            REQUIRE_THAT(scaled_hyp(kRho0, n, Parity::cosine),
                         WithinRel(std::cosh(n * kRho0) * std::exp(-n * kRho0), 1e-14));
            REQUIRE_THAT(scaled_hyp(kRho0, n, Parity::sine),
                         WithinRel(std::sinh(n * kRho0) * std::exp(-n * kRho0), 1e-14));
        }
    }
    SECTION("both families approach 1/2 without overflow") {
        REQUIRE_THAT(scaled_hyp(kRho0, 10000, Parity::cosine), WithinRel(0.5, 1e-14));
        REQUIRE_THAT(scaled_hyp(kRho0, 10000, Parity::sine), WithinRel(0.5, 1e-14));
    }
}

TEST_CASE("elliptic metric factor at the reference shape", "[ellipse]") {
    EllipseShape shape;
    REQUIRE_THAT(xi(shape, shape.rho0, 0.0), WithinRel(0.75, 1e-14));
    REQUIRE_THAT(xi(shape, shape.rho0, std::numbers::pi / 2.0), WithinRel(1.25, 1e-14));
    // Xi^2 = R^2 (sinh^2 rho + sin^2 omega) against direct arithmetic.
    const double om = 0.8;
    const double rho = 1.3;
    const double direct = std::hypot(std::sinh(rho), std::sin(om));
    REQUIRE_THAT(xi(shape, rho, om), WithinRel(shape.R * direct, 1e-14));
}

TEST_CASE("single-layer mode potentials satisfy the field equations", "[ellipse]") {
    EllipseShape shape;
    const std::vector<EllipseMode> modes = {
        {1, Parity::cosine, kRho0}, {1, Parity::sine, kRho0},
        {2, Parity::cosine, kRho0}, {3, Parity::sine, kRho0}};

    SECTION("reference value for the first cosine mode") {
        const double got = slm({1, Parity::cosine, kRho0}, 2.0 * kRho0, 0.0);
        REQUIRE_THAT(got, WithinRel(-std::sqrt(0.625 / std::numbers::pi) / 2.0, 1e-14));
        REQUIRE_THAT(got, WithinAbs(-0.22301551, 1e-8));
    }
    SECTION("continuity across the boundary") {
        for (const auto& mode : modes) {
            for (double om : {0.0, 0.9, 2.4, 4.5}) {
                const double in = slm(mode, kRho0 - 1e-9, om);
                const double out = slm(mode, kRho0 + 1e-9, om);
                REQUIRE_THAT(in - out, WithinAbs(0.0, 1e-8));
            }
        }
    }
    SECTION("harmonicity inside and outside via a 5-point stencil") {
        const double h = 1e-3;
        const std::vector<Eigen::Vector2d> pts = {
            {0.3, 0.1}, {-0.4, 0.35}, {1.8, 0.6}, {-0.9, -1.4}};
        for (const auto& mode : modes) {
            for (const auto& p : pts) {
                const double lap =
                    (slm_xy(mode, shape.R, {p.x() + h, p.y()}) +
                     slm_xy(mode, shape.R, {p.x() - h, p.y()}) +
                     slm_xy(mode, shape.R, {p.x(), p.y() + h}) +
                     slm_xy(mode, shape.R, {p.x(), p.y() - h}) -
                     4.0 * slm_xy(mode, shape.R, p)) / (h * h);
                REQUIRE_THAT(lap, WithinAbs(0.0, 2e-4));
            }
        }
    }
    SECTION("normal derivatives realize the signed jump relations") {
        // d_nu S|_- = (-1/2 + lambda) psi and d_nu S|_+ = (1/2 + lambda) psi,
        // with lambda carrying the family sign.
        const double h = 1e-5;
        for (const auto& mode : modes) {
            const double lam = family_eigenvalue(kRho0, mode.n, mode.parity);
            const double q = std::exp(-2.0 * mode.n * kRho0);
            const double fac = mode.parity == Parity::cosine ? 0.5 * (1.0 + q) : 0.5 * (1.0 - q);
            for (double om : {0.35, 1.7, 3.9}) {
                const double trig = mode.parity == Parity::cosine ? std::cos(mode.n * om)
                                                                  : std::sin(mode.n * om);
                const double xi0 = xi(shape, kRho0, om);
                const double psi =
                    trig / (xi0 * std::sqrt(std::numbers::pi * fac / mode.n));
                const double din =
                    (slm(mode, kRho0 - h, om) - slm(mode, kRho0 - 3.0 * h, om)) / (2.0 * h);
                const double dout =
                    (slm(mode, kRho0 + 3.0 * h, om) - slm(mode, kRho0 + h, om)) / (2.0 * h);
                // One-sided stencils sit 2h away from the interface; correct both
                // to the boundary with the second-order term absorbed in tol.
                REQUIRE_THAT(din / xi0, WithinAbs((-0.5 + lam) * psi, 5e-4));
                REQUIRE_THAT(dout / xi0, WithinAbs((0.5 + lam) * psi, 5e-4));
            }
        }
    }
    SECTION("deep exterior decay rate is e^{-n rho}") {
        const EllipseMode mode{2, Parity::cosine, kRho0};
        const double r1 = slm(mode, 3.0, 0.3);
        const double r2 = slm(mode, 4.0, 0.3);
        REQUIRE_THAT(r1 / r2, WithinRel(std::exp(2.0), 1e-12));
    }
    SECTION("stays finite at extreme index") {
        REQUIRE(std::isfinite(slm({5000, Parity::cosine, kRho0}, kRho0 + 0.01, 1.0)));
        REQUIRE(std::isfinite(slm({5000, Parity::sine, kRho0}, 0.2, 1.0)));
    }
    SECTION("argument validation") {
        REQUIRE_THROWS_AS(slm({0, Parity::cosine, kRho0}, 1.0, 0.0), DomainError);
        REQUIRE_THROWS_AS(slm({1, Parity::cosine, kRho0}, -0.1, 0.0), DomainError);
    }
}

TEST_CASE("exterior mode gradients match finite differences", "[ellipse]") {
    EllipseShape shape;
    const std::vector<Eigen::Vector2d> dirs = {{1.0, 0.0}, {0.0, 1.0}, {0.6, -0.8}};
    const std::vector<EllipticPoint> pts = {
        {2.0 * kRho0, 0.7}, {1.5 * kRho0, 2.9}, {3.0 * kRho0, 5.1}};

    SECTION("directional derivative agreement") {
        for (int n : {1, 2, 4}) {
            for (Parity par : {Parity::cosine, Parity::sine}) {
                const EllipseMode mode{n, par, kRho0};
                for (const auto& z : pts) {
                    const Eigen::Vector2d xz = from_elliptic(z, shape.R);
                    const Eigen::Vector2d g = oracles::fd_gradient(
                        [&](const Eigen::Vector2d& x) { return slm_xy(mode, shape.R, x); },
                        xz);
                    for (const auto& a : dirs) {
                        REQUIRE_THAT(grad_exterior_mode(shape, n, par, z, a),
                                     WithinAbs(a.dot(g), 1e-7));
                    }
                }
            }
        }
    }
    SECTION("rotation identity splits the pair energy") {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Vector2d a(oracles::uniform(-2.0, 2.0), oracles::uniform(-2.0, 2.0));
            const Eigen::Vector2d b(oracles::uniform(-2.0, 2.0), oracles::uniform(-2.0, 2.0));
            const double th = oracles::uniform(0.0, oracles::two_pi);
            const double c = ellipse::detail::rotated_dot(a, th, b);
            const double s = ellipse::detail::rotated_dot(a, th - std::numbers::pi / 2.0, b);
            REQUIRE_THAT(c * c + s * s, WithinRel(a.squaredNorm() * b.squaredNorm(), 1e-12));
        }
    }
    SECTION("pair coefficient combines both parities with signed weights") {
        const EllipticPoint z{2.0 * kRho0, 0.7};
        const Eigen::Vector2d a(0.3, -1.1);
        for (int n : {1, 3}) {
            const double lam = eigenvalue_n(kRho0, n);
            const double gc = grad_exterior_mode(shape, n, Parity::cosine, z, a);
            const double gs = grad_exterior_mode(shape, n, Parity::sine, z, a);
            const double expect = (0.5 - lam) * (0.5 - lam) * gc * gc +
                                  (0.5 + lam) * (0.5 + lam) * gs * gs;
            REQUIRE_THAT(pair_alpha_sq(n, z, a, kRho0, shape.R), WithinRel(expect, 1e-13));
        }
    }
    SECTION("rejects sources on or inside the boundary") {
        REQUIRE_THROWS_AS(
            grad_exterior_mode(shape, 1, Parity::cosine, {kRho0, 0.0}, {1.0, 0.0}),
            DomainError);
        REQUIRE_THROWS_AS(
            grad_exterior_mode(shape, 1, Parity::cosine, {0.5 * kRho0, 0.0}, {1.0, 0.0}),
            DomainError);
    }
}

TEST_CASE("resonant cutoff counts the modes above delta", "[ellipse]") {
    REQUIRE(cutoff_N(1e-6, kRho0) == 9);
    REQUIRE(cutoff_N(0.5, kRho0) == 0);
    REQUIRE(cutoff_N(0.7, kRho0) == 0);
    REQUIRE(cutoff_N(0.1, kRho0) == 1);
    // Just below each eigenvalue the count steps by one.
    for (int n = 1; n <= 6; ++n) {
        const double lam = 0.5 * std::exp(-2.0 * n * kRho0);
        REQUIRE(cutoff_N(lam * 1.0001, kRho0) == n - 1);
        REQUIRE(cutoff_N(lam * 0.9999, kRho0) == n);
    }
    REQUIRE_THROWS_AS(cutoff_N(0.0, kRho0), DomainError);
    REQUIRE_THROWS_AS(cutoff_N(-1e-3, kRho0), DomainError);
    REQUIRE_THROWS_AS(cutoff_N(1e-3, 0.0), DomainError);
}

TEST_CASE("blow-up rate prediction splits at the critical distance", "[ellipse]") {
    SECTION("near sources blow up like a power with one log") {
        const RatePrediction r = predicted_rate(kRho0, 2.0 * kRho0);
        REQUIRE(r.tag == RateCase::power_log);
        REQUIRE_THAT(r.p, WithinRel(-1.0, 1e-13));
        REQUIRE_THAT(r.q, WithinRel(1.0, 1e-13));

        const RatePrediction r2 = predicted_rate(kRho0, 1.5 * kRho0);
        REQUIRE_THAT(r2.p, WithinRel(-1.5, 1e-13));
    }
    SECTION("critical distance gives a squared logarithm") {
        const RatePrediction r = predicted_rate(kRho0, 3.0 * kRho0);
        REQUIRE(r.tag == RateCase::log_squared);
        REQUIRE_THAT(r.p, WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(r.q, WithinRel(2.0, 1e-13));
    }
    SECTION("far sources stay bounded") {
        const RatePrediction r = predicted_rate(kRho0, 4.0 * kRho0);
        REQUIRE(r.tag == RateCase::bounded);
        REQUIRE_THAT(r.p, WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(r.q, WithinAbs(0.0, 1e-15));
    }
    SECTION("sources must be exterior") {
        REQUIRE_THROWS_AS(predicted_rate(kRho0, kRho0), InvalidSourceError);
        REQUIRE_THROWS_AS(predicted_rate(kRho0, 0.5 * kRho0), InvalidSourceError);
        REQUIRE_THROWS_AS(predicted_rate(0.0, 1.0), DomainError);
    }
}

TEST_CASE("resonance energy series agrees with a finite-difference rebuild", "[ellipse]") {
    EllipseShape shape;
    const EllipticPoint z{2.0 * kRho0, 0.55};
    const Eigen::Vector2d a(0.8, 0.6);
    const double delta = 1e-3;

    SECTION("term-by-term independent sum") {
        double ref = 0.0;
        const Eigen::Vector2d xz = from_elliptic(z, shape.R);
        for (int n = 1; n <= 45; ++n) {
            const double lam = 0.5 * std::exp(-2.0 * n * kRho0);
            const EllipseMode mc{n, Parity::cosine, kRho0};
            const EllipseMode ms{n, Parity::sine, kRho0};
            const double gc = a.dot(oracles::fd_gradient(
                [&](const Eigen::Vector2d& x) { return slm_xy(mc, shape.R, x); }, xz));
            const double gs = a.dot(oracles::fd_gradient(
                [&](const Eigen::Vector2d& x) { return slm_xy(ms, shape.R, x); }, xz));
            const double wc = 0.5 - lam;
            const double ws = 0.5 + lam;
            ref += (wc * wc * wc * gc * gc + ws * ws * ws * gs * gs) /
                   (delta * delta + lam * lam);
        }
        const SeriesValue got = resonance_norm_series(kRho0, shape.R, z, a, delta, 200);
        REQUIRE_THAT(got.value, WithinRel(ref, 1e-6));
        REQUIRE(got.n_used == 200);
    }
    SECTION("tail bound covers further truncation") {
        const SeriesValue coarse = resonance_norm_series(kRho0, shape.R, z, a, delta, 60);
        const SeriesValue fine = resonance_norm_series(kRho0, shape.R, z, a, delta, 240);
        REQUIRE(std::abs(fine.value - coarse.value) <= coarse.tail_bound * 1.0000001);
    }
    SECTION("far sources keep the energy bounded in delta") {
        const EllipticPoint far{4.0 * kRho0, 0.55};
        const double lo = resonance_norm_series(kRho0, shape.R, far, a, 1e-9, 120).value;
        const double hi = resonance_norm_series(kRho0, shape.R, far, a, 1e-3, 120).value;
        REQUIRE(hi / lo > 0.95);
        REQUIRE(hi / lo < 1.05);
    }
    SECTION("near sources blow up as delta shrinks") {
        const double big = resonance_norm_series(kRho0, shape.R, z, a, 1e-6, 200).value;
        const double small = resonance_norm_series(kRho0, shape.R, z, a, 1e-2, 200).value;
        REQUIRE(big > 1e3 * small);
    }
    SECTION("truncation guards") {
        REQUIRE_THROWS_AS(resonance_norm_series(kRho0, shape.R, z, a, 1e-6, 17),
                          InsufficientTruncationError);
        const EllipticPoint grazing{kRho0 + 1e-4, 0.0};
        REQUIRE_THROWS_AS(resonance_norm_series(kRho0, shape.R, grazing, a, 1e-2, 100),
                          InsufficientTruncationError);
    }
    SECTION("source and delta validation") {
        REQUIRE_THROWS_AS(resonance_norm_series(kRho0, shape.R, {kRho0, 0.0}, a, 1e-3, 100),
                          InvalidSourceError);
        REQUIRE_THROWS_AS(resonance_norm_series(kRho0, shape.R, z, a, 0.0, 100), DomainError);
    }
}

TEST_CASE("exterior remainder series and its majorant", "[ellipse]") {
    EllipseShape shape;
    const EllipticPoint z{2.5 * kRho0, 0.4};
    const Eigen::Vector2d a(1.0, 0.0);

    SECTION("matches a manual accumulation over modes") {
        const EllipticPoint x{2.0 * kRho0, 1.1};
        const double delta = 5e-3;
        std::complex<double> ref(0.0, 0.0);
        const std::complex<double> lambda(0.0, delta);
        for (int n = 1; n <= 80; ++n) {
            const double lam = 0.5 * std::exp(-2.0 * n * kRho0);
            const EllipseMode mc{n, Parity::cosine, kRho0};
            const EllipseMode ms{n, Parity::sine, kRho0};
            const double gc = grad_exterior_mode(shape, n, Parity::cosine, z, a);
            const double gs = grad_exterior_mode(shape, n, Parity::sine, z, a);
            ref += (0.5 - lam) * gc / (lambda - lam) * slm(mc, x.rho, x.omega);
            ref += (0.5 + lam) * gs / (lambda + lam) * slm(ms, x.rho, x.omega);
        }
        const std::complex<double> got =
            exterior_series(z, a, x, delta, kRho0, shape.R, 80);
        REQUIRE_THAT(std::abs(got - ref), WithinAbs(0.0, 1e-14));
    }
    SECTION("decays deep into the exterior") {
        const double near_mag =
            std::abs(exterior_series(z, a, {1.2 * kRho0, 0.9}, 1e-3, kRho0, shape.R, 120));
        const double far_mag =
            std::abs(exterior_series(z, a, {8.0 * kRho0, 0.9}, 1e-3, kRho0, shape.R, 120));
        REQUIRE(far_mag < 1e-2 * near_mag);
    }
    SECTION("closed-form majorant value") {
        REQUIRE_THAT(exterior_bound(2.0 * kRho0, 2.5 * kRho0, kRho0),
                     WithinRel(std::numbers::sqrt2 + 1.0, 1e-12));
        REQUIRE_THROWS_AS(exterior_bound(kRho0, 2.0 * kRho0, kRho0), BoundInapplicableError);
        REQUIRE_THROWS_AS(exterior_bound(1.0, 1.0, 0.0), DomainError);
    }
    SECTION("series validation") {
        REQUIRE_THROWS_AS(
            exterior_series({kRho0, 0.0}, a, {2.0 * kRho0, 0.0}, 1e-3, kRho0, shape.R, 40),
            InvalidSourceError);
        REQUIRE_THROWS_AS(exterior_series(z, a, {2.0 * kRho0, 0.0}, -1.0, kRho0, shape.R, 40),
                          DomainError);
        REQUIRE_THROWS_AS(exterior_series(z, a, {2.0 * kRho0, 0.0}, 1e-3, kRho0, shape.R, 0),
                          InsufficientTruncationError);
    }
}
