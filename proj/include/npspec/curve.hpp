#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "errors.hpp"

namespace npspec {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ellipse with semi-axes R*cosh(rho0) >= R*sinh(rho0), axis-aligned, centered
/// at the origin. rho0 is the elliptic radius of the boundary.
struct EllipseShape {
    double R = 1.0;
    double rho0 = std::numbers::ln2;

    void validate() const {
        if (!(R > 0.0) || !std::isfinite(R) || !(rho0 > 0.0) || !std::isfinite(rho0))
            throw InvalidShapeError("ellipse requires finite R > 0 and rho0 > 0");
    }
    double semi_major() const { return R * std::cosh(rho0); }
    double semi_minor() const { return R * std::sinh(rho0); }
};

///// Elliptic coordinates: x1 = R cos(omega) cosh(rho), x2 = R sin(omega) sinh(rho),
/// rho >= 0, omega in [0, 2*pi).
struct EllipticPoint {
    double rho = 0.0;
    double omega = 0.0;
};

/// Smooth closed curve given by a 2*pi-periodic parameterization with two
/// derivatives. Orientation is normalized to counterclockwise at construction,
/// so the outward normal is always the tangent rotated by -pi/2.
class Curve {
public:
    using Map = std::function<Eigen::Vector2d(double)>;

    Curve(Map position, Map derivative, Map second_derivative)
        : pos_(std::move(position)), d1_(std::move(derivative)), d2_(std::move(second_derivative)) {
        normalize_orientation();
    }

    Eigen::Vector2d position(double t) const { return pos_(t); }
    Eigen::Vector2d derivative(double t) const { return d1_(t); }
    Eigen::Vector2d second_derivative(double t) const { return d2_(t); }

private:
    // Signed area via the shoelace integral; a near-zero area means the
    // parameterization does not trace a simple closed curve.
    void normalize_orientation() {
        const int m = 512;
        double area = 0.0;
        for (int i = 0; i < m; ++i) {
            const double t = two_pi * i / m;
            const Eigen::Vector2d p = pos_(t), d = d1_(t);
            if (!p.allFinite() || !d.allFinite())
                throw DegenerateParameterizationError("curve map returned non-finite values");
            area += p.x() * d.y() - p.y() * d.x();
        }
        area *= 0.5 * two_pi / m;
        if (std::abs(area) < 1e-12)
            throw DegenerateParameterizationError("curve encloses no area");
        if (area < 0.0) {
            // Reparameterize t -> 2*pi - t to restore counterclockwise travel.
            Map p = pos_, d1 = d1_, d2 = d2_;
            pos_ = [p](double t) { return p(two_pi - t); };
            d1_ = [d1](double t) { return Eigen::Vector2d(-d1(two_pi - t)); };
            d2_ = [d2](double t) { return d2(two_pi - t); };
        }
    }

    Map pos_, d1_, d2_;
};

inline double speed(const Curve& c, double t) { return c.derivative(t).norm(); }

/// Unit outward normal; requires a regular point of the parameterization.
inline Eigen::Vector2d outward_normal(const Curve& c, double t) {
    const Eigen::Vector2d d = c.derivative(t);
    const double s = d.norm();
    if (s < 1e-14)
        throw DegenerateParameterizationError("zero-speed point on curve");
    return Eigen::Vector2d(d.y() / s, -d.x() / s);
}

/// Signed curvature; positive on convex counterclockwise curves.
inline double curvature(const Curve& c, double t) {
    const Eigen::Vector2d d = c.derivative(t), dd = c.second_derivative(t);
    const double s = d.norm();
    if (s < 1e-14)
        throw DegenerateParameterizationError("zero-speed point on curve");
    return (d.x() * dd.y() - d.y() * dd.x()) / (s * s * s);
}

inline Curve ellipse_curve(const EllipseShape& shape) {
    shape.validate();
    const double a = shape.semi_major(), b = shape.semi_minor();
    return Curve(
        [a, b](double t) { return Eigen::Vector2d(a * std::cos(t), b * std::sin(t)); },
        [a, b](double t) { return Eigen::Vector2d(-a * std::sin(t), b * std::cos(t)); },
        [a, b](double t) { return Eigen::Vector2d(-a * std::cos(t), -b * std::sin(t)); });
}

inline Curve circle_curve(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidShapeError("circle requires finite radius > 0");
    return Curve(
        [radius](double t) { return Eigen::Vector2d(radius * std::cos(t), radius * std::sin(t)); },
        [radius](double t) { return Eigen::Vector2d(-radius * std::sin(t), radius * std::cos(t)); },
        [radius](double t) { return Eigen::Vector2d(-radius * std::cos(t), -radius * std::sin(t)); });
}

/// Star-shaped curve r(t)*(cos t, sin t) from a smooth positive radial profile.
inline Curve polar_curve(std::function<double(double)> r, std::function<double(double)> r1,
                         std::function<double(double)> r2) {
    auto pos = [r](double t) {
        return Eigen::Vector2d(r(t) * std::cos(t), r(t) * std::sin(t));
    };
    auto d1 = [r, r1](double t) {
        const double c = std::cos(t), s = std::sin(t), v = r(t), v1 = r1(t);
        return Eigen::Vector2d(v1 * c - v * s, v1 * s + v * c);
    };
    auto d2 = [r, r1, r2](double t) {
        const double c = std::cos(t), s = std::sin(t), v = r(t), v1 = r1(t), v2 = r2(t);
        return Eigen::Vector2d(v2 * c - 2.0 * v1 * s - v * c, v2 * s + 2.0 * v1 * c - v * s);
    };
    return Curve(pos, d1, d2);
}

/// Smoothly perturbed ellipse used as the non-symmetric robustness shape.
inline Curve wobble_curve() {
    auto r = [](double t) { return 1.0 + 0.06 * std::cos(3.0 * t) + 0.03 * std::sin(2.0 * t); };
    auto r1 = [](double t) { return -0.18 * std::sin(3.0 * t) + 0.06 * std::cos(2.0 * t); };
    auto r2 = [](double t) { return -0.54 * std::cos(3.0 * t) - 0.12 * std::sin(2.0 * t); };
    return polar_curve(r, r1, r2);
}

inline Eigen::Vector2d from_elliptic(const EllipticPoint& p, double R) {
    if (!(R > 0.0))
        throw InvalidShapeError("elliptic coordinates require R > 0");
    if (p.rho < 0.0)
        throw DomainError("elliptic radius must be nonnegative");
    return Eigen::Vector2d(R * std::cos(p.omega) * std::cosh(p.rho),
                           R * std::sin(p.omega) * std::sinh(p.rho));
}

/// Inverse of from_elliptic via the principal branch of acosh on C.
/// The focal segment {x2 = 0, |x1| <= R} has no unique preimage.
inline EllipticPoint to_elliptic(const Eigen::Vector2d& x, double R) {
    if (!(R > 0.0))
        throw InvalidShapeError("elliptic coordinates require R > 0");
    if (x.y() == 0.0 && std::abs(x.x()) <= R)
        throw DegenerateCoordinatesError("point lies on the focal segment");
    const std::complex<double> w = std::acosh(std::complex<double>(x.x() / R, x.y() / R));
    double rho = std::abs(w.real());
    double omega = w.imag();
    if (x.y() == 0.0 && x.x() < 0.0)
        omega = std::numbers::pi;
    if (omega < 0.0)
        omega += two_pi;
    if (omega >= two_pi)
        omega -= two_pi;
    return EllipticPoint{rho, omega};
}

} // namespace npspec
