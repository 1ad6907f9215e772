#pragma once

#include <Eigen/Dense>

#include "magbeam/errors.hpp"

namespace magbeam {

/// A circular multi-turn loop. The traversal direction is right-handed
/// about `axis`, so flipping the axis negates mutual inductances.
struct Loop {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    double radius = 0.0;       // m
    int turns = 1;
    double wire_radius = 0.0;  // m

    void validate() const;  // throws InvalidGeometry
};

/// Mutual inductance of two loops via the Neumann double line integral,
/// discretized with the uniform trapezoidal rule on both circles (the
/// integrand is periodic, so convergence is spectral). Throws
/// QuadratureTooCoarse when doubling `segments` moves the result by more
/// than 1e-6 relative, and LoopsIntersect when the coils touch.
double mutual_inductance_neumann(const Loop& a, const Loop& b, int segments = 256);

/// Maxwell's formula for coaxial circular single-turn loops of radii r1, r2
/// at axial distance d:
///   M = mu0 sqrt(r1 r2) [ (2/k - k) K(k) - (2/k) E(k) ],
///   k^2 = 4 r1 r2 / ((r1 + r2)^2 + d^2).
/// K and E are the complete elliptic integrals of the first and second kind
/// in the modulus convention K(k) = F(pi/2, k), so K(0) = E(0) = pi/2.
double mutual_inductance_coaxial(double r1, double r2, double d);

/// Self-inductance of a circular loop of `turns` tightly bundled turns,
/// single-turn formula mu0 R (ln(8R/a) - 2) scaled by turns^2. This is an
/// approximation for thin wire and tight bundling.
double self_inductance_loop(double radius, double wire_radius, int turns);

/// Complete elliptic integrals via AGM iteration to 1e-15.
double elliptic_k(double k);
double elliptic_e(double k);

} // namespace magbeam
