#include "magbeam/geometry.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

namespace magbeam {

namespace {

constexpr double kMu0 = 4e-7 * std::numbers::pi;
constexpr double kAgmTol = 1e-15;
constexpr double kQuadRelTol = 1e-6;

Eigen::Vector3d any_perpendicular(const Eigen::Vector3d& axis) {
    // Pick the coordinate axis least aligned with `axis`.
    int idx = 0;
    axis.cwiseAbs().minCoeff(&idx);
    return axis.cross(Eigen::Vector3d::Unit(idx)).normalized();
}

struct SampledLoop {
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3d> tangents;  // dl, includes R*dtheta weight
};

SampledLoop sample(const Loop& loop, int segments) {
    const Eigen::Vector3d e1 = any_perpendicular(loop.axis);
    const Eigen::Vector3d e2 = loop.axis.normalized().cross(e1);
    const double dtheta = 2.0 * std::numbers::pi / segments;
    SampledLoop s;
    s.points.reserve(segments);
    s.tangents.reserve(segments);
    for (int k = 0; k < segments; ++k) {
        const double th = k * dtheta;
        const double c = std::cos(th), sn = std::sin(th);
        s.points.push_back(loop.center + loop.radius * (c * e1 + sn * e2));
        s.tangents.push_back(loop.radius * dtheta * (-sn * e1 + c * e2));
    }
    return s;
}

double neumann_sum(const Loop& a, const Loop& b, int segments) {
    const SampledLoop sa = sample(a, segments);
    const SampledLoop sb = sample(b, segments);
    const double clearance = a.wire_radius + b.wire_radius;
    double sum = 0.0;
    for (size_t j = 0; j < sa.points.size(); ++j) {
        for (size_t k = 0; k < sb.points.size(); ++k) {
            const double dist = (sa.points[j] - sb.points[k]).norm();
            if (dist <= clearance)
                throw LoopsIntersect("loops are closer than the wire radii allow");
            sum += sa.tangents[j].dot(sb.tangents[k]) / dist;
        }
    }
    return kMu0 / (4.0 * std::numbers::pi) * a.turns * b.turns * sum;
}

// Canonical argument order makes M(a,b) and M(b,a) bit-identical: the
// integrand is symmetric, only the summation order would differ.
bool loop_less(const Loop& a, const Loop& b) {
    auto key = [](const Loop& l) {
        return std::make_tuple(l.center.x(), l.center.y(), l.center.z(), l.axis.x(),
                               l.axis.y(), l.axis.z(), l.radius, l.turns, l.wire_radius);
    };
    return key(a) < key(b);
}

} // namespace

void Loop::validate() const {
    if (radius <= 0.0) throw InvalidGeometry("loop radius must be positive");
    if (wire_radius <= 0.0) throw InvalidGeometry("wire radius must be positive");
    if (radius <= wire_radius) throw InvalidGeometry("loop radius must exceed wire radius");
    if (turns < 1) throw InvalidGeometry("turns must be >= 1");
    if (std::abs(axis.norm() - 1.0) > 1e-12)
        throw InvalidGeometry("loop axis must be a unit vector");
}

double mutual_inductance_neumann(const Loop& a, const Loop& b, int segments) {
    a.validate();
    b.validate();
    if (segments < 64) throw InvalidGeometry("at least 64 quadrature segments required");
    if (loop_less(b, a)) return mutual_inductance_neumann(b, a, segments);

    const double coarse = neumann_sum(a, b, segments);
    const double fine = neumann_sum(a, b, 2 * segments);
    // Absolute floor: geometrically the scale of a near-touching pair.
    const double scale = kMu0 * std::sqrt(a.radius * b.radius) * a.turns * b.turns;
    if (std::abs(fine - coarse) > kQuadRelTol * std::max(std::abs(fine), 1e-9 * scale))
        throw QuadratureTooCoarse("quadrature has not converged; increase segments");
    return fine;
}

double elliptic_k(double k) {
    if (!(k >= 0.0 && k < 1.0)) throw DegenerateGeometry("elliptic modulus must be in [0,1)");
    double a = 1.0, b = std::sqrt(1.0 - k * k);
    while (std::abs(a - b) > kAgmTol * a) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return std::numbers::pi / (2.0 * a);
}

double elliptic_e(double k) {
    if (!(k >= 0.0 && k < 1.0)) throw DegenerateGeometry("elliptic modulus must be in [0,1)");
    double a = 1.0, b = std::sqrt(1.0 - k * k), c = k;
    double sum = 0.5 * c * c;  // 2^{n-1} c_n^2 term at n = 0
    double pow2 = 0.5;
    while (std::abs(c) > kAgmTol) {
        const double an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    return std::numbers::pi / (2.0 * a) * (1.0 - sum);
}

double mutual_inductance_coaxial(double r1, double r2, double d) {
    if (r1 <= 0.0 || r2 <= 0.0) throw DegenerateGeometry("loop radii must be positive");
    const double denom = (r1 + r2) * (r1 + r2) + d * d;
    const double k2 = 4.0 * r1 * r2 / denom;
    const double k = std::sqrt(k2);
    if (k >= 1.0 - 1e-12) throw DegenerateGeometry("coincident loops: modulus k -> 1");
    return kMu0 * std::sqrt(r1 * r2) *
           ((2.0 / k - k) * elliptic_k(k) - (2.0 / k) * elliptic_e(k));
}

double self_inductance_loop(double radius, double wire_radius, int turns) {
    if (radius <= 0.0 || wire_radius <= 0.0) throw InvalidGeometry("radii must be positive");
    if (turns < 1) throw InvalidGeometry("turns must be >= 1");
    if (radius < 8.0 * wire_radius)
        throw InvalidGeometry("thin-wire formula requires radius >> wire radius");
    return static_cast<double>(turns) * turns * kMu0 * radius *
           (std::log(8.0 * radius / wire_radius) - 2.0);
}

} // namespace magbeam
