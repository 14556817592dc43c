#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curvevo/bspline.hpp"
#include "curvevo/vec2.hpp"

namespace curvevo {

/// Traversal direction of a closed curve, taken from its signed area.
enum class Orientation : int { Clockwise = -1, CounterClockwise = 1 };

Orientation orientation_of(std::span<const Vec2> closed_points);
constexpr double sign(Orientation o) { return static_cast<double>(static_cast<int>(o)); }

struct GeometrySample {
    std::size_t point_index = 0;
    Vec2 normal;   // outward unit normal
    Vec2 tangent;  // unit tangent in the direction of increasing parameter
    double curvature = 0.0;        // |kappa|
    double signed_curvature = 0.0; // positive where the curve bends towards the interior
};

/// Outward unit normal. Throws DegenerateTangent when |f'(u)| <= 1e-12.
Vec2 normal_at(const BSplineCurve& c, double u, Orientation orientation);

struct Curvature {
    double magnitude = 0.0;
    double signed_value = 0.0;
};

/// |x'y'' - y'x''| / |f'|^3 and its signed counterpart; -signed_value * n is
/// the curvature-flow velocity. Requires degree >= 2.
Curvature curvature_at(const BSplineCurve& c, double u, Orientation orientation);

/// Normal, tangent and curvature from a precomputed jet.
GeometrySample geometry_from_jet(const CurveJet& jet, Orientation orientation);

/// Sum of consecutive chord lengths; `closed` adds the closing segment.
double arc_length(std::span<const Vec2> points, bool closed = true);

/// Surface divergence of a purely normal velocity field v_n n on a curve.
constexpr double tangential_divergence(double signed_curvature, double normal_speed) {
    return signed_curvature * normal_speed;
}

} // namespace curvevo
