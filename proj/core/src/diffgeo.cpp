#include "curvevo/diffgeo.hpp"

#include <cmath>

#include "curvevo/error.hpp"

namespace curvevo {

namespace {

constexpr double kMinSpeed = 1e-12;

} // namespace

Orientation orientation_of(std::span<const Vec2> closed_points) {
    double twice = 0.0;
    for (std::size_t i = 0; i < closed_points.size(); ++i) {
        twice += cross(closed_points[i], closed_points[(i + 1) % closed_points.size()]);
    }
    return twice >= 0.0 ? Orientation::CounterClockwise : Orientation::Clockwise;
}

GeometrySample geometry_from_jet(const CurveJet& jet, Orientation orientation) {
    const double speed = norm(jet.first);
    if (!(speed > kMinSpeed)) {
        throw Error(ErrorKind::DegenerateTangent, "vanishing tangent");
    }
    GeometrySample g;
    g.tangent = jet.first / speed;
    // (-y', x') is the left normal; for counterclockwise traversal it points inward.
    g.normal = -sign(orientation) * perp(g.tangent);
    g.signed_curvature = sign(orientation) * cross(jet.first, jet.second) / (speed * speed * speed);
    g.curvature = std::abs(g.signed_curvature);
    return g;
}

Vec2 normal_at(const BSplineCurve& c, double u, Orientation orientation) {
    const Vec2 d1 = curve_derivatives(c, u, 1)[0];
    const double speed = norm(d1);
    if (!(speed > kMinSpeed)) {
        throw Error(ErrorKind::DegenerateTangent, "vanishing tangent");
    }
    return -sign(orientation) * perp(d1) / speed;
}

Curvature curvature_at(const BSplineCurve& c, double u, Orientation orientation) {
    if (c.degree() < 2) {
        throw Error(ErrorKind::InvalidDegree, "curvature needs degree >= 2");
    }
    const auto d = curve_derivatives(c, u, 2);
    const GeometrySample g = geometry_from_jet({c.evaluate(u), d[0], d[1]}, orientation);
    return {g.curvature, g.signed_curvature};
}

double arc_length(std::span<const Vec2> points, bool closed) {
    if (points.size() < 2) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        total += distance(points[i], points[i - 1]);
    }
    if (closed) {
        total += distance(points.front(), points.back());
    }
    return total;
}

} // namespace curvevo
