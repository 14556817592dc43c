#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "curvevo/vec2.hpp"

namespace curvevo {

/// Nondecreasing knot sequence of a degree-p spline space with m basis
/// functions; always holds exactly m + p + 1 values.
///
/// Indices are 0-based throughout: basis function j in [0, m) is supported
/// on [knots[j], knots[j + p + 1]].
class KnotVector {
public:
    /// Validates length, ordering and multiplicity (at most p + 1).
    KnotVector(std::vector<double> knots, int degree);

    /// Open-uniform (clamped) vector on [0, 1]: p + 1 zeros, p + 1 ones and
    /// m - p - 1 uniformly spaced interior knots. Requires m >= p + 1, p >= 1.
    static KnotVector clamped(std::size_t control_count, int degree);

    int degree() const noexcept { return degree_; }
    std::size_t control_count() const noexcept { return knots_.size() - degree_ - 1; }
    std::size_t size() const noexcept { return knots_.size(); }
    double operator[](std::size_t i) const { return knots_[i]; }
    std::span<const double> values() const noexcept { return knots_; }

    /// Evaluable parameter range [knots[p], knots[m]].
    double front() const { return knots_[degree_]; }
    double back() const { return knots_[control_count()]; }
    bool contains(double u) const { return u >= front() && u <= back(); }

    /// Index s in [p, m) with knots[s] <= u < knots[s+1]; the right endpoint
    /// maps to the last nonempty span.
    std::size_t find_span(double u) const;

    std::size_t multiplicity(double u) const;

    /// Greville abscissae: mean of knots[j+1..j+p] for every basis function.
    std::vector<double> greville() const;

    /// Copy with u inserted (no validation of multiplicity beyond ctor rules).
    KnotVector with_inserted(double u) const;

    /// Knots with the first and last entry removed, degree p - 1. This is the
    /// knot vector of the derivative curve.
    KnotVector derivative_knots() const;

private:
    std::vector<double> knots_;
    int degree_;
};

/// The p + 1 basis functions that are nonzero on knot span `span`, evaluated
/// at u with the triangular de Boor scheme. Entry r belongs to basis function
/// span - p + r.
void nonzero_basis(const KnotVector& kv, std::size_t span, double u, std::span<double> out);

/// Value of basis function j at u. Throws OutOfDomain when u lies outside the
/// evaluable range.
double basis_eval(const KnotVector& kv, std::size_t j, double u);

class BSplineCurve {
public:
    BSplineCurve(KnotVector knots, std::vector<Vec2> control_points);

    const KnotVector& knots() const noexcept { return knots_; }
    int degree() const noexcept { return knots_.degree(); }
    std::size_t control_count() const noexcept { return control_.size(); }
    std::span<const Vec2> control_points() const noexcept { return control_; }
    std::span<Vec2> control_points() noexcept { return control_; }

    Vec2 operator()(double u) const { return evaluate(u); }
    Vec2 evaluate(double u) const;

    /// Hodograph: the degree p - 1 curve with control points
    /// p (P[j+1] - P[j]) / (knots[j+p+1] - knots[j+1]).
    BSplineCurve derivative() const;

private:
    KnotVector knots_;
    std::vector<Vec2> control_;
};

/// Position plus first and, optionally, second derivative of a curve.
struct CurveJet {
    Vec2 position;
    Vec2 first;
    Vec2 second;
};

/// Derivatives of order 1..order at u (order must be 1 or 2 and <= p).
/// Throws InvalidOrder otherwise.
std::vector<Vec2> curve_derivatives(const BSplineCurve& c, double u, int order);

/// Caches the hodographs of a curve so repeated jet evaluation is cheap.
class CurveDerivatives {
public:
    explicit CurveDerivatives(const BSplineCurve& c);

    /// Second derivative is zero for degree-1 curves.
    CurveJet jet(double u) const;

private:
    BSplineCurve curve_;
    BSplineCurve first_;
    std::optional<BSplineCurve> second_;
};

/// Boehm knot insertion of a single knot. The returned curve has one more
/// control point and traces the same point set.
BSplineCurve insert_knot(const BSplineCurve& c, double knot);

/// Control polygon with vertices placed at the Greville abscissae.
struct ControlPolygon {
    std::vector<Vec2> vertices;
    std::vector<double> greville;

    explicit ControlPolygon(const BSplineCurve& c);

    /// Piecewise-linear interpolation of the vertices over the abscissae.
    Vec2 operator()(double u) const;
};

} // namespace curvevo
