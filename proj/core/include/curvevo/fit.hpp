#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "curvevo/bspline.hpp"
#include "curvevo/cover.hpp"
#include "curvevo/vec2.hpp"

namespace curvevo {

/// Chord-length parameter values u_0 = 0 < ... < u_{m-1} = 1.
struct ParamAssignment {
    std::vector<double> values;
    std::vector<double> chord_lengths; // m - 1 entries, chord_lengths[i] = |q_{i+1} - q_i|
    double total = 0.0;
};

ParamAssignment chord_parameterize(std::span<const Vec2> points);

/// Dense collocation matrix B(i, j) = phi_j(u_i), rows = data sites.
std::vector<std::vector<double>> collocation_matrix(const KnotVector& kv, std::span<const double> params);

/// Clamped degree-p interpolant with f(params[i]) = points[i]. Both
/// coordinates share one LU factorization of the collocation matrix.
BSplineCurve interpolate(std::span<const Vec2> points, std::span<const double> params, int degree);

/// Chord-length parameterization followed by `interpolate`.
BSplineCurve interpolate_stencil(std::span<const Vec2> points, int degree);

/// max_i |f(params[i]) - points[i]|.
double interpolation_residual(const BSplineCurve& c, std::span<const Vec2> points,
                              std::span<const double> params);

/// Bounding-box diagonal of a point set.
double diameter(std::span<const Vec2> points);

/// Distance from `probe` to the curve, taken over the domain ends and the
/// odd-multiplicity roots of (probe - f(u)) . f'(u).
double distance_to_curve(const BSplineCurve& c, const Vec2& probe);

/// distance_to_curve for control point j.
double control_point_distance(const BSplineCurve& c, std::size_t j);

/// Largest control point distance.
double deviation_metric(const BSplineCurve& c);

struct PolygonDeviation {
    double parameter = 0.0;
    double distance = 0.0;
};

/// argmax over u of |f(u) - Gamma(u)|, Gamma the Greville-parameterized
/// control polygon.
PolygonDeviation max_polygon_deviation(const BSplineCurve& c);

struct FitReport {
    double residual = 0.0;
    double deviation = 0.0;
    std::size_t refinement_steps = 0;
    bool exhausted = false; // insertion budget used up before reaching tolerance
    bool stalled = false;   // argmax fell on an existing knot
    std::vector<double> deviation_history;
};

/// Inserts knots at the polygon-deviation argmax until deviation_metric
/// drops to `tolerance` or the insertion budget runs out.
std::pair<BSplineCurve, FitReport> refine_control_polygon(const BSplineCurve& c, double tolerance,
                                                          std::size_t max_insertions);

/// m - 2 capped at 8 (never below 1).
int default_degree(std::size_t stencil_size);

/// A stencil together with its local interpolant and parameter values.
struct StencilFit {
    Stencil stencil;
    BSplineCurve curve;
    std::vector<double> params; // one per stencil point, stencil order
    FitReport report;

    std::vector<Vec2> gather(std::span<const Vec2> cloud) const;
};

/// Interpolates the stencil's points with degree min(degree, size - 1),
/// stepping the degree down on a singular collocation matrix, then refines
/// the control polygon to `deviation_tolerance` (skipped when <= 0).
StencilFit fit_stencil(std::span<const Vec2> cloud, const Stencil& stencil, int degree,
                       double deviation_tolerance, std::size_t max_insertions);

} // namespace curvevo
