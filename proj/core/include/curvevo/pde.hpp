#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "curvevo/vec2.hpp"

namespace curvevo {

/// Schnakenberg-type kinetics plus diffusion and velocity coupling constants.
struct RDParams {
    double D_u = 0.1;
    double D_v = 1.5;
    double gamma = 100.0;
    double react_c = 0.1;
    double react_d = 0.9;
    double sigma = 0.3;
    double theta0 = 0.0;
    double c1 = 0.02;
    double c2 = 1.0;

    /// Throws InvalidConfiguration unless D_u, D_v, gamma, sigma > 0.
    void validate() const;
};

struct FieldState {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> arc_positions; // s_0 = 0 < s_1 < ... < total_length
    double total_length = 0.0;

    std::size_t size() const noexcept { return u.size(); }
};

/// Homogeneous steady state (c + d, d / (c + d)^2).
std::pair<double, double> steady_state(const RDParams& params);

struct Reaction {
    double g1 = 0.0;
    double g2 = 0.0;
};

constexpr Reaction reaction_terms(double u, double v, const RDParams& params) {
    return {params.gamma * (params.react_c - u + u * u * v), params.gamma * (params.react_d - u * u * v)};
}

/// Cumulative chord length of a closed polygon, starting at point 0, plus its
/// total perimeter.
std::pair<std::vector<double>, double> arc_positions(std::span<const Vec2> closed_points);

/// Periodic non-uniform three-point second derivative in arc length.
std::vector<double> laplace_beltrami(std::span<const double> values, std::span<const double> arc_positions,
                                     double total_length);

/// u = u0 (1 + 0.5 g), v = v0 (1 + 0.5 g) with g a wrapped Gaussian in the
/// angle theta = 2 pi s / L around theta0.
FieldState gaussian_ic(const RDParams& params, std::span<const double> arc_positions, double total_length);

/// Solves a periodic tridiagonal system. lower[0] couples row 0 to x[n-1] and
/// upper[n-1] couples row n-1 to x[0]. Throws TimeStepTooLarge on a zero pivot.
std::vector<double> solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                             std::span<const double> upper, std::span<const double> rhs);

/// One implicit-explicit step: diffusion implicit, reaction and dilution
/// explicit. `dilution_rate[i]` is div(V) at node i (kappa_s * v_n).
/// `state.arc_positions` must describe the curve at the new time level.
FieldState imex_step(const FieldState& state, std::span<const double> dilution_rate, const RDParams& params,
                     double dt);

/// Trapezoidal integral of nodal values around the closed curve.
double periodic_integral(std::span<const double> values, std::span<const double> arc_positions,
                         double total_length);

/// Periodic linear interpolation of nodal values at arbitrary arc positions.
std::vector<double> periodic_interpolate(std::span<const double> values, std::span<const double> arc_positions,
                                         double total_length, std::span<const double> targets);

/// Moves field values from one discretisation of the curve to another by
/// projecting each new point onto the old polygon.
FieldState transfer_fields(std::span<const Vec2> old_points, const FieldState& old_state,
                           std::span<const Vec2> new_points);

} // namespace curvevo
