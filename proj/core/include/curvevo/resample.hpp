#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curvevo/fit.hpp"
#include "curvevo/vec2.hpp"

namespace curvevo {

/// Single cyclic pass dropping q_{i+1} whenever |q_{i+1} - q_i| < d_min,
/// comparing against the last kept point. Stops at `min_points`.
std::vector<Vec2> remove_close(std::span<const Vec2> points, double d_min, std::size_t min_points);

/// Splits every gap longer than d_max by evaluating the curve of the stencil
/// owning the gap's first point at evenly spaced parameters between the two
/// endpoints. `owner` maps point index to stencil label.
std::vector<Vec2> insert_far(std::span<const StencilFit> fits, std::span<const std::size_t> owner,
                             std::span<const Vec2> points, double d_max);

struct Redistribution {
    std::vector<Vec2> points;
    double target = 0.0;  // L / N with L the chord length through the curve samples
    double spacing = 0.0; // common gap actually achieved
    bool skipped = false; // marching failed to bracket; input returned unchanged
};

/// Re-places the N points along the piecewise stencil curves so that every
/// consecutive chord has one common length; point 0 stays fixed. The result
/// is flagged as skipped when the common length misses L / N by more than
/// `eps_d`.
Redistribution redistribute(std::span<const StencilFit> fits, std::span<const Vec2> points, double eps_d);

/// Closed chain of curve pieces, one per core: stencil k contributes its
/// curve between its first core point and the first point of the next core.
class PiecewiseCurve {
public:
    explicit PiecewiseCurve(std::span<const StencilFit> fits, std::span<const Vec2> points);

    double period() const noexcept { return static_cast<double>(pieces_.size()); }
    /// sigma in [0, period()); integer part selects the piece.
    Vec2 operator()(double sigma) const;

private:
    struct Piece {
        const BSplineCurve* curve = nullptr; // null: straight segment a -> b
        double u0 = 0.0;
        double u1 = 1.0;
        Vec2 a;
        Vec2 b;
    };
    std::vector<Piece> pieces_;
};

/// Minimum and maximum consecutive gap of a closed polygon.
std::pair<double, double> gap_range(std::span<const Vec2> points);

} // namespace curvevo
