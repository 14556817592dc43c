#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curvevo/vec2.hpp"

namespace curvevo {

/// Ordered cyclic sample of a closed planar curve.
class PointCloud {
public:
    /// Requires at least 4 points with distinct consecutive entries
    /// (including the closing pair).
    explicit PointCloud(std::vector<Vec2> points);

    std::size_t size() const noexcept { return points_.size(); }
    const Vec2& operator[](std::size_t i) const { return points_[i]; }
    std::span<const Vec2> points() const noexcept { return points_; }
    bool closed() const noexcept { return true; }

    std::size_t next(std::size_t i) const { return i + 1 == size() ? 0 : i + 1; }
    std::size_t prev(std::size_t i) const { return i == 0 ? size() - 1 : i - 1; }
    /// Index i + offset taken modulo N.
    std::size_t wrap(std::ptrdiff_t i) const;

    /// Shoelace area; positive for counterclockwise ordering.
    double signed_area() const;
    Vec2 centroid() const;

    static constexpr std::size_t kMinPoints = 4;

private:
    std::vector<Vec2> points_;
};

/// One cover element: a contiguous cyclic run of core indices padded with
/// `boundary_each` neighbours on both sides.
struct Stencil {
    std::size_t label = 0;
    std::size_t core_begin = 0;
    std::size_t core_size = 0;
    std::size_t boundary_each = 0;
    std::size_t cloud_size = 0;

    std::size_t size() const noexcept { return core_size + 2 * boundary_each; }
    /// Cloud index of the r-th stencil point, r in [0, size()).
    std::size_t point(std::size_t r) const;
    /// Position of the first core point inside the stencil ordering.
    std::size_t core_offset() const noexcept { return boundary_each; }

    std::vector<std::size_t> indices() const;
    std::vector<std::size_t> core_indices() const;
    std::vector<std::size_t> boundary_indices() const;
};

/// Disjoint cores covering every point once, with overlapping stencils.
struct Cover {
    std::vector<Stencil> stencils;
    std::vector<std::size_t> owner; // owner[i] = k(i)

    std::size_t size() const noexcept { return stencils.size(); }
};

/// Splits N cyclic indices into cores of `core_size` (the last core absorbs
/// the remainder; a remainder of one merges into the previous core) and pads
/// each with boundary_size / 2 points per side.
Cover partition(std::size_t cloud_size, std::size_t core_size, std::size_t boundary_size);
inline Cover partition(const PointCloud& pc, std::size_t core_size, std::size_t boundary_size) {
    return partition(pc.size(), core_size, boundary_size);
}

/// Label of the stencil whose core contains point i.
std::size_t stencil_of(const Cover& cover, std::size_t i);

} // namespace curvevo
