#include "curvevo/cover.hpp"

#include <string>

#include "curvevo/error.hpp"

namespace curvevo {

PointCloud::PointCloud(std::vector<Vec2> points) : points_(std::move(points)) {
    if (points_.size() < kMinPoints) {
        throw Error(ErrorKind::InvalidConfiguration,
                    "point cloud needs at least 4 points, got " + std::to_string(points_.size()));
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!is_finite(points_[i])) {
            throw Error(ErrorKind::DegenerateData, "non-finite point " + std::to_string(i));
        }
        if (points_[i] == points_[next(i)]) {
            throw Error(ErrorKind::DegenerateData,
                        "coincident consecutive points at index " + std::to_string(i));
        }
    }
}

std::size_t PointCloud::wrap(std::ptrdiff_t i) const {
    const auto n = static_cast<std::ptrdiff_t>(size());
    return static_cast<std::size_t>(((i % n) + n) % n);
}

double PointCloud::signed_area() const {
    double twice = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        twice += cross(points_[i], points_[next(i)]);
    }
    return 0.5 * twice;
}

Vec2 PointCloud::centroid() const {
    Vec2 sum;
    for (const Vec2& p : points_) {
        sum += p;
    }
    return sum / static_cast<double>(size());
}

std::size_t Stencil::point(std::size_t r) const {
    return (core_begin + cloud_size - boundary_each + r) % cloud_size;
}

std::vector<std::size_t> Stencil::indices() const {
    std::vector<std::size_t> out(size());
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r] = point(r);
    }
    return out;
}

std::vector<std::size_t> Stencil::core_indices() const {
    std::vector<std::size_t> out(core_size);
    for (std::size_t r = 0; r < core_size; ++r) {
        out[r] = point(boundary_each + r);
    }
    return out;
}

std::vector<std::size_t> Stencil::boundary_indices() const {
    std::vector<std::size_t> out;
    out.reserve(2 * boundary_each);
    for (std::size_t r = 0; r < boundary_each; ++r) {
        out.push_back(point(r));
    }
    for (std::size_t r = 0; r < boundary_each; ++r) {
        out.push_back(point(boundary_each + core_size + r));
    }
    return out;
}

Cover partition(std::size_t cloud_size, std::size_t core_size, std::size_t boundary_size) {
    if (core_size < 1) {
        throw Error(ErrorKind::InvalidConfiguration, "core size must be at least 1");
    }
    if (boundary_size % 2 != 0) {
        throw Error(ErrorKind::InvalidConfiguration, "boundary size must be even");
    }
    if (core_size + boundary_size > cloud_size) {
        throw Error(ErrorKind::InvalidConfiguration,
                    "stencil of " + std::to_string(core_size + boundary_size) +
                        " points exceeds cloud size " + std::to_string(cloud_size));
    }

    std::vector<std::size_t> sizes(cloud_size / core_size, core_size);
    const std::size_t rest = cloud_size % core_size;
    if (rest == 1 && !sizes.empty() && core_size > 1) {
        sizes.back() += 1;
    } else if (rest > 0) {
        sizes.push_back(rest);
    }

    Cover cover;
    cover.owner.resize(cloud_size);
    std::size_t begin = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        Stencil s{k, begin, sizes[k], boundary_size / 2, cloud_size};
        if (s.size() > cloud_size) {
            throw Error(ErrorKind::InvalidConfiguration,
                        "merged core " + std::to_string(k) + " overflows the cloud");
        }
        for (std::size_t r = 0; r < s.core_size; ++r) {
            cover.owner[begin + r] = k;
        }
        cover.stencils.push_back(s);
        begin += sizes[k];
    }
    return cover;
}

std::size_t stencil_of(const Cover& cover, std::size_t i) {
    return cover.owner.at(i);
}

} // namespace curvevo
