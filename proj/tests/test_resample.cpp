#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curvevo/cover.hpp"
#include "curvevo/diffgeo.hpp"
#include "curvevo/fit.hpp"
#include "curvevo/resample.hpp"
#include "oracles.hpp"

using namespace curvevo;

namespace {

struct Fitted {
    Cover cover;
    std::vector<StencilFit> fits;
};

Fitted fit_cloud(std::span<const Vec2> pts) {
    Fitted f;
    f.cover = partition(pts.size(), 1, 8);
    for (const Stencil& s : f.cover.stencils) f.fits.push_back(fit_stencil(pts, s, 7, 0.0, 0));
    return f;
}

std::vector<double> gaps(std::span<const Vec2> pts) {
    std::vector<double> g(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) g[i] = distance(pts[i], pts[(i + 1) % pts.size()]);
    return g;
}

double stddev(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

} // namespace

TEST_CASE("removal") {
    const auto circle = oracle::circle(50);
    const double h = distance(circle[0], circle[1]);
    CHECK(remove_close(circle, 0.5 * h, 4) == circle);

    auto dup = circle;
    dup.insert(dup.begin() + 10, dup[10]);
    CHECK(remove_close(dup, 0.5 * h, 4).size() == 50);

    // a cluster of five points squeezed inside one gap
    auto cluster = circle;
    std::vector<Vec2> extra;
    for (int k = 1; k <= 4; ++k) extra.push_back(circle[20] + (0.03 * k) * (circle[21] - circle[20]));
    cluster.insert(cluster.begin() + 21, extra.begin(), extra.end());
    const auto cleaned = remove_close(cluster, 0.5 * h, 4);
    for (double g : gaps(cleaned)) CHECK(g >= 0.5 * h);

    CHECK(remove_close(circle, 10.0, 12).size() == 12);
}

TEST_CASE("insertion") {
    SUBCASE("nothing to do") {
        const auto pts = oracle::circle(40);
        const Fitted f = fit_cloud(pts);
        CHECK(insert_far(f.fits, f.cover.owner, pts, 1.0) == pts);
    }
    SUBCASE("one oversized gap on a circle") {
        auto pts = oracle::circle(40);
        pts.erase(pts.begin() + 17);
        const Fitted f = fit_cloud(pts);
        const double h = distance(pts[0], pts[1]);
        const auto grown = insert_far(f.fits, f.cover.owner, pts, 1.5 * h);
        REQUIRE(grown.size() == 40);
        // how far the owning spline strays from the circle between its sites
        const BSplineCurve& c = f.fits[16].curve;
        double stray = 0.0;
        for (int k = 0; k <= 2000; ++k) stray = std::max(stray, std::abs(norm(c(k / 2000.0)) - 1.0));
        CHECK(std::abs(norm(grown[17]) - 1.0) <= 10.0 * std::max(stray, 1e-15));
    }
    SUBCASE("straight stencil gives the chord midpoint") {
        std::vector<Vec2> pts;
        for (int i = 0; i < 12; ++i) pts.push_back({static_cast<double>(i), 0.0});
        pts[6].x = 6.5; // gap 5 -> 6.5 is 1.5, next 0.5
        for (int i = 11; i >= 0; --i) pts.push_back({static_cast<double>(i) + 0.5, 1.0});
        const Fitted f = fit_cloud(pts);
        const auto grown = insert_far(f.fits, f.cover.owner, pts, 1.2); // closing gaps are 1.118
        REQUIRE(grown.size() == pts.size() + 1);
        CHECK(distance(grown[6], Vec2{5.75, 0.0}) <= 1e-10);
    }
}

TEST_CASE("redistribution") {
    SUBCASE("uniform circle barely moves") {
        const auto pts = oracle::circle(60);
        const Fitted f = fit_cloud(pts);
        const double eps = 1e-3;
        const Redistribution r = redistribute(f.fits, pts, eps);
        CHECK(!r.skipped);
        REQUIRE(r.points.size() == 60);
        for (std::size_t i = 0; i < 60; ++i) CHECK(distance(r.points[i], pts[i]) <= eps);
    }
    SUBCASE("perturbed spacing is evened out") {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> jitter(-0.3, 0.3);
        const std::size_t n = 60;
        std::vector<Vec2> pts;
        const double step = 2.0 * std::numbers::pi / n;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = step * (static_cast<double>(i) + (i == 0 ? 0.0 : jitter(gen)));
            pts.push_back({std::cos(t), std::sin(t)});
        }
        const Fitted f = fit_cloud(pts);
        const double eps = 1e-3 * step;
        const Redistribution r = redistribute(f.fits, pts, eps);
        REQUIRE(!r.skipped);
        CHECK(r.points.size() == n);
        const auto before = gaps(pts);
        const auto after = gaps(r.points);
        CHECK(stddev(after) < stddev(before));
        for (double g : after) CHECK(std::abs(g - r.target) <= eps);
        CHECK(distance(r.points[0], pts[0]) <= 1e-12);
        CHECK(PointCloud(r.points).signed_area() > 0.0);
        // new points stay on the fitted curves
        for (const Vec2& q : r.points) CHECK(std::abs(norm(q) - 1.0) <= 1e-5);
    }
}

TEST_CASE("gap range") {
    const std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 3}, {0, 3}};
    const auto [lo, hi] = gap_range(pts);
    CHECK(lo == doctest::Approx(1.0));
    CHECK(hi == doctest::Approx(3.0));
}
