#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "curvevo/bspline.hpp"
#include "curvevo/vec2.hpp"

namespace oracle {

using curvevo::Vec2;

/// Textbook Cox-de Boor recursion with the 0/0 := 0 convention. The last
/// nonempty interval is closed on the right so that the clamped end value
/// is reached.
inline double cox_de_boor(const std::vector<double>& t, std::size_t j, int p, double u) {
    if (p == 0) {
        const double last = t.back();
        if (t[j] <= u && u < t[j + 1]) return 1.0;
        if (u == last && t[j] < t[j + 1] && t[j + 1] == last) return 1.0;
        return 0.0;
    }
    double left = 0.0;
    double right = 0.0;
    const double d1 = t[j + p] - t[j];
    const double d2 = t[j + p + 1] - t[j + 1];
    if (d1 > 0.0) left = (u - t[j]) / d1 * cox_de_boor(t, j, p - 1, u);
    if (d2 > 0.0) right = (t[j + p + 1] - u) / d2 * cox_de_boor(t, j + 1, p - 1, u);
    return left + right;
}

inline Vec2 naive_eval(const curvevo::BSplineCurve& c, double u) {
    const std::vector<double> t(c.knots().values().begin(), c.knots().values().end());
    Vec2 out;
    for (std::size_t j = 0; j < c.control_count(); ++j) {
        out += cox_de_boor(t, j, c.degree(), u) * c.control_points()[j];
    }
    return out;
}

/// Random clamped knot vector with nonuniform interior knots on [0, 1].
inline curvevo::KnotVector random_knots(std::mt19937_64& gen, std::size_t m, int p) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> interior(m - p - 1);
    for (double& k : interior) k = unit(gen);
    std::sort(interior.begin(), interior.end());
    std::vector<double> t(p + 1, 0.0);
    t.insert(t.end(), interior.begin(), interior.end());
    t.insert(t.end(), p + 1, 1.0);
    return curvevo::KnotVector(std::move(t), p);
}

inline curvevo::BSplineCurve random_curve(std::mt19937_64& gen, std::size_t m, int p) {
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::vector<Vec2> ctrl(m);
    for (Vec2& q : ctrl) q = {coord(gen), coord(gen)};
    return curvevo::BSplineCurve(random_knots(gen, m, p), std::move(ctrl));
}

inline std::vector<Vec2> circle(std::size_t n, double r = 1.0, double phase = 0.0) {
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        pts[i] = {r * std::cos(t), r * std::sin(t)};
    }
    return pts;
}

/// Points on an arc of the unit circle between angles a and b.
inline std::vector<Vec2> arc(std::size_t n, double a, double b) {
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        pts[i] = {std::cos(t), std::sin(t)};
    }
    return pts;
}

/// Minimum distance from q to the curve over `samples` uniform parameters,
/// followed by a second uniform scan of the same density around the best
/// sample (so the result does not hinge on the probe's distance).
inline double sampled_distance(const curvevo::BSplineCurve& c, Vec2 q, std::size_t samples) {
    const double a = c.knots().front();
    const double b = c.knots().back();
    auto scan = [&](double lo, double hi, double& arg) {
        double best = INFINITY;
        for (std::size_t k = 0; k <= samples; ++k) {
            const double u = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(samples);
            const double d = curvevo::distance(c.evaluate(u), q);
            if (d < best) {
                best = d;
                arg = u;
            }
        }
        return best;
    };
    double arg = a;
    const double coarse = scan(a, b, arg);
    const double du = (b - a) / static_cast<double>(samples);
    double fine_arg = arg;
    const double fine = scan(std::max(a, arg - du), std::min(b, arg + du), fine_arg);
    return std::min(coarse, fine);
}

} // namespace oracle
