#include "curvevo/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvevo/diffgeo.hpp"

namespace curvevo {

std::vector<Vec2> remove_close(std::span<const Vec2> points, double d_min, std::size_t min_points) {
    std::vector<Vec2> kept;
    kept.reserve(points.size());
    std::size_t remaining = points.size();
    kept.push_back(points.front());
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (remaining > min_points && distance(kept.back(), points[i]) < d_min) {
            --remaining;
            continue;
        }
        kept.push_back(points[i]);
    }
    // closing gap: q_{N-1} -> q_0
    while (kept.size() > min_points && kept.size() > 1 && distance(kept.back(), kept.front()) < d_min) {
        kept.pop_back();
    }
    return kept;
}

std::vector<Vec2> insert_far(std::span<const StencilFit> fits, std::span<const std::size_t> owner,
                             std::span<const Vec2> points, double d_max) {
    const std::size_t n = points.size();
    std::vector<Vec2> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(points[i]);
        const std::size_t next = (i + 1) % n;
        const double gap = distance(points[i], points[next]);
        if (!(gap > d_max)) {
            continue;
        }
        const auto pieces = static_cast<std::size_t>(std::ceil(gap / d_max));
        const StencilFit& fit = fits[owner[i]];
        // locate i and i+1 inside the owning stencil
        std::size_t r = fit.stencil.size();
        for (std::size_t k = 0; k + 1 < fit.stencil.size(); ++k) {
            if (fit.stencil.point(k) == i && fit.stencil.point(k + 1) == next) {
                r = k;
                break;
            }
        }
        for (std::size_t k = 1; k < pieces; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(pieces);
            if (r < fit.stencil.size()) {
                const double u = (1.0 - t) * fit.params[r] + t * fit.params[r + 1];
                out.push_back(fit.curve.evaluate(u));
            } else {
                out.push_back((1.0 - t) * points[i] + t * points[next]);
            }
        }
    }
    return out;
}

PiecewiseCurve::PiecewiseCurve(std::span<const StencilFit> fits, std::span<const Vec2> points) {
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const StencilFit& f = fits[k];
        const std::size_t first = f.stencil.core_offset();
        const std::size_t past = first + f.stencil.core_size;
        Piece piece;
        if (past < f.stencil.size()) {
            piece.curve = &f.curve;
            piece.u0 = f.params[first];
            piece.u1 = f.params[past];
            pieces_.push_back(piece);
        } else {
            // no right boundary: curve up to the last core point, then a chord
            if (f.stencil.core_size > 1) {
                piece.curve = &f.curve;
                piece.u0 = f.params[first];
                piece.u1 = f.params[past - 1];
                pieces_.push_back(piece);
            }
            Piece seg;
            seg.a = points[f.stencil.point(past - 1)];
            seg.b = points[(f.stencil.point(past - 1) + 1) % points.size()];
            pieces_.push_back(seg);
        }
    }
}

Vec2 PiecewiseCurve::operator()(double sigma) const {
    const double per = period();
    sigma = std::fmod(sigma, per);
    if (sigma < 0.0) {
        sigma += per;
    }
    auto k = static_cast<std::size_t>(sigma);
    if (k >= pieces_.size()) {
        k = pieces_.size() - 1;
    }
    const double t = sigma - static_cast<double>(k);
    const Piece& p = pieces_[k];
    if (p.curve == nullptr) {
        return (1.0 - t) * p.a + t * p.b;
    }
    return p.curve->evaluate((1.0 - t) * p.u0 + t * p.u1);
}

namespace {

constexpr int kBracketSteps = 8;
constexpr int kBisectionIterations = 60;

struct March {
    std::vector<double> sigmas;
    double closing_gap = 0.0;
    bool ok = false;
};

/// Walks the closed chain from sigma = 0 placing n points with consecutive
/// chord `d`. `step` is a parameter increment small enough that the chord
/// distance grows monotonically over a few steps.
March march(const PiecewiseCurve& curve, std::size_t n, double d, double step) {
    March m;
    m.sigmas.reserve(n);
    m.sigmas.push_back(0.0);
    const double end = curve.period();
    double sigma = 0.0;
    Vec2 anchor = curve(0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double lo = sigma;
        double hi = sigma;
        bool bracketed = false;
        for (int guard = 0; guard < 64 * kBracketSteps; ++guard) {
            hi = lo + step;
            if (hi >= end) {
                return m; // ran past the closure: d too large
            }
            if (distance(curve(hi), anchor) >= d) {
                bracketed = true;
                break;
            }
            lo = hi;
        }
        if (!bracketed) {
            return m;
        }
        for (int it = 0; it < kBisectionIterations; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (distance(curve(mid), anchor) < d) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        sigma = 0.5 * (lo + hi);
        anchor = curve(sigma);
        m.sigmas.push_back(sigma);
    }
    m.closing_gap = distance(anchor, curve(0.0));
    m.ok = true;
    return m;
}

} // namespace

Redistribution redistribute(std::span<const StencilFit> fits, std::span<const Vec2> points, double eps_d) {
    Redistribution out;
    const std::size_t n = points.size();
    out.points.assign(points.begin(), points.end());
    out.target = arc_length(points, true) / static_cast<double>(n);

    const PiecewiseCurve curve(fits, points);
    // parameter increment of roughly a quarter gap
    const double step = 0.25 * curve.period() / static_cast<double>(n);

    // closure residual F(d) = closing_gap(d) - d, decreasing in d
    auto residual = [&](double d, March& m) {
        m = march(curve, n, d, step);
        return m.ok ? m.closing_gap - d : -d;
    };

    double a = out.target * 0.95;
    double b = out.target * 1.05;
    March ma;
    March mb;
    double fa = residual(a, ma);
    double fb = residual(b, mb);
    for (int widen = 0; widen < 8 && fa < 0.0; ++widen) {
        a *= 0.9;
        fa = residual(a, ma);
    }
    for (int widen = 0; widen < 8 && fb > 0.0; ++widen) {
        b *= 1.1;
        fb = residual(b, mb);
    }
    if (!(fa >= 0.0 && fb <= 0.0)) {
        out.skipped = true;
        return out;
    }
    // Illinois-style regula falsi on the closure residual.
    March best = fa < -fb ? ma : mb;
    double best_d = fa < -fb ? a : b;
    int side = 0;
    for (int it = 0; it < 100 && b - a > 1e-14 * out.target; ++it) {
        const double c = (a * fb - b * fa) / (fb - fa);
        March mc;
        const double fc = residual(c, mc);
        best = mc;
        best_d = c;
        if (std::abs(fc) < 1e-13 * out.target) {
            break;
        }
        if (fc > 0.0) {
            a = c;
            fa = fc;
            if (side == 1) {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if (side == -1) {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    if (!best.ok || std::abs(best_d - out.target) > eps_d) {
        out.skipped = true;
        return out;
    }
    out.spacing = best_d;
    for (std::size_t i = 0; i < n; ++i) {
        out.points[i] = curve(best.sigmas[i]);
    }
    return out;
}

std::pair<double, double> gap_range(std::span<const Vec2> points) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = distance(points[i], points[(i + 1) % points.size()]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

} // namespace curvevo
