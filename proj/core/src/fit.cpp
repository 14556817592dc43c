#include "curvevo/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "curvevo/error.hpp"

namespace curvevo {

namespace {

constexpr int kRootSamplesPerSpan = 64;
constexpr int kDeviationSamplesPerSpan = 256;
constexpr double kRootTolerance = 1e-12;
constexpr double kSnapDistance = 1e-9;
constexpr double kMinReciprocalCondition = 1e-13;

/// Nonempty knot spans [a, b] of the evaluable range.
std::vector<std::pair<double, double>> knot_spans(const KnotVector& kv) {
    std::vector<std::pair<double, double>> spans;
    const auto p = static_cast<std::size_t>(kv.degree());
    for (std::size_t s = p; s < kv.control_count(); ++s) {
        if (kv[s] < kv[s + 1]) {
            spans.emplace_back(kv[s], kv[s + 1]);
        }
    }
    return spans;
}

double golden_section_max(auto&& f, double a, double b) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > 1e-13) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

ParamAssignment chord_parameterize(std::span<const Vec2> points) {
    if (points.size() < 2) {
        throw Error(ErrorKind::DegenerateData, "parameterization needs at least 2 points");
    }
    ParamAssignment out;
    out.chord_lengths.reserve(points.size() - 1);
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double d = distance(points[i], points[i - 1]);
        if (!(d > 0.0)) {
            throw Error(ErrorKind::DegenerateData, "duplicate consecutive points at " + std::to_string(i));
        }
        out.chord_lengths.push_back(d);
        out.total += d;
    }
    out.values.resize(points.size());
    out.values.front() = 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
        acc += out.chord_lengths[i - 1];
        out.values[i] = acc / out.total;
    }
    out.values.back() = 1.0;
    return out;
}

std::vector<std::vector<double>> collocation_matrix(const KnotVector& kv, std::span<const double> params) {
    const std::size_t m = kv.control_count();
    const auto p = static_cast<std::size_t>(kv.degree());
    std::vector<std::vector<double>> b(params.size(), std::vector<double>(m, 0.0));
    std::array<double, 32> n{};
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::size_t span = kv.find_span(params[i]);
        nonzero_basis(kv, span, params[i], std::span<double>(n.data(), p + 1));
        for (std::size_t r = 0; r <= p; ++r) {
            b[i][span - p + r] = n[r];
        }
    }
    return b;
}

BSplineCurve interpolate(std::span<const Vec2> points, std::span<const double> params, int degree) {
    const std::size_t m = points.size();
    if (params.size() != m) {
        throw Error(ErrorKind::InvalidConfiguration, "one parameter per point required");
    }
    if (degree < 1 || m < static_cast<std::size_t>(degree) + 1) {
        throw Error(ErrorKind::InvalidConfiguration,
                    "interpolation needs m >= p + 1 (m = " + std::to_string(m) +
                        ", p = " + std::to_string(degree) + ")");
    }
    KnotVector kv = KnotVector::clamped(m, degree);
    const auto rows = collocation_matrix(kv, params);

    Eigen::MatrixXd b(m, m);
    Eigen::MatrixXd rhs(m, 2);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
        rhs(static_cast<Eigen::Index>(i), 0) = points[i].x;
        rhs(static_cast<Eigen::Index>(i), 1) = points[i].y;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    const double rcond = lu.rcond();
    if (!(rcond > kMinReciprocalCondition)) {
        throw Error(ErrorKind::FitFailure,
                    "collocation matrix is singular or ill-conditioned (rcond = " + std::to_string(rcond) + ")");
    }
    const Eigen::MatrixXd sol = lu.solve(rhs);
    std::vector<Vec2> control(m);
    for (std::size_t j = 0; j < m; ++j) {
        control[j] = {sol(static_cast<Eigen::Index>(j), 0), sol(static_cast<Eigen::Index>(j), 1)};
        if (!is_finite(control[j])) {
            throw Error(ErrorKind::FitFailure, "non-finite control point");
        }
    }
    return BSplineCurve(std::move(kv), std::move(control));
}

BSplineCurve interpolate_stencil(std::span<const Vec2> points, int degree) {
    const ParamAssignment pa = chord_parameterize(points);
    return interpolate(points, pa.values, degree);
}

double interpolation_residual(const BSplineCurve& c, std::span<const Vec2> points,
                              std::span<const double> params) {
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        worst = std::max(worst, distance(c.evaluate(params[i]), points[i]));
    }
    return worst;
}

double diameter(std::span<const Vec2> points) {
    if (points.empty()) {
        return 0.0;
    }
    Vec2 lo = points.front();
    Vec2 hi = points.front();
    for (const Vec2& p : points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return norm(hi - lo);
}

double distance_to_curve(const BSplineCurve& c, const Vec2& probe) {
    const KnotVector& kv = c.knots();
    double best = std::min(distance(c.evaluate(kv.front()), probe), distance(c.evaluate(kv.back()), probe));
    if (c.degree() < 1) {
        return best;
    }
    const CurveDerivatives d(c);
    auto stationarity = [&](double u) {
        const CurveJet j = d.jet(u);
        return dot(probe - j.position, j.first);
    };
    auto consider = [&](double u) { best = std::min(best, distance(c.evaluate(u), probe)); };

    for (auto [a, b] : knot_spans(kv)) {
        double u0 = a;
        double g0 = stationarity(u0);
        for (int k = 1; k <= kRootSamplesPerSpan; ++k) {
            const double u1 = k == kRootSamplesPerSpan ? b : a + (b - a) * k / kRootSamplesPerSpan;
            const double g1 = stationarity(u1);
            if (g0 == 0.0) {
                consider(u0);
            } else if ((g0 < 0.0) != (g1 < 0.0) && g1 != 0.0) {
                double lo = u0;
                double hi = u1;
                double glo = g0;
                while (hi - lo > kRootTolerance) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = stationarity(mid);
                    if ((gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                consider(0.5 * (lo + hi));
            }
            u0 = u1;
            g0 = g1;
        }
        if (g0 == 0.0) {
            consider(u0);
        }
    }
    return best;
}

double control_point_distance(const BSplineCurve& c, std::size_t j) {
    return distance_to_curve(c, c.control_points()[j]);
}

double deviation_metric(const BSplineCurve& c) {
    double worst = 0.0;
    for (std::size_t j = 0; j < c.control_count(); ++j) {
        worst = std::max(worst, control_point_distance(c, j));
    }
    return worst;
}

PolygonDeviation max_polygon_deviation(const BSplineCurve& c) {
    const ControlPolygon gamma(c);
    auto gap = [&](double u) { return distance(c.evaluate(u), gamma(u)); };
    PolygonDeviation best{c.knots().front(), 0.0};
    double step_of_best = 0.0;
    for (auto [a, b] : knot_spans(c.knots())) {
        const double h = (b - a) / kDeviationSamplesPerSpan;
        for (int k = 0; k <= kDeviationSamplesPerSpan; ++k) {
            const double u = k == kDeviationSamplesPerSpan ? b : a + h * k;
            const double g = gap(u);
            if (g > best.distance) {
                best = {u, g};
                step_of_best = h;
            }
        }
    }
    if (step_of_best > 0.0) {
        const double lo = std::max(c.knots().front(), best.parameter - step_of_best);
        const double hi = std::min(c.knots().back(), best.parameter + step_of_best);
        const double u = golden_section_max(gap, lo, hi);
        const double g = gap(u);
        if (g > best.distance) {
            best = {u, g};
        }
    }
    return best;
}

std::pair<BSplineCurve, FitReport> refine_control_polygon(const BSplineCurve& c, double tolerance,
                                                          std::size_t max_insertions) {
    if (!(tolerance > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "deviation tolerance must be positive");
    }
    BSplineCurve curve = c;
    FitReport report;
    for (;;) {
        report.deviation = deviation_metric(curve);
        report.deviation_history.push_back(report.deviation);
        if (report.deviation <= tolerance) {
            break;
        }
        if (report.refinement_steps >= max_insertions) {
            report.exhausted = true;
            break;
        }
        const PolygonDeviation target = max_polygon_deviation(curve);
        const KnotVector& kv = curve.knots();
        const auto values = kv.values();
        double psi = target.parameter;
        const auto snapped = std::find_if(values.begin(), values.end(),
                                          [&](double k) { return std::abs(k - psi) < kSnapDistance; });
        if (snapped != values.end()) {
            // The argmax sits on a knot: split the wider neighbouring span instead.
            const double k = *snapped;
            const auto above = std::upper_bound(values.begin(), values.end(), k);
            const auto below = std::lower_bound(values.begin(), values.end(), k);
            const double right = above != values.end() ? *above - k : 0.0;
            const double left = below != values.begin() ? k - *(below - 1) : 0.0;
            psi = right >= left ? k + 0.5 * right : k - 0.5 * left;
        }
        const bool usable = psi > kv.front() && psi < kv.back() &&
                            kv.multiplicity(psi) + 1 <= static_cast<std::size_t>(kv.degree()) &&
                            std::none_of(values.begin(), values.end(),
                                         [&](double k) { return k != psi && std::abs(k - psi) < kSnapDistance; });
        if (!usable) {
            report.stalled = true;
            break;
        }
        curve = insert_knot(curve, psi);
        ++report.refinement_steps;
    }
    return {std::move(curve), std::move(report)};
}

std::vector<Vec2> StencilFit::gather(std::span<const Vec2> cloud) const {
    std::vector<Vec2> pts(stencil.size());
    for (std::size_t r = 0; r < pts.size(); ++r) {
        pts[r] = cloud[stencil.point(r)];
    }
    return pts;
}

StencilFit fit_stencil(std::span<const Vec2> cloud, const Stencil& stencil, int degree,
                       double deviation_tolerance, std::size_t max_insertions) {
    std::vector<Vec2> pts(stencil.size());
    for (std::size_t r = 0; r < pts.size(); ++r) {
        pts[r] = cloud[stencil.point(r)];
    }
    ParamAssignment pa = chord_parameterize(pts);
    int p = std::min(degree, static_cast<int>(pts.size()) - 1);
    for (;;) {
        try {
            BSplineCurve curve = interpolate(pts, pa.values, p);
            FitReport report;
            report.residual = interpolation_residual(curve, pts, pa.values);
            if (deviation_tolerance > 0.0) {
                auto [refined, rr] = refine_control_polygon(curve, deviation_tolerance, max_insertions);
                rr.residual = report.residual;
                return {stencil, std::move(refined), std::move(pa.values), std::move(rr)};
            }
            return {stencil, std::move(curve), std::move(pa.values), std::move(report)};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::FitFailure || p <= 2) {
                throw;
            }
            --p;
        }
    }
}

int default_degree(std::size_t stencil_size) {
    const auto m = static_cast<int>(stencil_size);
    return std::clamp(m - 2, 1, 8);
}

} // namespace curvevo
