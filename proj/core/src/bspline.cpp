#include "curvevo/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "curvevo/error.hpp"

namespace curvevo {

namespace {

// Local scratch for the triangular scheme; degrees above this are rejected.
constexpr int kMaxDegree = 31;

} // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
    if (degree_ < 0 || degree_ > kMaxDegree) {
        throw Error(ErrorKind::InvalidDegree, "degree " + std::to_string(degree_));
    }
    if (knots_.size() < static_cast<std::size_t>(2 * degree_ + 2)) {
        throw Error(ErrorKind::InvalidConfiguration,
                    "knot vector needs at least 2p + 2 entries, got " + std::to_string(knots_.size()));
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i])) {
            throw Error(ErrorKind::InvalidConfiguration, "non-finite knot");
        }
        if (i > 0 && knots_[i] < knots_[i - 1]) {
            throw Error(ErrorKind::InvalidConfiguration, "knots must be nondecreasing");
        }
    }
    std::size_t run = 1;
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        run = knots_[i] == knots_[i - 1] ? run + 1 : 1;
        if (run > static_cast<std::size_t>(degree_) + 1) {
            throw Error(ErrorKind::Multiplicity, "knot multiplicity exceeds p + 1");
        }
    }
    if (!(front() < back())) {
        throw Error(ErrorKind::InvalidConfiguration, "empty evaluable range");
    }
}

KnotVector KnotVector::clamped(std::size_t control_count, int degree) {
    if (degree < 1) {
        throw Error(ErrorKind::InvalidDegree, "clamped knots need p >= 1");
    }
    const auto p = static_cast<std::size_t>(degree);
    if (control_count < p + 1) {
        throw Error(ErrorKind::InvalidConfiguration,
                    "need m >= p + 1 control points (m = " + std::to_string(control_count) +
                        ", p = " + std::to_string(degree) + ")");
    }
    const std::size_t m = control_count;
    std::vector<double> knots(m + p + 1, 0.0);
    const std::size_t spans = m - p;
    for (std::size_t i = 1; i < spans; ++i) {
        knots[p + i] = static_cast<double>(i) / static_cast<double>(spans);
    }
    std::fill(knots.begin() + static_cast<std::ptrdiff_t>(m), knots.end(), 1.0);
    return KnotVector(std::move(knots), degree);
}

std::size_t KnotVector::find_span(double u) const {
    const std::size_t p = static_cast<std::size_t>(degree_);
    const std::size_t m = control_count();
    if (u >= back()) {
        std::size_t s = m - 1;
        while (s > p && knots_[s] == knots_[s + 1]) {
            --s;
        }
        return s;
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
    auto s = static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
    return std::clamp(s, p, m - 1);
}

std::size_t KnotVector::multiplicity(double u) const {
    return static_cast<std::size_t>(std::count(knots_.begin(), knots_.end(), u));
}

std::vector<double> KnotVector::greville() const {
    const std::size_t m = control_count();
    std::vector<double> g(m);
    if (degree_ == 0) {
        for (std::size_t j = 0; j < m; ++j) {
            g[j] = 0.5 * (knots_[j] + knots_[j + 1]);
        }
        return g;
    }
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (int k = 1; k <= degree_; ++k) {
            sum += knots_[j + static_cast<std::size_t>(k)];
        }
        g[j] = sum / degree_;
    }
    return g;
}

KnotVector KnotVector::with_inserted(double u) const {
    std::vector<double> knots = knots_;
    knots.insert(std::upper_bound(knots.begin(), knots.end(), u), u);
    return KnotVector(std::move(knots), degree_);
}

KnotVector KnotVector::derivative_knots() const {
    if (degree_ == 0) {
        throw Error(ErrorKind::InvalidOrder, "degree-0 knot vector has no derivative");
    }
    return KnotVector(std::vector<double>(knots_.begin() + 1, knots_.end() - 1), degree_ - 1);
}

void nonzero_basis(const KnotVector& kv, std::size_t span, double u, std::span<double> out) {
    const int p = kv.degree();
    std::array<double, kMaxDegree + 1> left{};
    std::array<double, kMaxDegree + 1> right{};
    out[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = u - kv[span + 1 - static_cast<std::size_t>(j)];
        right[j] = kv[span + static_cast<std::size_t>(j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom == 0.0 ? 0.0 : out[r] / denom;
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

double basis_eval(const KnotVector& kv, std::size_t j, double u) {
    if (!kv.contains(u)) {
        throw Error(ErrorKind::OutOfDomain, "parameter " + std::to_string(u) + " outside [" +
                                                std::to_string(kv.front()) + ", " +
                                                std::to_string(kv.back()) + "]");
    }
    if (j >= kv.control_count()) {
        throw Error(ErrorKind::OutOfDomain, "basis index " + std::to_string(j));
    }
    const auto p = static_cast<std::size_t>(kv.degree());
    const std::size_t span = kv.find_span(u);
    if (j + p < span || j > span) {
        return 0.0;
    }
    std::array<double, kMaxDegree + 1> n{};
    nonzero_basis(kv, span, u, std::span<double>(n.data(), p + 1));
    return n[j + p - span];
}

BSplineCurve::BSplineCurve(KnotVector knots, std::vector<Vec2> control_points)
    : knots_(std::move(knots)), control_(std::move(control_points)) {
    if (control_.size() != knots_.control_count()) {
        throw Error(ErrorKind::InvalidConfiguration,
                    "expected " + std::to_string(knots_.control_count()) + " control points, got " +
                        std::to_string(control_.size()));
    }
}

Vec2 BSplineCurve::evaluate(double u) const {
    if (!knots_.contains(u)) {
        throw Error(ErrorKind::OutOfDomain, "parameter " + std::to_string(u));
    }
    const auto p = static_cast<std::size_t>(degree());
    const std::size_t span = knots_.find_span(u);
    std::array<double, kMaxDegree + 1> n{};
    nonzero_basis(knots_, span, u, std::span<double>(n.data(), p + 1));
    Vec2 out;
    for (std::size_t r = 0; r <= p; ++r) {
        out += n[r] * control_[span - p + r];
    }
    return out;
}

BSplineCurve BSplineCurve::derivative() const {
    const int p = degree();
    if (p == 0) {
        throw Error(ErrorKind::InvalidOrder, "cannot differentiate a degree-0 curve");
    }
    std::vector<Vec2> q(control_.size() - 1);
    for (std::size_t j = 0; j + 1 < control_.size(); ++j) {
        const double span = knots_[j + static_cast<std::size_t>(p) + 1] - knots_[j + 1];
        q[j] = span > 0.0 ? (control_[j + 1] - control_[j]) * (p / span) : Vec2{};
    }
    return BSplineCurve(knots_.derivative_knots(), std::move(q));
}

std::vector<Vec2> curve_derivatives(const BSplineCurve& c, double u, int order) {
    if (order < 1 || order > 2 || order > c.degree()) {
        throw Error(ErrorKind::InvalidOrder,
                    "order " + std::to_string(order) + " for degree " + std::to_string(c.degree()));
    }
    if (!c.knots().contains(u)) {
        throw Error(ErrorKind::OutOfDomain, "parameter " + std::to_string(u));
    }
    std::vector<Vec2> out;
    BSplineCurve d = c.derivative();
    out.push_back(d.evaluate(u));
    if (order == 2) {
        out.push_back(d.derivative().evaluate(u));
    }
    return out;
}

CurveDerivatives::CurveDerivatives(const BSplineCurve& c) : curve_(c), first_(c.derivative()) {
    if (c.degree() >= 2) {
        second_ = first_.derivative();
    }
}

CurveJet CurveDerivatives::jet(double u) const {
    return {curve_.evaluate(u), first_.evaluate(u), second_ ? second_->evaluate(u) : Vec2{}};
}

BSplineCurve insert_knot(const BSplineCurve& c, double knot) {
    const KnotVector& kv = c.knots();
    if (!(knot > kv.front() && knot < kv.back())) {
        throw Error(ErrorKind::OutOfDomain, "inserted knot must lie strictly inside the domain");
    }
    const auto p = static_cast<std::size_t>(c.degree());
    const std::size_t s = kv.multiplicity(knot);
    if (s + 1 > p) {
        throw Error(ErrorKind::Multiplicity,
                    "insertion would raise multiplicity to " + std::to_string(s + 1));
    }
    const std::size_t k = kv.find_span(knot);
    auto ctrl = c.control_points();
    std::vector<Vec2> q(ctrl.size() + 1);
    for (std::size_t i = 0; i <= k - p; ++i) {
        q[i] = ctrl[i];
    }
    for (std::size_t i = k - p + 1; i <= k - s; ++i) {
        const double alpha = (knot - kv[i]) / (kv[i + p] - kv[i]);
        q[i] = (1.0 - alpha) * ctrl[i - 1] + alpha * ctrl[i];
    }
    for (std::size_t i = k - s + 1; i < q.size(); ++i) {
        q[i] = ctrl[i - 1];
    }
    return BSplineCurve(kv.with_inserted(knot), std::move(q));
}

ControlPolygon::ControlPolygon(const BSplineCurve& c)
    : vertices(c.control_points().begin(), c.control_points().end()), greville(c.knots().greville()) {}

Vec2 ControlPolygon::operator()(double u) const {
    if (vertices.size() == 1 || u <= greville.front()) {
        return vertices.front();
    }
    if (u >= greville.back()) {
        return vertices.back();
    }
    auto it = std::upper_bound(greville.begin(), greville.end(), u);
    const auto hi = static_cast<std::size_t>(std::distance(greville.begin(), it));
    const std::size_t lo = hi - 1;
    const double w = greville[hi] - greville[lo];
    const double t = w > 0.0 ? (u - greville[lo]) / w : 0.0;
    return (1.0 - t) * vertices[lo] + t * vertices[hi];
}

} // namespace curvevo
