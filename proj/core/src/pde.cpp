#include "curvevo/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "curvevo/error.hpp"

namespace curvevo {

void RDParams::validate() const {
    if (!(D_u > 0.0) || !(D_v > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "diffusion coefficients must be positive");
    }
    if (!(gamma > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "reaction rate must be positive");
    }
    if (!(sigma > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "perturbation width must be positive");
    }
}

std::pair<double, double> steady_state(const RDParams& params) {
    const double s = params.react_c + params.react_d;
    if (s == 0.0) {
        throw Error(ErrorKind::DegenerateParameters, "c + d = 0 has no steady state");
    }
    return {s, params.react_d / (s * s)};
}

std::pair<std::vector<double>, double> arc_positions(std::span<const Vec2> closed_points) {
    std::vector<double> s(closed_points.size(), 0.0);
    for (std::size_t i = 1; i < closed_points.size(); ++i) {
        s[i] = s[i - 1] + distance(closed_points[i], closed_points[i - 1]);
    }
    const double total = s.back() + distance(closed_points.back(), closed_points.front());
    return {std::move(s), total};
}

namespace {

struct Spacing {
    double before;
    double after;
};

Spacing spacing_at(std::span<const double> s, double total, std::size_t i) {
    const std::size_t n = s.size();
    const double before = i == 0 ? s[0] + total - s[n - 1] : s[i] - s[i - 1];
    const double after = i + 1 == n ? s[0] + total - s[n - 1] : s[i + 1] - s[i];
    if (!(before > 0.0) || !(after > 0.0)) {
        throw Error(ErrorKind::DegenerateMesh, "coincident arc positions at node " + std::to_string(i));
    }
    return {before, after};
}

} // namespace

std::vector<double> laplace_beltrami(std::span<const double> values, std::span<const double> arc_positions,
                                     double total_length) {
    const std::size_t n = values.size();
    if (n < 3 || arc_positions.size() != n) {
        throw Error(ErrorKind::DegenerateMesh, "Laplacian needs at least 3 matching nodes");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [hm, hp] = spacing_at(arc_positions, total_length, i);
        const double prev = values[i == 0 ? n - 1 : i - 1];
        const double next = values[i + 1 == n ? 0 : i + 1];
        out[i] = 2.0 * ((next - values[i]) / hp - (values[i] - prev) / hm) / (hm + hp);
    }
    return out;
}

FieldState gaussian_ic(const RDParams& params, std::span<const double> arc_positions, double total_length) {
    params.validate();
    const auto [u0, v0] = steady_state(params);
    FieldState st;
    st.arc_positions.assign(arc_positions.begin(), arc_positions.end());
    st.total_length = total_length;
    st.u.resize(arc_positions.size());
    st.v.resize(arc_positions.size());
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < arc_positions.size(); ++i) {
        const double theta = two_pi * arc_positions[i] / total_length;
        // wrap into (-pi, pi]
        double d = std::remainder(theta - params.theta0, two_pi);
        if (d == -std::numbers::pi) {
            d = std::numbers::pi;
        }
        const double bump = 0.5 * std::exp(-d * d / (2.0 * params.sigma * params.sigma));
        st.u[i] = u0 + u0 * bump;
        st.v[i] = v0 + v0 * bump;
    }
    return st;
}

std::vector<double> solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                             std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (n < 3) {
        throw Error(ErrorKind::DegenerateMesh, "cyclic system needs at least 3 unknowns");
    }
    constexpr double tiny = 1e-300;
    // Sherman-Morrison: A = T + w z^T with T tridiagonal.
    const double alpha = upper[n - 1]; // A(n-1, 0)
    const double beta = lower[0];      // A(0, n-1)
    const double gamma = -diag[0];

    auto thomas = [&](std::span<const double> d, std::span<const double> r, std::vector<double>& x) {
        std::vector<double> c(n);
        double bet = d[0];
        if (std::abs(bet) < tiny) {
            throw Error(ErrorKind::TimeStepTooLarge, "zero pivot in cyclic solve");
        }
        x[0] = r[0] / bet;
        for (std::size_t i = 1; i < n; ++i) {
            c[i] = upper[i - 1] / bet;
            bet = d[i] - lower[i] * c[i];
            if (std::abs(bet) < tiny) {
                throw Error(ErrorKind::TimeStepTooLarge, "zero pivot in cyclic solve");
            }
            x[i] = (r[i] - lower[i] * x[i - 1]) / bet;
        }
        for (std::size_t i = n - 1; i-- > 0;) {
            x[i] -= c[i + 1] * x[i + 1];
        }
    };

    std::vector<double> bb(diag.begin(), diag.end());
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;
    std::vector<double> x(n);
    thomas(bb, rhs, x);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    std::vector<double> z(n);
    thomas(bb, u, z);
    const double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if (std::abs(denom) < tiny) {
        throw Error(ErrorKind::TimeStepTooLarge, "singular cyclic system");
    }
    const double fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] -= fact * z[i];
    }
    return x;
}

FieldState imex_step(const FieldState& state, std::span<const double> dilution_rate, const RDParams& params,
                     double dt) {
    const std::size_t n = state.size();
    if (!(dt > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "time step must be positive");
    }
    if (state.v.size() != n || state.arc_positions.size() != n || dilution_rate.size() != n || n < 3) {
        throw Error(ErrorKind::InvalidConfiguration, "field arrays are inconsistent");
    }

    std::vector<double> lo(n);
    std::vector<double> up(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [hm, hp] = spacing_at(state.arc_positions, state.total_length, i);
        lo[i] = 2.0 / (hm * (hm + hp));
        up[i] = 2.0 / (hp * (hm + hp));
    }

    auto solve = [&](double diffusion, const std::vector<double>& rhs) {
        std::vector<double> a(n);
        std::vector<double> b(n);
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = -dt * diffusion * lo[i];
            c[i] = -dt * diffusion * up[i];
            b[i] = 1.0 - a[i] - c[i];
        }
        return solve_cyclic_tridiagonal(a, b, c, rhs);
    };

    std::vector<double> ru(n);
    std::vector<double> rv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Reaction g = reaction_terms(state.u[i], state.v[i], params);
        ru[i] = state.u[i] + dt * (g.g1 - state.u[i] * dilution_rate[i]);
        rv[i] = state.v[i] + dt * (g.g2 - state.v[i] * dilution_rate[i]);
    }

    FieldState next;
    next.arc_positions = state.arc_positions;
    next.total_length = state.total_length;
    next.u = solve(params.D_u, ru);
    next.v = solve(params.D_v, rv);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(next.u[i]) || !std::isfinite(next.v[i])) {
            throw Error(ErrorKind::NumericalBlowup, "non-finite field value at node " + std::to_string(i));
        }
    }
    return next;
}

double periodic_integral(std::span<const double> values, std::span<const double> arc_positions,
                         double total_length) {
    const std::size_t n = values.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + 1 == n ? 0 : i + 1;
        const double h = i + 1 == n ? total_length - arc_positions[i] + arc_positions[0]
                                    : arc_positions[j] - arc_positions[i];
        sum += 0.5 * h * (values[i] + values[j]);
    }
    return sum;
}

std::vector<double> periodic_interpolate(std::span<const double> values, std::span<const double> arc_positions,
                                         double total_length, std::span<const double> targets) {
    const std::size_t n = values.size();
    std::vector<double> out(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
        double s = std::fmod(targets[k] - arc_positions[0], total_length);
        if (s < 0.0) {
            s += total_length;
        }
        s += arc_positions[0];
        auto it = std::upper_bound(arc_positions.begin(), arc_positions.end(), s);
        const auto hi = static_cast<std::size_t>(std::distance(arc_positions.begin(), it));
        const std::size_t i = hi - 1;
        const std::size_t j = hi == n ? 0 : hi;
        const double s_next = hi == n ? arc_positions[0] + total_length : arc_positions[hi];
        const double t = (s - arc_positions[i]) / (s_next - arc_positions[i]);
        out[k] = (1.0 - t) * values[i] + t * values[j];
    }
    return out;
}

FieldState transfer_fields(std::span<const Vec2> old_points, const FieldState& old_state,
                           std::span<const Vec2> new_points) {
    const std::size_t n_old = old_points.size();
    const auto [old_s, old_total] = arc_positions(old_points);

    std::vector<double> targets(new_points.size());
    for (std::size_t k = 0; k < new_points.size(); ++k) {
        double best = std::numeric_limits<double>::infinity();
        double best_s = 0.0;
        for (std::size_t i = 0; i < n_old; ++i) {
            const Vec2& a = old_points[i];
            const Vec2& b = old_points[(i + 1) % n_old];
            const Vec2 ab = b - a;
            const double len2 = dot(ab, ab);
            const double t = std::clamp(dot(new_points[k] - a, ab) / len2, 0.0, 1.0);
            const double d = distance(a + t * ab, new_points[k]);
            if (d < best) {
                best = d;
                best_s = old_s[i] + t * std::sqrt(len2);
            }
        }
        targets[k] = best_s;
    }

    FieldState out;
    out.u = periodic_interpolate(old_state.u, old_s, old_total, targets);
    out.v = periodic_interpolate(old_state.v, old_s, old_total, targets);
    std::tie(out.arc_positions, out.total_length) = arc_positions(new_points);
    return out;
}

} // namespace curvevo
