#include "curvevo/evolve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "curvevo/resample.hpp"

namespace curvevo {

Vec2 velocity_at(const VelocityField& field, const GeometrySample& sample, std::optional<double> u_value) {
    switch (field.kind) {
    case VelocityField::Kind::CurvatureFlow:
        return -sample.signed_curvature * sample.normal;
    case VelocityField::Kind::CoupledRD:
        if (!u_value) {
            throw Error(ErrorKind::InvalidConfiguration, "coupled velocity needs a field value");
        }
        return field.sign * (field.c1 * sample.signed_curvature + field.c2 * *u_value) * sample.normal;
    case VelocityField::Kind::Constant:
        return field.constant;
    }
    return {};
}

std::vector<Vec2> step_points(std::span<const Vec2> points, std::span<const Vec2> velocities, double dt) {
    if (points.size() != velocities.size()) {
        throw Error(ErrorKind::InvalidConfiguration, "one velocity per point required");
    }
    if (!(dt > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "time step must be positive");
    }
    std::vector<Vec2> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!is_finite(velocities[i])) {
            throw Error(ErrorKind::NumericalBlowup, "non-finite velocity at point " + std::to_string(i));
        }
        out[i] = points[i] + dt * velocities[i];
    }
    return out;
}

namespace {

double interpolate_in_parameter(std::span<const double> params, std::span<const double> values, double u) {
    if (u <= params.front()) {
        return values.front();
    }
    if (u >= params.back()) {
        return values.back();
    }
    auto it = std::upper_bound(params.begin(), params.end(), u);
    const auto hi = static_cast<std::size_t>(std::distance(params.begin(), it));
    const double t = (u - params[hi - 1]) / (params[hi] - params[hi - 1]);
    return (1.0 - t) * values[hi - 1] + t * values[hi];
}

} // namespace

void step_control_points(StencilFit& fit, const VelocityField& field, Orientation orientation, double dt,
                         std::span<const double> nodal_u) {
    const std::vector<double> greville = fit.curve.knots().greville();
    const CurveDerivatives d(fit.curve);
    std::vector<Vec2> vel(greville.size());
    for (std::size_t j = 0; j < greville.size(); ++j) {
        const GeometrySample g = geometry_from_jet(d.jet(greville[j]), orientation);
        std::optional<double> u;
        if (!nodal_u.empty()) {
            u = interpolate_in_parameter(fit.params, nodal_u, greville[j]);
        }
        vel[j] = velocity_at(field, g, u);
        if (!is_finite(vel[j])) {
            throw Error(ErrorKind::NumericalBlowup, "non-finite control point velocity");
        }
    }
    auto ctrl = fit.curve.control_points();
    for (std::size_t j = 0; j < ctrl.size(); ++j) {
        ctrl[j] += dt * vel[j];
    }
}

double interpolation_error(const StencilFit& fit, std::span<const Vec2> cloud) {
    double worst = 0.0;
    for (std::size_t r = 0; r < fit.stencil.size(); ++r) {
        worst = std::max(worst, distance(cloud[fit.stencil.point(r)], fit.curve.evaluate(fit.params[r])));
    }
    return worst;
}

OptimizeResult optimize_control_points(StencilFit& fit, std::span<const Vec2> cloud, double tau, double alpha,
                                       std::size_t max_iters) {
    if (!(tau > 0.0) || !(alpha > 0.0)) {
        throw Error(ErrorKind::InvalidConfiguration, "optimisation needs tau > 0 and alpha > 0");
    }
    const KnotVector& kv = fit.curve.knots();
    const auto p = static_cast<std::size_t>(kv.degree());
    const std::size_t m_data = fit.stencil.size();
    auto ctrl = fit.curve.control_points();
    const std::size_t m_ctrl = ctrl.size();

    // Sparse collocation: row i touches control points first[i] .. first[i] + p.
    std::vector<std::size_t> first(m_data);
    std::vector<std::array<double, 32>> phi(m_data);
    std::vector<std::vector<std::pair<std::size_t, double>>> columns(m_ctrl);
    for (std::size_t i = 0; i < m_data; ++i) {
        const std::size_t span = kv.find_span(fit.params[i]);
        nonzero_basis(kv, span, fit.params[i], std::span<double>(phi[i].data(), p + 1));
        first[i] = span - p;
        for (std::size_t r = 0; r <= p; ++r) {
            if (phi[i][r] != 0.0) {
                columns[first[i] + r].emplace_back(i, phi[i][r]);
            }
        }
    }
    std::vector<Vec2> targets(m_data);
    for (std::size_t i = 0; i < m_data; ++i) {
        targets[i] = cloud[fit.stencil.point(i)];
    }
    std::vector<Vec2> residual(m_data);
    auto refresh = [&](double& objective, double& error) {
        objective = 0.0;
        error = 0.0;
        for (std::size_t i = 0; i < m_data; ++i) {
            Vec2 f;
            for (std::size_t r = 0; r <= p; ++r) {
                f += phi[i][r] * ctrl[first[i] + r];
            }
            residual[i] = targets[i] - f;
            const double d2 = dot(residual[i], residual[i]);
            objective += d2;
            error = std::max(error, std::sqrt(d2));
        }
    };

    OptimizeResult res;
    res.step = alpha;
    refresh(res.objective, res.error);
    if (res.error <= tau) {
        return res;
    }
    std::vector<Vec2> best(ctrl.begin(), ctrl.end());
    double best_objective = res.objective;
    int increases = 0;
    while (res.iterations < max_iters) {
        double moved = 0.0;
        double scale = 0.0;
        for (std::size_t j = 0; j < m_ctrl; ++j) {
            // gradient of sum |q_i - f(u_i)|^2 w.r.t. P_j is -2 sum_i phi_j(u_i) r_i
            Vec2 g;
            for (const auto& [i, w] : columns[j]) {
                g += w * residual[i];
            }
            const Vec2 delta = (2.0 * res.step) * g;
            ctrl[j] += delta;
            moved = std::max(moved, norm(delta));
            scale = std::max(scale, norm(ctrl[j]));
            for (const auto& [i, w] : columns[j]) {
                residual[i] -= w * delta;
            }
        }
        ++res.iterations;
        refresh(res.objective, res.error);
        if (!std::isfinite(res.objective)) {
            throw Error(ErrorKind::OptimizationFailure, "objective became non-finite");
        }
        // Changes at the level of rounding are neither progress nor divergence.
        const double noise = 1e-13 * best_objective + 1e-300;
        if (res.objective <= best_objective + noise) {
            const bool stagnant = moved <= 1e-15 * (1.0 + scale);
            if (res.objective <= best_objective) {
                std::copy(ctrl.begin(), ctrl.end(), best.begin());
                best_objective = res.objective;
            }
            increases = 0;
            if (stagnant && res.error > tau) {
                break; // at the least-squares minimum; tau is out of reach
            }
        } else if (++increases >= 3) {
            std::copy(best.begin(), best.end(), ctrl.begin());
            refresh(res.objective, res.error);
            res.step *= 0.5;
            increases = 0;
            if (res.step < 1e-8) {
                throw Error(ErrorKind::OptimizationFailure, "step size underflow");
            }
        }
        if (res.error <= tau) {
            break;
        }
    }
    return res;
}

void EvolutionConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfiguration, msg); };
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(t_end >= 0.0)) fail("t_end must be non-negative");
    if (!(alpha > 0.0)) fail("alpha must be positive");
    for (const auto& [name, v] : {std::pair{"tau", tau}, std::pair{"eps_tol", eps_tol},
                                  std::pair{"d_tol_min", d_tol_min}, std::pair{"d_tol_max", d_tol_max},
                                  std::pair{"eps_d", eps_d}}) {
        if (v && !(*v > 0.0)) fail(std::string(name) + " must be positive");
    }
    if (d_tol_min && d_tol_max && !(*d_tol_min < *d_tol_max)) fail("d_tol_min must be below d_tol_max");
    if (core_size < 1) fail("core_size must be at least 1");
    if (boundary_size % 2 != 0) fail("boundary_size must be even");
    if (degree < 2) fail("degree must be at least 2 for curvature");
    if (core_size + boundary_size < 3) fail("stencils need at least 3 points");
    if (velocity.kind == VelocityField::Kind::CoupledRD && !pde) fail("coupled velocity needs pde parameters");
    if (pde) pde->validate();
}

EvolutionConfig resolve_defaults(EvolutionConfig cfg, const PointCloud& initial) {
    const double spacing = arc_length(initial.points(), true) / static_cast<double>(initial.size());
    const double diam = diameter(initial.points());
    if (!cfg.tau) cfg.tau = 1e-6 * diam;
    if (!cfg.eps_tol) cfg.eps_tol = 1e-2 * spacing;
    if (!cfg.d_tol_min) cfg.d_tol_min = 0.75 * spacing;
    if (!cfg.d_tol_max) cfg.d_tol_max = 2.0 * spacing;
    if (!cfg.eps_d) cfg.eps_d = 1e-2 * spacing;
    cfg.validate();
    return cfg;
}

namespace {

PointCloud counterclockwise(PointCloud pc) {
    if (pc.signed_area() >= 0.0) {
        return pc;
    }
    std::vector<Vec2> pts(pc.points().rbegin(), pc.points().rend());
    return PointCloud(std::move(pts));
}

} // namespace

Evolver::Evolver(PointCloud initial, EvolutionConfig cfg)
    : cfg_(resolve_defaults(std::move(cfg), initial)), cloud_(counterclockwise(std::move(initial))) {
    if (cloud_.size() < cfg_.core_size + cfg_.boundary_size) {
        throw Error(ErrorKind::InvalidConfiguration, "cloud smaller than one stencil");
    }
    if (cfg_.pde) {
        const auto [s, total] = arc_positions(cloud_.points());
        fields_ = gaussian_ic(*cfg_.pde, s, total);
    }
}

std::size_t Evolver::min_points() const noexcept {
    return std::max<std::size_t>(4 * static_cast<std::size_t>(cfg_.degree), cfg_.core_size + cfg_.boundary_size);
}

bool Evolver::finished() const {
    return floor_reached_ || static_cast<double>(step_ + 1) * cfg_.dt > cfg_.t_end * (1.0 + 1e-12);
}

std::vector<StencilFit> Evolver::fit_all(std::span<const Vec2> points, bool refine, Cover& cover) const {
    cover = partition(points.size(), cfg_.core_size, cfg_.boundary_size);
    std::vector<StencilFit> fits;
    fits.reserve(cover.size());
    for (const Stencil& s : cover.stencils) {
        StencilFit fit = fit_stencil(points, s, cfg_.degree, 0.0, 0);
        if (refine) {
            // The refined polygon traces the same curve but has more control
            // points than stencil points, which leaves the interpolation
            // objective without a unique minimiser. The square interpolant is
            // what evolves; refinement is carried as a report.
            auto [refined, report] = refine_control_polygon(fit.curve, *cfg_.eps_tol, cfg_.max_insertions);
            report.residual = fit.report.residual;
            fit.report = std::move(report);
        }
        fits.push_back(std::move(fit));
    }
    return fits;
}

void Evolver::refit() {
    fits_ = fit_all(cloud_.points(), cfg_.refine, cover_);
    fits_valid_ = true;
    geometry_valid_ = false;
    pending_refit_ = true;
    pending_refined_ = std::any_of(fits_.begin(), fits_.end(),
                                   [](const StencilFit& f) { return f.report.refinement_steps > 0; });
}

void Evolver::ensure_geometry() {
    if (!fits_valid_) {
        refit();
    }
    if (geometry_valid_) {
        return;
    }
    orientation_ = orientation_of(cloud_.points());
    geometry_.assign(cloud_.size(), GeometrySample{});
    for (const StencilFit& fit : fits_) {
        const CurveDerivatives d(fit.curve);
        for (std::size_t r = 0; r < fit.stencil.core_size; ++r) {
            const std::size_t pos = fit.stencil.core_offset() + r;
            GeometrySample g = geometry_from_jet(d.jet(fit.params[pos]), orientation_);
            g.point_index = fit.stencil.point(pos);
            geometry_[g.point_index] = g;
        }
    }
    geometry_valid_ = true;
}

const std::vector<GeometrySample>& Evolver::geometry() {
    ensure_geometry();
    return geometry_;
}

void Evolver::step() {
    ensure_geometry();
    flags_ = {};
    flags_.refit = pending_refit_;
    flags_.refined = pending_refined_;
    pending_refit_ = false;
    pending_refined_ = false;

    const std::size_t n = cloud_.size();
    const double dt = cfg_.dt;
    std::vector<Vec2> vel(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<double> u;
        if (fields_) {
            u = fields_->u[i];
        }
        vel[i] = velocity_at(cfg_.velocity, geometry_[i], u);
    }

    std::vector<double> nodal;
    for (StencilFit& fit : fits_) {
        nodal.clear();
        if (fields_) {
            for (std::size_t r = 0; r < fit.stencil.size(); ++r) {
                nodal.push_back(fields_->u[fit.stencil.point(r)]);
            }
        }
        step_control_points(fit, cfg_.velocity, orientation_, dt, nodal);
    }
    cloud_ = PointCloud(step_points(cloud_.points(), vel, dt));

    for (StencilFit& fit : fits_) {
        if (interpolation_error(fit, cloud_.points()) > *cfg_.tau) {
            const OptimizeResult r =
                optimize_control_points(fit, cloud_.points(), *cfg_.tau, cfg_.alpha, cfg_.max_opt_iters);
            flags_.optimized = true;
            flags_.max_opt_iterations = std::max(flags_.max_opt_iterations, r.iterations);
            if (r.error > *cfg_.tau) {
                // The sweeps stalled: fall back to a fresh interpolation of this stencil.
                fit = fit_stencil(cloud_.points(), fit.stencil, cfg_.degree, 0.0, 0);
                flags_.refit = true;
                ++flags_.fallback_refits;
            }
        }
    }

    if (fields_) {
        std::vector<double> dilution(n);
        for (std::size_t i = 0; i < n; ++i) {
            dilution[i] = tangential_divergence(geometry_[i].signed_curvature, dot(vel[i], geometry_[i].normal));
        }
        FieldState st = *fields_;
        std::tie(st.arc_positions, st.total_length) = arc_positions(cloud_.points());
        fields_ = imex_step(st, dilution, *cfg_.pde, dt);
    }

    ++step_;
    time_ = static_cast<double>(step_) * dt;
    geometry_valid_ = false;

    if (cfg_.resample) {
        resample_if_needed();
    }
}

void Evolver::resample_if_needed() {
    const double d_min = *cfg_.d_tol_min;
    const double d_max = *cfg_.d_tol_max;
    const auto [lo, hi] = gap_range(cloud_.points());
    if (lo >= d_min && hi <= d_max) {
        return;
    }
    const std::vector<Vec2> before(cloud_.points().begin(), cloud_.points().end());

    // Even out the spacing first so that a uniformly shrinking cloud loses
    // every other point at once instead of a few stragglers per step.
    Cover cover;
    std::vector<StencilFit> fits = fit_all(before, false, cover);
    const Redistribution even = redistribute(fits, before, *cfg_.eps_d);
    std::vector<Vec2> pts = even.skipped ? before : even.points;

    pts = remove_close(pts, d_min, min_points());
    flags_.removed = before.size() - pts.size();
    fits = fit_all(pts, false, cover);
    std::vector<Vec2> grown = insert_far(fits, cover.owner, pts, d_max);
    flags_.inserted = grown.size() - pts.size();
    if (flags_.inserted > 0) {
        fits = fit_all(grown, false, cover);
    }
    const Redistribution red = redistribute(fits, grown, *cfg_.eps_d);
    flags_.redistribution_skipped = red.skipped;
    flags_.resampled = true;

    if (flags_.removed == 0 && flags_.inserted == 0 && gap_range(red.points).first < d_min) {
        floor_reached_ = true;
    }
    cloud_ = PointCloud(red.points);
    if (fields_) {
        fields_ = transfer_fields(before, *fields_, cloud_.points());
    }
    fits_valid_ = false;
    geometry_valid_ = false;
}

FrameRecord Evolver::frame() {
    ensure_geometry();
    FrameRecord f;
    f.step = step_;
    f.time = time_;
    f.points.assign(cloud_.points().begin(), cloud_.points().end());
    f.curvature.reserve(cloud_.size());
    f.normal.reserve(cloud_.size());
    for (const GeometrySample& g : geometry_) {
        f.curvature.push_back(g.signed_curvature);
        f.normal.push_back(g.normal);
    }
    if (fields_) {
        f.u = fields_->u;
        f.v = fields_->v;
    }
    f.flags = flags_;
    return f;
}

RunResult run(const PointCloud& initial, const EvolutionConfig& cfg, std::size_t export_every) {
    Evolver ev(initial, cfg);
    RunResult res;
    export_every = std::max<std::size_t>(export_every, 1);
    try {
        res.frames.push_back(ev.frame());
        while (!ev.finished()) {
            ev.step();
            ++res.steps;
            if (res.steps % export_every == 0 || ev.finished()) {
                res.frames.push_back(ev.frame());
            }
        }
    } catch (const Error& e) {
        res.failure = e;
    }
    return res;
}

} // namespace curvevo
