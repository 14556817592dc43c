#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "curvevo/cover.hpp"
#include "curvevo/error.hpp"
#include "curvevo/evolve.hpp"
#include "curvevo/fit.hpp"
#include "oracles.hpp"

using namespace curvevo;

namespace {

GeometrySample circle_sample(double angle) {
    GeometrySample g;
    g.normal = {std::cos(angle), std::sin(angle)};
    g.tangent = perp(g.normal);
    g.curvature = 1.0;
    g.signed_curvature = 1.0;
    return g;
}

StencilFit circle_stencil_fit(std::size_t n, std::size_t label) {
    const auto cloud = oracle::circle(n);
    const Cover cover = partition(n, 1, 8);
    return fit_stencil(cloud, cover.stencils[label], 7, 0.0, 0);
}

// Direct least-squares solution of min sum |q_i - sum_j phi_j(u_i) P_j|^2.
std::vector<Vec2> least_squares(const KnotVector& kv, const std::vector<double>& params,
                                const std::vector<Vec2>& data) {
    const auto rows = collocation_matrix(kv, params);
    Eigen::MatrixXd B(rows.size(), rows.front().size());
    Eigen::MatrixXd Q(rows.size(), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) B(i, j) = rows[i][j];
        Q(i, 0) = data[i].x;
        Q(i, 1) = data[i].y;
    }
    const Eigen::MatrixXd P = (B.transpose() * B).ldlt().solve(B.transpose() * Q);
    std::vector<Vec2> out(P.rows());
    for (Eigen::Index j = 0; j < P.rows(); ++j) out[j] = {P(j, 0), P(j, 1)};
    return out;
}

} // namespace

TEST_CASE("velocity fields") {
    VelocityField flow;
    const Vec2 v = velocity_at(flow, circle_sample(0.3));
    CHECK(norm(v) == doctest::Approx(1.0));
    CHECK(dot(v, Vec2{std::cos(0.3), std::sin(0.3)}) == doctest::Approx(-1.0));

    GeometrySample flat = circle_sample(0.0);
    flat.curvature = flat.signed_curvature = 0.0;
    CHECK(norm(velocity_at(flow, flat)) == 0.0);

    VelocityField coupled;
    coupled.kind = VelocityField::Kind::CoupledRD;
    coupled.c1 = 0.02;
    coupled.c2 = 1.0;
    const double u0 = steady_state(RDParams{}).first;
    CHECK(norm(velocity_at(coupled, circle_sample(1.0), u0)) == doctest::Approx(std::abs(0.02 + u0)));
    CHECK_THROWS_AS(velocity_at(coupled, circle_sample(1.0)), Error);
}

TEST_CASE("point update") {
    const auto pts = oracle::circle(16);
    CHECK(step_points(pts, std::vector<Vec2>(16), 0.1) == pts);

    std::vector<Vec2> vel;
    for (const Vec2& q : pts) vel.push_back(-1.0 * q); // curvature flow on the unit circle
    for (const Vec2& q : step_points(pts, vel, 1e-3)) CHECK(std::abs(norm(q) - 0.999) <= 1e-5);

    const auto moved = step_points(pts, std::vector<Vec2>(16, Vec2{1, 0}), 0.25);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(distance(moved[i], pts[i] + Vec2{0.25, 0}) <= 1e-15);

    vel[3] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    try {
        step_points(pts, vel, 1e-3);
        FAIL("expected blowup");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NumericalBlowup);
    }
    CHECK_THROWS_AS(step_points(pts, std::vector<Vec2>(3), 1e-3), Error);
}

TEST_CASE("control point update") {
    const auto cloud = oracle::circle(40);
    SUBCASE("zero and rigid velocity") {
        StencilFit fit = circle_stencil_fit(40, 5);
        const std::vector<Vec2> before(fit.curve.control_points().begin(), fit.curve.control_points().end());
        VelocityField still;
        still.kind = VelocityField::Kind::Constant;
        step_control_points(fit, still, Orientation::CounterClockwise, 0.1);
        CHECK(std::equal(before.begin(), before.end(), fit.curve.control_points().begin()));

        VelocityField shift = still;
        shift.constant = {0.3, -0.2};
        step_control_points(fit, shift, Orientation::CounterClockwise, 0.5);
        std::vector<Vec2> moved;
        for (const Vec2& q : cloud) moved.push_back(q + Vec2{0.15, -0.1});
        CHECK(interpolation_error(fit, moved) <= 1e-14);
    }
    SUBCASE("co-evolution error is first order in dt") {
        auto err_after = [&](double dt) {
            StencilFit fit = circle_stencil_fit(40, 5);
            step_control_points(fit, VelocityField{}, Orientation::CounterClockwise, dt);
            std::vector<Vec2> moved;
            for (const Vec2& q : cloud) moved.push_back((1.0 - dt) * q);
            return interpolation_error(fit, moved);
        };
        const double e1 = err_after(1e-3);
        const double e2 = err_after(5e-4);
        CHECK(e2 < e1);
        CHECK(e1 <= 1e-4);
    }
}

TEST_CASE("interpolation error") {
    const auto cloud = oracle::circle(40);
    const StencilFit fit = circle_stencil_fit(40, 7);
    CHECK(interpolation_error(fit, cloud) <= 1e-10 * diameter(cloud));

    auto bumped = cloud;
    const double delta = 1e-3;
    bumped[fit.stencil.point(4)] += Vec2{0.0, delta};
    CHECK(interpolation_error(fit, bumped) >= delta * (1 - 1e-6));

    StencilFit shifted = fit;
    for (Vec2& p : shifted.curve.control_points()) p += Vec2{5, -3};
    auto moved = cloud;
    for (Vec2& q : moved) q += Vec2{5, -3};
    CHECK(interpolation_error(shifted, moved) <= 1e-10 * diameter(cloud));
}

TEST_CASE("optimizer") {
    SUBCASE("no work below tolerance") {
        StencilFit fit = circle_stencil_fit(40, 1);
        const auto cloud = oracle::circle(40);
        const std::vector<Vec2> before(fit.curve.control_points().begin(), fit.curve.control_points().end());
        const OptimizeResult r = optimize_control_points(fit, cloud, 1e-6, 0.5, 50);
        CHECK(r.iterations == 0);
        CHECK(std::equal(before.begin(), before.end(), fit.curve.control_points().begin()));
    }
    SUBCASE("matches the least-squares solution") {
        std::mt19937_64 gen(41);
        std::normal_distribution<double> noise(0.0, 0.05);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Vec2> data = oracle::arc(9, 0.0, 2.0);
            for (Vec2& q : data) q += Vec2{noise(gen), noise(gen)};
            const Stencil s = partition(9, 9, 0).stencils[0];
            const auto params = chord_parameterize(data).values;
            // six control points for nine sites: a genuine least-squares problem
            const KnotVector kv = KnotVector::clamped(6, 3);
            const auto exact = least_squares(kv, params, data);
            StencilFit fit{s, BSplineCurve(kv, std::vector<Vec2>(6)), params, {}};
            optimize_control_points(fit, data, 1e-300, 0.5, 20000);
            for (std::size_t j = 0; j < 6; ++j) CHECK(distance(fit.curve.control_points()[j], exact[j]) <= 1e-8);
        }
    }
    SUBCASE("objective never increases across accepted sweeps") {
        auto data = oracle::arc(9, 0.0, 2.0);
        const Stencil s = partition(9, 9, 0).stencils[0];
        const auto params = chord_parameterize(data).values;
        StencilFit fit{s, BSplineCurve(KnotVector::clamped(9, 7), std::vector<Vec2>(9)), params, {}};
        double last = INFINITY;
        for (int k = 0; k < 30; ++k) {
            const OptimizeResult r = optimize_control_points(fit, data, 1e-300, 0.5, 1);
            CHECK(r.objective <= last);
            last = r.objective;
        }
    }
    SUBCASE("oversized step is halved") {
        auto data = oracle::arc(9, 0.0, 2.0);
        const Stencil s = partition(9, 9, 0).stencils[0];
        const auto params = chord_parameterize(data).values;
        StencilFit fit{s, BSplineCurve(KnotVector::clamped(9, 7), std::vector<Vec2>(9)), params, {}};
        const OptimizeResult r = optimize_control_points(fit, data, 1e-300, 40.0, 200);
        CHECK(r.step < 40.0);
        CHECK(std::isfinite(r.objective));
    }
    CHECK_THROWS_AS(
        [] {
            StencilFit fit = circle_stencil_fit(40, 1);
            optimize_control_points(fit, oracle::circle(40), 0.0, 0.5, 5);
        }(),
        Error);
}

TEST_CASE("configuration") {
    EvolutionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.d_tol_min = 2.0;
    cfg.d_tol_max = 1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.boundary_size = 7;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.velocity.kind = VelocityField::Kind::CoupledRD;
    CHECK_THROWS_AS(cfg.validate(), Error);

    const PointCloud pc(oracle::circle(100));
    const EvolutionConfig r = resolve_defaults(EvolutionConfig{}, pc);
    const double h = arc_length(pc.points()) / 100.0;
    CHECK(*r.tau == doctest::Approx(1e-6 * diameter(pc.points())));
    CHECK(*r.eps_tol == doctest::Approx(1e-2 * h));
    CHECK(*r.d_tol_min == doctest::Approx(0.75 * h));
    CHECK(*r.d_tol_max == doctest::Approx(2.0 * h));
}

TEST_CASE("run basics") {
    const PointCloud pc(oracle::circle(60));
    SUBCASE("t_end below dt") {
        EvolutionConfig cfg;
        cfg.t_end = 0.5e-3;
        const RunResult r = run(pc, cfg);
        CHECK(r.frames.size() == 1);
        CHECK(r.steps == 0);
        CHECK(r.frames[0].points == std::vector<Vec2>(pc.points().begin(), pc.points().end()));
    }
    SUBCASE("frames are consistent") {
        EvolutionConfig cfg;
        cfg.t_end = 0.01;
        const RunResult r = run(pc, cfg, 3);
        CHECK(!r.failure);
        CHECK(r.steps == 10);
        CHECK(r.frames.size() == 5); // 0, 3, 6, 9, 10
        for (const FrameRecord& f : r.frames) {
            CHECK(f.curvature.size() == f.point_count());
            CHECK(f.normal.size() == f.point_count());
            CHECK(!f.u);
        }
        CHECK(r.frames.back().time == doctest::Approx(0.01));
    }
    SUBCASE("clockwise input is stored counterclockwise") {
        std::vector<Vec2> rev(pc.points().rbegin(), pc.points().rend());
        Evolver ev(PointCloud(rev), EvolutionConfig{});
        CHECK(ev.cloud().signed_area() > 0.0);
    }
    SUBCASE("failure keeps the frame history") {
        EvolutionConfig cfg;
        cfg.velocity.kind = VelocityField::Kind::Constant;
        cfg.velocity.constant = {std::numeric_limits<double>::infinity(), 0.0};
        const RunResult r = run(pc, cfg);
        REQUIRE(r.failure);
        CHECK(r.failure->kind() == ErrorKind::NumericalBlowup);
        CHECK(r.frames.size() == 1);
    }
}

TEST_CASE("zero velocity is a fixed point") {
    const PointCloud pc(oracle::circle(60));
    EvolutionConfig cfg;
    cfg.velocity.kind = VelocityField::Kind::Constant;
    cfg.t_end = 0.1;
    Evolver ev(pc, cfg);
    while (!ev.finished()) ev.step();
    CHECK(ev.step_index() == 100);
    for (std::size_t i = 0; i < pc.size(); ++i) CHECK(distance(ev.cloud()[i], pc[i]) <= 1e-12);
}

TEST_CASE("shrinking circle") {
    const PointCloud pc(oracle::circle(60));
    EvolutionConfig cfg;
    cfg.t_end = 0.18;
    cfg.resample = false;
    Evolver ev(pc, cfg);
    std::size_t optimized = 0;
    while (!ev.finished()) {
        ev.step();
        optimized += ev.last_flags().optimized;
        // the cloud stays convex
        const auto q = ev.cloud().points();
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Vec2 a = q[(i + 1) % q.size()] - q[i];
            const Vec2 b = q[(i + 2) % q.size()] - q[(i + 1) % q.size()];
            REQUIRE(cross(a, b) > 0.0);
        }
    }
    CHECK(optimized > 0);
    double mean = 0.0;
    for (const Vec2& q : ev.cloud().points()) mean += norm(q);
    mean /= static_cast<double>(ev.cloud().size());
    CHECK(std::abs(mean - 0.8) <= 5e-4);
}
