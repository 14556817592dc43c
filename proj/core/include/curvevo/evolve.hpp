#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curvevo/cover.hpp"
#include "curvevo/diffgeo.hpp"
#include "curvevo/error.hpp"
#include "curvevo/fit.hpp"
#include "curvevo/pde.hpp"
#include "curvevo/vec2.hpp"

namespace curvevo {

struct VelocityField {
    enum class Kind { CurvatureFlow, CoupledRD, Constant };

    Kind kind = Kind::CurvatureFlow;
    double c1 = 0.0;
    double c2 = 0.0;
    /// Sign applied to (c1 kappa + c2 u) n; -1 shrinks a circle.
    double sign = -1.0;
    Vec2 constant;
};

/// curvature flow: -kappa_s n; coupled: sign (c1 kappa_s + c2 u) n;
/// constant: the fixed vector. Throws InvalidConfiguration when the coupled
/// field is evaluated without a field value.
Vec2 velocity_at(const VelocityField& field, const GeometrySample& sample, std::optional<double> u_value = {});

/// Forward Euler update of every point. Throws NumericalBlowup on a
/// non-finite velocity.
std::vector<Vec2> step_points(std::span<const Vec2> points, std::span<const Vec2> velocities, double dt);

/// Moves each control point by dt times the velocity field evaluated at the
/// curve point of its Greville abscissa. `nodal_u` (stencil order, may be
/// empty) supplies the field value, interpolated linearly in parameter.
void step_control_points(StencilFit& fit, const VelocityField& field, Orientation orientation, double dt,
                         std::span<const double> nodal_u = {});

/// max over stencil points of |q_i - f(u_i)|.
double interpolation_error(const StencilFit& fit, std::span<const Vec2> cloud);

struct OptimizeResult {
    std::size_t iterations = 0;
    double error = 0.0;     // err_interp after the last sweep
    double objective = 0.0; // sum of squared residuals
    double step = 0.0;      // step size in use at exit
};

/// Sequential sweeps P_j <- P_j - alpha grad_j sum_i |q_i - f(u_i)|^2 over
/// j = 0..m-1, each update seeing the latest residuals, until err_interp <=
/// tau or max_iters sweeps. Three consecutive objective increases restore the
/// best iterate and halve alpha; alpha below 1e-8 throws OptimizationFailure.
OptimizeResult optimize_control_points(StencilFit& fit, std::span<const Vec2> cloud, double tau, double alpha,
                                       std::size_t max_iters);

/// Tolerances left unset are derived from the initial cloud when a run
/// starts (see resolve_defaults).
struct EvolutionConfig {
    double dt = 1e-3;
    double t_end = 0.1;
    std::optional<double> tau;     // default 1e-6 x initial diameter
    std::optional<double> eps_tol; // default 1e-2 x initial mean spacing
    double alpha = 0.5;
    std::size_t max_opt_iters = 50;
    std::size_t max_insertions = 8;
    bool refine = true;

    std::size_t core_size = 1;
    std::size_t boundary_size = 8;
    int degree = 7;

    bool resample = true;
    std::optional<double> d_tol_min; // default 0.75 x initial mean spacing
    std::optional<double> d_tol_max; // default 2 x initial mean spacing
    std::optional<double> eps_d;     // default 1e-2 x initial mean spacing

    VelocityField velocity;
    std::optional<RDParams> pde;

    /// Throws InvalidConfiguration on inconsistent values.
    void validate() const;
};

/// Fills every unset tolerance from the initial cloud.
EvolutionConfig resolve_defaults(EvolutionConfig cfg, const PointCloud& initial);

struct FrameFlags {
    bool refit = false;
    bool refined = false;
    bool optimized = false;
    bool resampled = false;
    bool redistribution_skipped = false;
    std::size_t removed = 0;
    std::size_t inserted = 0;
    std::size_t max_opt_iterations = 0;
    std::size_t fallback_refits = 0; // stencils re-interpolated after the sweeps stalled
};

struct FrameRecord {
    std::size_t step = 0;
    double time = 0.0;
    std::vector<Vec2> points;
    std::vector<double> curvature; // signed curvature kappa_s
    std::vector<Vec2> normal;
    std::optional<std::vector<double>> u;
    std::optional<std::vector<double>> v;
    FrameFlags flags;

    std::size_t point_count() const noexcept { return points.size(); }
};

/// Lagrangian time stepper: local fits, geometry at core points, co-evolution
/// of points and control points, optimisation on tolerance breach and point
/// management.
class Evolver {
public:
    Evolver(PointCloud initial, EvolutionConfig cfg);

    /// Advances by one dt. Throws on fatal numerical errors; the state is
    /// left at the last completed step.
    void step();

    /// Snapshot of the current state (computes geometry if needed).
    FrameRecord frame();

    bool finished() const;
    double time() const noexcept { return time_; }
    std::size_t step_index() const noexcept { return step_; }
    const PointCloud& cloud() const noexcept { return cloud_; }
    const EvolutionConfig& config() const noexcept { return cfg_; }
    const std::vector<StencilFit>& fits() const noexcept { return fits_; }
    const Cover& cover() const noexcept { return cover_; }
    const std::optional<FieldState>& fields() const noexcept { return fields_; }
    const FrameFlags& last_flags() const noexcept { return flags_; }
    /// Point count below which the run stops (4 x degree).
    std::size_t min_points() const noexcept;

    /// Per-point geometry of the current cloud.
    const std::vector<GeometrySample>& geometry();

private:
    void refit();
    void ensure_geometry();
    void resample_if_needed();
    std::vector<StencilFit> fit_all(std::span<const Vec2> points, bool refine, Cover& cover) const;

    EvolutionConfig cfg_;
    PointCloud cloud_;
    double time_ = 0.0;
    std::size_t step_ = 0;

    Cover cover_;
    std::vector<StencilFit> fits_;
    bool fits_valid_ = false;

    std::vector<GeometrySample> geometry_;
    bool geometry_valid_ = false;
    Orientation orientation_ = Orientation::CounterClockwise;

    std::optional<FieldState> fields_;
    FrameFlags flags_;
    bool pending_refit_ = false;
    bool pending_refined_ = false;
    bool floor_reached_ = false;
};

struct RunResult {
    std::vector<FrameRecord> frames;
    std::optional<Error> failure;
    std::size_t steps = 0;
};

/// Runs to t_end (or until the cloud falls below the viable size), recording
/// the initial frame, every `export_every`-th step and the final state. A
/// fatal error ends the run and is returned with the frames so far.
RunResult run(const PointCloud& initial, const EvolutionConfig& cfg, std::size_t export_every = 1);

} // namespace curvevo
