#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curvevo/cover.hpp"
#include "curvevo/error.hpp"
#include "curvevo/evolve.hpp"

namespace curvevo {

struct ShapeSpec {
    enum class Kind { Circle, Asterisk, File };

    Kind kind = Kind::Circle;
    double radius = 1.0;     // circle only
    std::size_t count = 200; // generated shapes only
    std::filesystem::path path;
};

/// Radius of the asterisk r = 1 + 0.3 cos^2(4 theta).
double asterisk_radius(double theta);

/// Counterclockwise samples uniformly spaced in the generating angle, or the
/// points of a file with one "x y" or "x,y" pair per line ('#' comments).
PointCloud generate_shape(const ShapeSpec& spec);

struct ScenarioConfig {
    ShapeSpec shape;
    EvolutionConfig evolve;
    std::uint64_t seed = 1;
    bool theta0_given = false;
    std::filesystem::path out_dir = "out";
    std::size_t export_every = 1;

    std::vector<std::size_t> converge_counts{30, 60, 120, 240};
    double converge_dt = 1e-3;
    double converge_t_end = 0.18;

    std::size_t study_count = 40;
    std::vector<std::size_t> study_sizes{5, 7, 9, 11, 13, 15, 20};
    std::vector<int> study_degrees; // empty: every p in [2, m - 1]
};

/// Parse failure with the offending line (0 when not tied to a line).
class ConfigError : public Error {
public:
    ConfigError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Flat `key = value` text with dotted sections, e.g. `evolve.dt = 1e-3`.
/// Blank lines and `#` comments are ignored; unknown keys are errors.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Deterministic Gaussian centre angle in [0, 2 pi) drawn from `seed`.
double draw_theta0(std::uint64_t seed);

/// Fills the seeded Gaussian centre (unless given explicitly) and the
/// coupled-velocity constants.
void finalize(ScenarioConfig& cfg);

double mean_radius(std::span<const Vec2> points);
/// Root mean square of |q_i - centroid| - exact_radius.
double l2_radius_error(std::span<const Vec2> points, double exact_radius);

struct FrameStats {
    std::size_t point_count = 0;
    double mean_radius = 0.0;
    double min_spacing = 0.0;
    double max_spacing = 0.0;
};
FrameStats frame_stats(std::span<const Vec2> points);

/// CSV with header step,time,index,x,y,kappa,nx,ny,u,v. Values round-trip
/// exactly (17 significant digits); u and v are empty without fields.
void write_frame_csv(std::ostream& out, const FrameRecord& frame);
std::vector<Vec2> read_frame_points(std::istream& in);

struct SimulateOutcome {
    int exit_code = 0;
    std::size_t frames_written = 0;
    std::optional<std::size_t> last_good_frame;
    FrameStats final_stats;
    std::string message;
};

/// Runs the scenario and writes frame_<step>.csv files plus summary.txt.
SimulateOutcome simulate(const ScenarioConfig& cfg);

struct ConvergeRow {
    std::size_t count = 0;
    double spacing = 0.0;
    double l2_error = 0.0;
    double mean_radius = 0.0;
    double seconds = 0.0;
};

/// Shrinking-circle study with resampling disabled. Throws
/// InvalidConfiguration for non-circle shapes.
std::vector<ConvergeRow> converge(const ScenarioConfig& cfg);
void write_converge_csv(std::ostream& out, const std::vector<ConvergeRow>& rows);

struct StudyRow {
    std::size_t stencil_size = 0;
    int degree = 0;
    int degree_used = 0;
    double normal_error = 0.0;
    double curvature_error = 0.0;
};

/// Max-norm normal and curvature errors on a static circle of `count` points
/// for one stencil size and degree. Odd sizes use one core point, even sizes
/// two.
StudyRow circle_geometry_error(std::size_t count, double radius, std::size_t stencil_size, int degree);
std::vector<StudyRow> param_study(const ScenarioConfig& cfg);
void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);

} // namespace curvevo
