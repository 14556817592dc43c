#include "curvevo/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "curvevo/diffgeo.hpp"
#include "curvevo/fit.hpp"

namespace curvevo {

double asterisk_radius(double theta) {
    const double c = std::cos(4.0 * theta);
    return 1.0 + 0.3 * c * c;
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<Vec2> load_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::InvalidConfiguration, "cannot open shape file " + path.string());
    }
    std::vector<Vec2> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Vec2 p;
        if (!(ls >> p.x >> p.y)) {
            throw Error(ErrorKind::InvalidConfiguration,
                        path.string() + ":" + std::to_string(lineno) + ": expected two coordinates");
        }
        pts.push_back(p);
    }
    return pts;
}

} // namespace

PointCloud generate_shape(const ShapeSpec& spec) {
    std::vector<Vec2> pts;
    switch (spec.kind) {
    case ShapeSpec::Kind::Circle:
    case ShapeSpec::Kind::Asterisk: {
        if (spec.count < PointCloud::kMinPoints) {
            throw Error(ErrorKind::InvalidConfiguration, "shape needs at least 4 points");
        }
        if (spec.kind == ShapeSpec::Kind::Circle && !(spec.radius > 0.0)) {
            throw Error(ErrorKind::InvalidConfiguration, "circle radius must be positive");
        }
        pts.reserve(spec.count);
        for (std::size_t i = 0; i < spec.count; ++i) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(spec.count);
            const double r = spec.kind == ShapeSpec::Kind::Circle ? spec.radius : asterisk_radius(theta);
            pts.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
        break;
    }
    case ShapeSpec::Kind::File:
        pts = load_points(spec.path);
        break;
    }
    PointCloud pc(std::move(pts));
    if (pc.signed_area() < 0.0) {
        std::vector<Vec2> rev(pc.points().rbegin(), pc.points().rend());
        return PointCloud(std::move(rev));
    }
    return pc;
}

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : Error(ErrorKind::InvalidConfiguration, line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

double parse_double(const std::string& v, std::size_t line) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
    return out;
}

std::uint64_t parse_unsigned(const std::string& v, std::size_t line) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(line, "expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& v, std::size_t line, F&& item) {
    std::vector<T> out;
    std::string tok;
    std::istringstream ss(v);
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) {
            throw ConfigError(line, "empty list entry");
        }
        out.push_back(static_cast<T>(item(tok, line)));
    }
    if (out.empty()) {
        throw ConfigError(line, "empty list");
    }
    return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, std::size_t)>;

template <class Member>
Setter real(Member member) {
    return [member](ScenarioConfig& c, const std::string& v, std::size_t l) { member(c) = parse_double(v, l); };
}
template <class Member>
Setter count(Member member) {
    return [member](ScenarioConfig& c, const std::string& v, std::size_t l) {
        member(c) = static_cast<std::size_t>(parse_unsigned(v, l));
    };
}
template <class Member>
Setter flag(Member member) {
    return [member](ScenarioConfig& c, const std::string& v, std::size_t l) { member(c) = parse_bool(v, l); };
}
template <class Member>
Setter pde_real(Member member) {
    return [member](ScenarioConfig& c, const std::string& v, std::size_t l) {
        if (!c.evolve.pde) c.evolve.pde.emplace();
        member(*c.evolve.pde) = parse_double(v, l);
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"shape",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             if (v == "circle") c.shape.kind = ShapeSpec::Kind::Circle;
             else if (v == "asterisk") c.shape.kind = ShapeSpec::Kind::Asterisk;
             else if (v == "file") c.shape.kind = ShapeSpec::Kind::File;
             else throw ConfigError(l, "unknown shape '" + v + "'");
         }},
        {"shape.radius", real([](ScenarioConfig& c) -> double& { return c.shape.radius; })},
        {"shape.N", count([](ScenarioConfig& c) -> std::size_t& { return c.shape.count; })},
        {"shape.path", [](ScenarioConfig& c, const std::string& v, std::size_t) { c.shape.path = v; }},

        {"evolve.dt", real([](ScenarioConfig& c) -> double& { return c.evolve.dt; })},
        {"evolve.t_end", real([](ScenarioConfig& c) -> double& { return c.evolve.t_end; })},
        {"evolve.tau", real([](ScenarioConfig& c) -> double& { return c.evolve.tau.emplace(); })},
        {"evolve.eps_tol", real([](ScenarioConfig& c) -> double& { return c.evolve.eps_tol.emplace(); })},
        {"evolve.alpha", real([](ScenarioConfig& c) -> double& { return c.evolve.alpha; })},
        {"evolve.max_opt_iters", count([](ScenarioConfig& c) -> std::size_t& { return c.evolve.max_opt_iters; })},
        {"evolve.max_insertions", count([](ScenarioConfig& c) -> std::size_t& { return c.evolve.max_insertions; })},
        {"evolve.refine", flag([](ScenarioConfig& c) -> bool& { return c.evolve.refine; })},
        {"evolve.core_size", count([](ScenarioConfig& c) -> std::size_t& { return c.evolve.core_size; })},
        {"evolve.boundary_size", count([](ScenarioConfig& c) -> std::size_t& { return c.evolve.boundary_size; })},
        {"evolve.degree",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             c.evolve.degree = static_cast<int>(parse_unsigned(v, l));
         }},
        {"evolve.resample", flag([](ScenarioConfig& c) -> bool& { return c.evolve.resample; })},
        {"evolve.d_tol_min", real([](ScenarioConfig& c) -> double& { return c.evolve.d_tol_min.emplace(); })},
        {"evolve.d_tol_max", real([](ScenarioConfig& c) -> double& { return c.evolve.d_tol_max.emplace(); })},
        {"evolve.eps_d", real([](ScenarioConfig& c) -> double& { return c.evolve.eps_d.emplace(); })},

        {"velocity",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             if (v == "curvature_flow") c.evolve.velocity.kind = VelocityField::Kind::CurvatureFlow;
             else if (v == "coupled_rd") c.evolve.velocity.kind = VelocityField::Kind::CoupledRD;
             else if (v == "constant") c.evolve.velocity.kind = VelocityField::Kind::Constant;
             else throw ConfigError(l, "unknown velocity '" + v + "'");
         }},
        {"velocity.sign", real([](ScenarioConfig& c) -> double& { return c.evolve.velocity.sign; })},
        {"velocity.x", real([](ScenarioConfig& c) -> double& { return c.evolve.velocity.constant.x; })},
        {"velocity.y", real([](ScenarioConfig& c) -> double& { return c.evolve.velocity.constant.y; })},

        {"pde.enabled",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             if (parse_bool(v, l)) {
                 if (!c.evolve.pde) c.evolve.pde.emplace();
             } else {
                 c.evolve.pde.reset();
             }
         }},
        {"pde.D_u", pde_real([](RDParams& p) -> double& { return p.D_u; })},
        {"pde.D_v", pde_real([](RDParams& p) -> double& { return p.D_v; })},
        {"pde.gamma", pde_real([](RDParams& p) -> double& { return p.gamma; })},
        {"pde.c", pde_real([](RDParams& p) -> double& { return p.react_c; })},
        {"pde.d", pde_real([](RDParams& p) -> double& { return p.react_d; })},
        {"pde.sigma", pde_real([](RDParams& p) -> double& { return p.sigma; })},
        {"pde.c1", pde_real([](RDParams& p) -> double& { return p.c1; })},
        {"pde.c2", pde_real([](RDParams& p) -> double& { return p.c2; })},
        {"pde.theta0",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             if (!c.evolve.pde) c.evolve.pde.emplace();
             c.evolve.pde->theta0 = parse_double(v, l);
             c.theta0_given = true;
         }},

        {"output.dir", [](ScenarioConfig& c, const std::string& v, std::size_t) { c.out_dir = v; }},
        {"output.export_every", count([](ScenarioConfig& c) -> std::size_t& { return c.export_every; })},
        {"seed", [](ScenarioConfig& c, const std::string& v, std::size_t l) { c.seed = parse_unsigned(v, l); }},

        {"converge.N",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             c.converge_counts = parse_list<std::size_t>(v, l, parse_unsigned);
         }},
        {"converge.dt", real([](ScenarioConfig& c) -> double& { return c.converge_dt; })},
        {"converge.t_end", real([](ScenarioConfig& c) -> double& { return c.converge_t_end; })},

        {"param_study.N", count([](ScenarioConfig& c) -> std::size_t& { return c.study_count; })},
        {"param_study.m",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             c.study_sizes = parse_list<std::size_t>(v, l, parse_unsigned);
         }},
        {"param_study.p",
         [](ScenarioConfig& c, const std::string& v, std::size_t l) {
             c.study_degrees = parse_list<int>(v, l, parse_unsigned);
         }},
    };
    return table;
}

} // namespace

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string raw;
    std::size_t lineno = 0;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(lineno, "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(lineno, "expected 'key = value'");
        }
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError(lineno, "unknown key '" + key + "'");
        }
        if (const auto prev = seen.find(key); prev != seen.end()) {
            throw ConfigError(lineno, "duplicate key '" + key + "' (first on line " +
                                          std::to_string(prev->second) + ")");
        }
        seen.emplace(key, lineno);
        it->second(cfg, value, lineno);
    }
    if (cfg.shape.kind == ShapeSpec::Kind::File && cfg.shape.path.empty()) {
        throw ConfigError(0, "shape = file requires shape.path");
    }
    if (cfg.export_every == 0) {
        throw ConfigError(0, "output.export_every must be at least 1");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(0, "cannot read " + path.string());
    }
    ScenarioConfig cfg = parse_config(in);
    if (cfg.shape.kind == ShapeSpec::Kind::File && cfg.shape.path.is_relative()) {
        cfg.shape.path = path.parent_path() / cfg.shape.path;
    }
    return cfg;
}

double draw_theta0(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    // Built from raw bits so the value does not depend on the library's
    // distribution implementation.
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return 2.0 * std::numbers::pi * unit;
}

void finalize(ScenarioConfig& cfg) {
    if (cfg.evolve.pde) {
        if (!cfg.theta0_given) {
            cfg.evolve.pde->theta0 = draw_theta0(cfg.seed);
        }
        cfg.evolve.velocity.c1 = cfg.evolve.pde->c1;
        cfg.evolve.velocity.c2 = cfg.evolve.pde->c2;
    }
}

namespace {

Vec2 centroid_of(std::span<const Vec2> points) {
    Vec2 c;
    for (const Vec2& p : points) {
        c += p;
    }
    return (1.0 / static_cast<double>(points.size())) * c;
}

} // namespace

double mean_radius(std::span<const Vec2> points) {
    const Vec2 c = centroid_of(points);
    double sum = 0.0;
    for (const Vec2& p : points) {
        sum += distance(p, c);
    }
    return sum / static_cast<double>(points.size());
}

double l2_radius_error(std::span<const Vec2> points, double exact_radius) {
    const Vec2 c = centroid_of(points);
    double sum = 0.0;
    for (const Vec2& p : points) {
        const double e = distance(p, c) - exact_radius;
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(points.size()));
}

FrameStats frame_stats(std::span<const Vec2> points) {
    FrameStats s;
    s.point_count = points.size();
    if (points.empty()) {
        return s;
    }
    s.mean_radius = mean_radius(points);
    s.min_spacing = distance(points.back(), points.front());
    s.max_spacing = s.min_spacing;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double d = distance(points[i], points[i + 1]);
        s.min_spacing = std::min(s.min_spacing, d);
        s.max_spacing = std::max(s.max_spacing, d);
    }
    return s;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_frame_csv(std::ostream& out, const FrameRecord& frame) {
    out << "step,time,index,x,y,kappa,nx,ny,u,v\n";
    const std::string step = std::to_string(frame.step);
    const std::string time = num(frame.time);
    for (std::size_t i = 0; i < frame.points.size(); ++i) {
        out << step << ',' << time << ',' << i << ',' << num(frame.points[i].x) << ',' << num(frame.points[i].y)
            << ',' << num(frame.curvature[i]) << ',' << num(frame.normal[i].x) << ',' << num(frame.normal[i].y)
            << ',';
        if (frame.u) out << num((*frame.u)[i]);
        out << ',';
        if (frame.v) out << num((*frame.v)[i]);
        out << '\n';
    }
}

std::vector<Vec2> read_frame_points(std::istream& in) {
    std::string line;
    std::getline(in, line); // header
    std::vector<Vec2> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 5) {
            throw Error(ErrorKind::InvalidConfiguration, "malformed frame row: " + line);
        }
        pts.push_back({parse_double(cells[3], 0), parse_double(cells[4], 0)});
    }
    return pts;
}

namespace {

std::string shape_name(ShapeSpec::Kind k) {
    switch (k) {
    case ShapeSpec::Kind::Circle: return "circle";
    case ShapeSpec::Kind::Asterisk: return "asterisk";
    case ShapeSpec::Kind::File: return "file";
    }
    return "unknown";
}

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%08zu.csv", step);
    return dir / buf;
}

} // namespace

SimulateOutcome simulate(const ScenarioConfig& cfg_in) {
    ScenarioConfig cfg = cfg_in;
    finalize(cfg);
    const PointCloud initial = generate_shape(cfg.shape);

    std::filesystem::create_directories(cfg.out_dir);
    const RunResult result = run(initial, cfg.evolve, cfg.export_every);

    SimulateOutcome out;
    for (const FrameRecord& f : result.frames) {
        std::ofstream file(frame_path(cfg.out_dir, f.step), std::ios::trunc);
        write_frame_csv(file, f);
        if (!file) {
            throw Error(ErrorKind::InvalidConfiguration, "failed to write " + frame_path(cfg.out_dir, f.step).string());
        }
        ++out.frames_written;
    }
    const FrameRecord& last = result.frames.back();
    out.final_stats = frame_stats(last.points);
    out.last_good_frame = last.step;

    std::ofstream s(cfg.out_dir / "summary.txt", std::ios::trunc);
    s << "status: " << (result.failure ? "failed" : "ok") << '\n';
    s << "seed: " << cfg.seed << '\n';
    s << "shape: " << shape_name(cfg.shape.kind) << '\n';
    s << "initial_points: " << initial.size() << '\n';
    s << "dt: " << num(cfg.evolve.dt) << '\n';
    s << "t_end: " << num(cfg.evolve.t_end) << '\n';
    s << "resample: " << (cfg.evolve.resample ? "on" : "off") << '\n';
    if (cfg.evolve.pde) {
        s << "theta0: " << num(cfg.evolve.pde->theta0) << '\n';
    }
    s << "steps: " << result.steps << '\n';
    s << "frames: " << result.frames.size() << '\n';
    s << "final_step: " << last.step << '\n';
    s << "final_time: " << num(last.time) << '\n';
    s << "final_point_count: " << out.final_stats.point_count << '\n';
    s << "final_mean_radius: " << num(out.final_stats.mean_radius) << '\n';
    s << "min_spacing: " << num(out.final_stats.min_spacing) << '\n';
    s << "max_spacing: " << num(out.final_stats.max_spacing) << '\n';
    if (result.failure) {
        s << "last_good_frame: " << last.step << '\n';
        s << "error: " << result.failure->what() << '\n';
        out.exit_code = 3;
        out.message = result.failure->what();
    }
    return out;
}

std::vector<ConvergeRow> converge(const ScenarioConfig& cfg) {
    if (cfg.shape.kind != ShapeSpec::Kind::Circle) {
        throw Error(ErrorKind::InvalidConfiguration, "converge requires the circle shape");
    }
    const double r0 = cfg.shape.radius;
    if (!(2.0 * cfg.converge_t_end < r0 * r0)) {
        throw Error(ErrorKind::InvalidConfiguration, "converge.t_end is past the circle's extinction time");
    }
    std::vector<ConvergeRow> rows;
    for (const std::size_t n : cfg.converge_counts) {
        ShapeSpec shape = cfg.shape;
        shape.count = n;
        EvolutionConfig ec = cfg.evolve;
        ec.velocity = VelocityField{};
        ec.pde.reset();
        ec.dt = cfg.converge_dt;
        ec.t_end = cfg.converge_t_end;
        ec.resample = false;

        const auto start = std::chrono::steady_clock::now();
        Evolver ev(generate_shape(shape), ec);
        while (!ev.finished()) {
            ev.step();
        }
        ConvergeRow row;
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.count = n;
        row.spacing = 2.0 * std::numbers::pi * r0 / static_cast<double>(n);
        const double exact = std::sqrt(r0 * r0 - 2.0 * ev.time());
        row.l2_error = l2_radius_error(ev.cloud().points(), exact);
        row.mean_radius = mean_radius(ev.cloud().points());
        rows.push_back(row);
    }
    return rows;
}

void write_converge_csv(std::ostream& out, const std::vector<ConvergeRow>& rows) {
    out << "N,h,l2_error,mean_radius,seconds\n";
    for (const ConvergeRow& r : rows) {
        out << r.count << ',' << num(r.spacing) << ',' << num(r.l2_error) << ',' << num(r.mean_radius) << ','
            << num(r.seconds) << '\n';
    }
}

StudyRow circle_geometry_error(std::size_t count, double radius, std::size_t stencil_size, int degree) {
    ShapeSpec shape;
    shape.radius = radius;
    shape.count = count;
    const PointCloud pc = generate_shape(shape);
    const std::size_t core = stencil_size % 2 == 1 ? 1 : 2;
    const Cover cover = partition(pc.size(), core, stencil_size - core);

    StudyRow row;
    row.stencil_size = stencil_size;
    row.degree = degree;
    row.degree_used = degree;
    for (const Stencil& s : cover.stencils) {
        const StencilFit fit = fit_stencil(pc.points(), s, degree, 0.0, 0);
        row.degree_used = std::min(row.degree_used, fit.curve.degree());
        const CurveDerivatives d(fit.curve);
        for (std::size_t r = 0; r < s.core_size; ++r) {
            const std::size_t pos = s.core_offset() + r;
            const GeometrySample g = geometry_from_jet(d.jet(fit.params[pos]), Orientation::CounterClockwise);
            const Vec2 q = pc[s.point(pos)];
            const Vec2 exact_normal = (1.0 / norm(q)) * q;
            row.normal_error = std::max(row.normal_error, distance(g.normal, exact_normal));
            row.curvature_error = std::max(row.curvature_error, std::abs(g.signed_curvature - 1.0 / radius));
        }
    }
    return row;
}

std::vector<StudyRow> param_study(const ScenarioConfig& cfg) {
    if (cfg.shape.kind != ShapeSpec::Kind::Circle) {
        throw Error(ErrorKind::InvalidConfiguration, "param-study requires the circle shape");
    }
    std::vector<StudyRow> rows;
    for (const std::size_t m : cfg.study_sizes) {
        if (m < 3 || m > cfg.study_count) {
            throw Error(ErrorKind::InvalidConfiguration, "stencil size " + std::to_string(m) + " out of range");
        }
        std::vector<int> degrees = cfg.study_degrees;
        if (degrees.empty()) {
            for (int p = 2; p <= static_cast<int>(m) - 1; ++p) degrees.push_back(p);
        }
        for (const int p : degrees) {
            if (p < 2 || p > static_cast<int>(m) - 1) {
                continue;
            }
            rows.push_back(circle_geometry_error(cfg.study_count, cfg.shape.radius, m, p));
        }
    }
    return rows;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
    out << "m,p,p_used,normal_error,curvature_error\n";
    for (const StudyRow& r : rows) {
        out << r.stencil_size << ',' << r.degree << ',' << r.degree_used << ',' << num(r.normal_error) << ','
            << num(r.curvature_error) << '\n';
    }
}

} // namespace curvevo
