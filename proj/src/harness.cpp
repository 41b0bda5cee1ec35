#include "llbar/harness.hpp"

#include "llbar/errors.hpp"
#include "llbar/schemes.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace llbar {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int step_count(const Config& cfg) {
    return static_cast<int>(std::floor(cfg.t_end / cfg.dt + 1e-9));
}

VectorField build_initial_field(const std::shared_ptr<const FeSpace>& space, const Config& cfg) {
    if (cfg.initial == InitialKind::zero)
        return VectorField(space);
    const VectorFn f = initial_data_fn(cfg);
    if (cfg.initial_projection == InitialProjection::nodal)
        return interpolate_nodal(space, f);
    return ritz_project(space, f, initial_data_grad(cfg), cfg.linear_tol, cfg.linear_max_iter);
}

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw io_error("write failed for '" + path + "'");
}

std::string snapshot_path(const std::string& dir, int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snapshot_%06d.vtk", step);
    return (std::filesystem::path(dir) / buf).string();
}

} // namespace

RunOutput run_on_space(const std::shared_ptr<const FeSpace>& space, const Config& cfg,
                       const RunOptions& opts) {
    const int steps = step_count(cfg);
    TimeStepper stepper(space, cfg.physics, cfg.scheme_config());
    stepper.initialize(build_initial_field(space, cfg));

    RunOutput out;
    out.space = space;
    out.records.reserve(steps + 1);
    out.records.push_back({0, 0.0, stepper.state().energy_curr, 0.0, 0.0, 0.0, 0});
    if (opts.record_fields)
        out.u_history.push_back(stepper.state().u_curr.coeffs);

    for (int n = 1; n <= steps; ++n) {
        const auto info = stepper.step();
        out.records.push_back({n, stepper.state().t, info.energy, info.h_l2, info.h_h1semi,
                               info.diss_residual, info.newton_iters});
        out.max_newton_iters = std::max(out.max_newton_iters, info.newton_iters);
        if (opts.record_fields) {
            out.u_history.push_back(stepper.state().u_curr.coeffs);
            out.h_history.push_back(stepper.state().h_last.coeffs);
        }
        if (opts.progress)
            opts.progress(n, steps);
    }
    return out;
}

RunOutput run_simulation(const Config& cfg, const RunOptions& opts) {
    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(cfg.dim, cfg.divisions));
    auto space = std::make_shared<const FeSpace>(mesh);

    const int steps = step_count(cfg);
    const bool snapshots = !cfg.vtk_dir.empty() && cfg.snapshot_every > 0;
    if (snapshots && cfg.dim != 2)
        throw config_error("vtk snapshots require dim = 2");
    if (snapshots)
        std::filesystem::create_directories(cfg.vtk_dir);

    TimeStepper stepper(space, cfg.physics, cfg.scheme_config());
    stepper.initialize(build_initial_field(space, cfg));

    RunOutput out;
    out.space = space;
    out.records.push_back({0, 0.0, stepper.state().energy_curr, 0.0, 0.0, 0.0, 0});
    if (opts.record_fields)
        out.u_history.push_back(stepper.state().u_curr.coeffs);
    if (snapshots)
        write_snapshot_vtk(*space, stepper.state().u_curr, stepper.state().h_last, 0.0,
                           snapshot_path(cfg.vtk_dir, 0));

    try {
        for (int n = 1; n <= steps; ++n) {
            const auto info = stepper.step();
            out.records.push_back({n, stepper.state().t, info.energy, info.h_l2, info.h_h1semi,
                                   info.diss_residual, info.newton_iters});
            out.max_newton_iters = std::max(out.max_newton_iters, info.newton_iters);
            if (opts.record_fields) {
                out.u_history.push_back(stepper.state().u_curr.coeffs);
                out.h_history.push_back(stepper.state().h_last.coeffs);
            }
            if (snapshots && n % cfg.snapshot_every == 0)
                write_snapshot_vtk(*space, stepper.state().u_curr, stepper.state().h_last,
                                   stepper.state().t, snapshot_path(cfg.vtk_dir, n));
            if (opts.progress)
                opts.progress(n, steps);
        }
    } catch (...) {
        // Flush whatever was computed before surfacing the failure.
        if (!cfg.csv_path.empty())
            write_series_csv(out, cfg.csv_path);
        throw;
    }

    if (!cfg.csv_path.empty())
        write_series_csv(out, cfg.csv_path);
    return out;
}

namespace {

struct LevelData {
    std::shared_ptr<const FeSpace> space;
    RunOutput run;
};

// max over records of the requested norms of (fine - prolonged coarse).
struct MaxErrors {
    double l2 = 0.0, h1 = 0.0, linf = 0.0;
};

MaxErrors pair_errors(const LevelData& coarse, const LevelData& fine,
                      const std::vector<std::vector<double>>& coarse_hist,
                      const std::vector<std::vector<double>>& fine_hist) {
    MaxErrors m;
    VectorField cf(coarse.space);
    VectorField diff(fine.space);
    for (std::size_t r = 0; r < coarse_hist.size(); ++r) {
        cf.coeffs = coarse_hist[r];
        VectorField pro = prolong(cf, fine.space);
        for (std::size_t i = 0; i < diff.coeffs.size(); ++i)
            diff.coeffs[i] = pro.coeffs[i] - fine_hist[r][i];
        m.l2 = std::max(m.l2, norm(*fine.space, diff, NormKind::L2));
        m.h1 = std::max(m.h1, norm(*fine.space, diff, NormKind::H1));
        m.linf = std::max(m.linf, norm(*fine.space, diff, NormKind::Linf));
    }
    return m;
}

std::optional<double> rate_between(double coarse_err, double fine_err) {
    if (coarse_err <= 0.0 || fine_err <= 0.0 || !std::isfinite(coarse_err) ||
        !std::isfinite(fine_err))
        return std::nullopt;
    return std::log2(coarse_err / fine_err);
}

} // namespace

ConvergenceReport convergence_study(const Config& cfg, const RunOptions& opts) {
    if (cfg.levels.size() < 2)
        throw config_error("convergence_study: need at least two levels");
    for (std::size_t i = 0; i + 1 < cfg.levels.size(); ++i)
        if (cfg.levels[i + 1] != 2 * cfg.levels[i])
            throw config_error("convergence_study: levels must double (" +
                               std::to_string(cfg.levels[i]) + " -> " +
                               std::to_string(cfg.levels[i + 1]) + ")");

    ConvergenceReport report;
    RunOptions level_opts;
    level_opts.record_fields = true;
    level_opts.progress = opts.progress;

    LevelData prev;
    for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
        Config level_cfg = cfg;
        level_cfg.divisions = cfg.levels[li];
        auto mesh =
            std::make_shared<const Mesh>(build_structured_mesh(cfg.dim, level_cfg.divisions));
        LevelData cur;
        cur.space = std::make_shared<const FeSpace>(mesh);
        cur.run = run_on_space(cur.space, level_cfg, level_opts);

        if (li > 0) {
            ConvergencePair pair;
            pair.divisions = cfg.levels[li - 1];
            pair.h = prev.space->mesh().h;
            const MaxErrors ue = pair_errors(prev, cur, prev.run.u_history, cur.run.u_history);
            const MaxErrors he = pair_errors(prev, cur, prev.run.h_history, cur.run.h_history);
            pair.u_err_l2 = ue.l2;
            pair.u_err_h1 = ue.h1;
            pair.u_err_linf = ue.linf;
            pair.h_err_l2 = he.l2;
            pair.h_err_h1 = he.h1;
            pair.h_err_linf = he.linf;
            if (!report.pairs.empty()) {
                const ConvergencePair& p = report.pairs.back();
                pair.rate_u_l2 = rate_between(p.u_err_l2, ue.l2);
                pair.rate_u_h1 = rate_between(p.u_err_h1, ue.h1);
                pair.rate_u_linf = rate_between(p.u_err_linf, ue.linf);
                pair.rate_h_l2 = rate_between(p.h_err_l2, he.l2);
                pair.rate_h_h1 = rate_between(p.h_err_h1, he.h1);
                pair.rate_h_linf = rate_between(p.h_err_linf, he.linf);
            }
            report.pairs.push_back(pair);
        }
        prev = std::move(cur);
    }
    return report;
}

EpsilonReport epsilon_study(const Config& cfg, const RunOptions& opts) {
    if (!(cfg.physics.mu < 0.0))
        throw config_error("epsilon_study: requires mu < 0");
    if (cfg.epsilons.empty())
        throw config_error("epsilon_study: epsilon list is empty");
    for (std::size_t i = 0; i + 1 < cfg.epsilons.size(); ++i)
        if (!(cfg.epsilons[i + 1] < cfg.epsilons[i]))
            throw config_error("epsilon_study: epsilons must be strictly decreasing");

    auto mesh = std::make_shared<const Mesh>(build_structured_mesh(cfg.dim, cfg.divisions));
    auto space = std::make_shared<const FeSpace>(mesh);

    RunOptions run_opts;
    run_opts.record_fields = true;
    run_opts.progress = opts.progress;

    // The lambda_e = 0 reference; the Bloch variant keeps the kappa mu term
    // implicit so the discrete system stays dissipative and uniquely solvable.
    Config ref_cfg = cfg;
    ref_cfg.scheme = SchemeKind::euler_bloch;
    ref_cfg.physics.lambda_e = 0.0;
    const RunOutput ref = run_on_space(space, ref_cfg, run_opts);

    EpsilonReport report;
    VectorField diff(space);
    for (const double eps : cfg.epsilons) {
        Config run_cfg = ref_cfg;
        run_cfg.physics.lambda_e = eps;
        const RunOutput run = run_on_space(space, run_cfg, run_opts);

        EpsilonRecord rec;
        rec.epsilon = eps;
        for (std::size_t r = 0; r < run.u_history.size(); ++r) {
            for (std::size_t i = 0; i < diff.coeffs.size(); ++i)
                diff.coeffs[i] = run.u_history[r][i] - ref.u_history[r][i];
            rec.u_err_h1 = std::max(rec.u_err_h1, norm(*space, diff, NormKind::H1));
        }
        double acc = 0.0;
        for (std::size_t r = 0; r < run.h_history.size(); ++r) {
            for (std::size_t i = 0; i < diff.coeffs.size(); ++i)
                diff.coeffs[i] = run.h_history[r][i] - ref.h_history[r][i];
            const double l2 = norm(*space, diff, NormKind::L2);
            acc += l2 * l2;
        }
        rec.h_err_l2l2 = std::sqrt(cfg.dt * acc);
        report.records.push_back(rec);
    }

    // Least-squares slope of log(err) against log(eps).
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (const auto& rec : report.records) {
        if (rec.u_err_h1 <= 0.0)
            continue;
        const double lx = std::log(rec.epsilon);
        const double ly = std::log(rec.u_err_h1);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count >= 2) {
        const double denom = count * sxx - sx * sx;
        if (denom != 0.0)
            report.h1_slope = (count * sxy - sx * sy) / denom;
    }
    return report;
}

std::string series_csv_text(const RunOutput& output) {
    std::ostringstream out;
    out << "step,time,energy,H_l2,H_h1semi,dissipation_residual,newton_iters\n";
    for (const auto& r : output.records)
        out << r.n << "," << fmt(r.t) << "," << fmt(r.energy) << "," << fmt(r.h_l2) << ","
            << fmt(r.h_h1semi) << "," << fmt(r.diss_residual) << "," << r.newton_iters << "\n";
    return out.str();
}

std::string convergence_csv_text(const ConvergenceReport& report) {
    std::ostringstream out;
    out << "divisions,h,u_l2,u_h1,u_linf,H_l2,H_h1,H_linf,"
           "rate_u_l2,rate_u_h1,rate_u_linf,rate_H_l2,rate_H_h1,rate_H_linf\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& p : report.pairs)
        out << p.divisions << "," << fmt(p.h) << "," << fmt(p.u_err_l2) << "," << fmt(p.u_err_h1)
            << "," << fmt(p.u_err_linf) << "," << fmt(p.h_err_l2) << "," << fmt(p.h_err_h1) << ","
            << fmt(p.h_err_linf) << "," << opt(p.rate_u_l2) << "," << opt(p.rate_u_h1) << ","
            << opt(p.rate_u_linf) << "," << opt(p.rate_h_l2) << "," << opt(p.rate_h_h1) << ","
            << opt(p.rate_h_linf) << "\n";
    return out.str();
}

std::string epsilon_csv_text(const EpsilonReport& report) {
    std::ostringstream out;
    out << "epsilon,u_err_h1,H_err_l2l2\n";
    for (const auto& r : report.records)
        out << fmt(r.epsilon) << "," << fmt(r.u_err_h1) << "," << fmt(r.h_err_l2l2) << "\n";
    return out.str();
}

void write_series_csv(const RunOutput& output, const std::string& path) {
    write_text_file(series_csv_text(output), path);
}

void write_convergence_csv(const ConvergenceReport& report, const std::string& path) {
    write_text_file(convergence_csv_text(report), path);
}

void write_epsilon_csv(const EpsilonReport& report, const std::string& path) {
    write_text_file(epsilon_csv_text(report), path);
}

void write_snapshot_vtk(const FeSpace& space, const VectorField& u, const VectorField& H,
                        double time, const std::string& path) {
    const Mesh& mesh = space.mesh();
    if (mesh.dim != 2)
        throw config_error("write_snapshot_vtk: 2d meshes only");

    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n";
    out << "spin and effective field at t=" << fmt(time) << "\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_nodes() << " double\n";
    for (const auto& p : mesh.nodes)
        out << fmt(p[0]) << " " << fmt(p[1]) << " 0\n";
    out << "CELLS " << mesh.n_elements() << " " << 4 * mesh.n_elements() << "\n";
    for (const auto& el : mesh.elements)
        out << "3 " << el[0] << " " << el[1] << " " << el[2] << "\n";
    out << "CELL_TYPES " << mesh.n_elements() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e)
        out << "5\n";
    out << "POINT_DATA " << mesh.n_nodes() << "\n";
    out << "VECTORS u double\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Vec3 v = u.node_value(i);
        out << fmt(v[0]) << " " << fmt(v[1]) << " " << fmt(v[2]) << "\n";
    }
    out << "VECTORS H double\n";
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Vec3 v = H.node_value(i);
        out << fmt(v[0]) << " " << fmt(v[1]) << " " << fmt(v[2]) << "\n";
    }
    write_text_file(out.str(), path);
}

} // namespace llbar
