#pragma once

#include "llbar/config.hpp"
#include "llbar/fem.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace llbar {

struct StepRecord {
    int n = 0;
    double t = 0.0;
    double energy = 0.0;
    double h_l2 = 0.0;
    double h_h1semi = 0.0;
    double diss_residual = 0.0;
    int newton_iters = 0;
};

struct RunOutput {
    std::vector<StepRecord> records;  // step count + 1 rows; row 0 is t = 0

    // Coefficient histories, populated when requested: u_history has one
    // entry per record (starting at t = 0), h_history one entry per step.
    std::vector<std::vector<double>> u_history;
    std::vector<std::vector<double>> h_history;

    std::shared_ptr<const FeSpace> space;
    int max_newton_iters = 0;
};

struct RunOptions {
    bool record_fields = false;
    // Called after every step with (step, total_steps).
    std::function<void(int, int)> progress;
};

// Executes the configured scheme for floor(t_end / dt) steps, writing the CSV
// series and VTK snapshots when paths are configured. On a step failure the
// partial series is flushed before the error propagates.
RunOutput run_simulation(const Config& cfg, const RunOptions& opts = {});

// Same trajectory on a caller-supplied space; file outputs are skipped.
RunOutput run_on_space(const std::shared_ptr<const FeSpace>& space, const Config& cfg,
                       const RunOptions& opts = {});

struct ConvergencePair {
    int divisions = 0;   // coarse level of the pair; the error is u_h - u_{h/2}
    double h = 0.0;      // coarse mesh size
    double u_err_l2 = 0.0, u_err_h1 = 0.0, u_err_linf = 0.0;
    double h_err_l2 = 0.0, h_err_h1 = 0.0, h_err_linf = 0.0;
    // log2(previous error / this error); absent on the first pair and for
    // degenerate (zero) errors.
    std::optional<double> rate_u_l2, rate_u_h1, rate_u_linf;
    std::optional<double> rate_h_l2, rate_h_h1, rate_h_linf;
};

struct ConvergenceReport {
    std::vector<ConvergencePair> pairs;
};

// Nested-mesh self-convergence: runs every level in cfg.levels (each double
// the previous) at fixed dt, prolongs coarse solutions to the finer mesh of
// each adjacent pair and takes the max error over all recorded steps.
ConvergenceReport convergence_study(const Config& cfg, const RunOptions& opts = {});

struct EpsilonRecord {
    double epsilon = 0.0;
    double u_err_h1 = 0.0;     // max_t ||u_eps - u_0||_H1
    double h_err_l2l2 = 0.0;   // sqrt(k sum_n ||H_eps - H_0||_L2^2)
};

struct EpsilonReport {
    std::vector<EpsilonRecord> records;
    std::optional<double> h1_slope;  // least-squares slope of log err vs log eps
};

// Regularisation study: Bloch-Euler runs with lambda_e = eps against the
// lambda_e = 0 reference on the same mesh and step. Requires mu < 0 and a
// strictly decreasing epsilon list.
EpsilonReport epsilon_study(const Config& cfg, const RunOptions& opts = {});

void write_series_csv(const RunOutput& output, const std::string& path);
void write_convergence_csv(const ConvergenceReport& report, const std::string& path);
void write_epsilon_csv(const EpsilonReport& report, const std::string& path);

std::string series_csv_text(const RunOutput& output);
std::string convergence_csv_text(const ConvergenceReport& report);
std::string epsilon_csv_text(const EpsilonReport& report);

// Legacy ASCII unstructured-grid snapshot with point-data vectors "u" and
// "H"; 2d meshes only.
void write_snapshot_vtk(const FeSpace& space, const VectorField& u, const VectorField& H,
                        double time, const std::string& path);

} // namespace llbar
