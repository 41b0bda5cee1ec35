#include "llbar/errors.hpp"
#include "llbar/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

llbar::Config load_config(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw llbar::io_error("cannot open config file '" + config_path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    for (const auto& kv : overrides) {
        if (kv.find('=') == std::string::npos)
            throw llbar::config_error("override '" + kv + "': expected key=value");
        text += "\n" + kv;
    }
    return llbar::parse_config_text(text);
}

void check_solver_threads() {
    // Bounds assembly parallelism; the kernels in this build are serial, so
    // any positive value is accepted as an upper bound.
    const char* env = std::getenv("SOLVER_THREADS");
    if (env == nullptr)
        return;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
        throw llbar::config_error("SOLVER_THREADS must be a positive integer, got '" +
                                  std::string(env) + "'");
}

llbar::RunOptions progress_options(bool quiet) {
    llbar::RunOptions opts;
    if (!quiet)
        opts.progress = [](int n, int total) {
            if (n == total || n % 50 == 0)
                std::printf("  step %d/%d\n", n, total);
        };
    return opts;
}

int cmd_run(const llbar::Config& cfg, bool quiet) {
    const auto out = llbar::run_simulation(cfg, progress_options(quiet));
    if (!quiet) {
        const auto& last = out.records.back();
        std::printf("completed %d steps to t=%g\n", last.n, last.t);
        std::printf("energy: %.12g -> %.12g\n", out.records.front().energy, last.energy);
        std::printf("max newton iterations per step: %d\n", out.max_newton_iters);
        if (!cfg.csv_path.empty())
            std::printf("series written to %s\n", cfg.csv_path.c_str());
    }
    return 0;
}

int cmd_converge(const llbar::Config& cfg, bool quiet) {
    const auto report = llbar::convergence_study(cfg, progress_options(quiet));
    std::printf("%10s %12s %12s %12s %12s %8s %8s %8s\n", "divisions", "u_L2", "u_H1", "H_L2",
                "H_H1", "r(uL2)", "r(uH1)", "r(HL2)");
    for (const auto& p : report.pairs) {
        auto r = [](const std::optional<double>& v) {
            char buf[16];
            if (v)
                std::snprintf(buf, sizeof(buf), "%8.3f", *v);
            else
                std::snprintf(buf, sizeof(buf), "%8s", "-");
            return std::string(buf);
        };
        std::printf("%10d %12.5e %12.5e %12.5e %12.5e %s %s %s\n", p.divisions, p.u_err_l2,
                    p.u_err_h1, p.h_err_l2, p.h_err_h1, r(p.rate_u_l2).c_str(),
                    r(p.rate_u_h1).c_str(), r(p.rate_h_l2).c_str());
    }
    if (!cfg.csv_path.empty()) {
        llbar::write_convergence_csv(report, cfg.csv_path);
        if (!quiet)
            std::printf("report written to %s\n", cfg.csv_path.c_str());
    }
    return 0;
}

int cmd_epsilon(const llbar::Config& cfg, bool quiet) {
    const auto report = llbar::epsilon_study(cfg, progress_options(quiet));
    std::printf("%12s %14s %14s\n", "epsilon", "u_err_H1", "H_err_L2L2");
    for (const auto& r : report.records)
        std::printf("%12.4e %14.6e %14.6e\n", r.epsilon, r.u_err_h1, r.h_err_l2l2);
    if (report.h1_slope)
        std::printf("fitted H1 slope: %.4f\n", *report.h1_slope);
    else
        std::printf("fitted H1 slope: undefined\n");
    if (!cfg.csv_path.empty()) {
        llbar::write_epsilon_csv(report, cfg.csv_path);
        if (!quiet)
            std::printf("report written to %s\n", cfg.csv_path.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed FEM solver for the LLBar and regularised LLBloch equations"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool quiet = false;
    app.add_option("--config", config_path, "Path to a key = value config file");
    app.add_option("--override", overrides, "Extra key=value assignment (repeatable)");
    app.add_flag("--quiet", quiet, "Suppress progress output");

    auto* run = app.add_subcommand("run", "Run a single simulation");
    auto* converge = app.add_subcommand("converge", "Nested-mesh convergence study");
    auto* epsilon = app.add_subcommand("epsilon", "lambda_e -> 0 regularisation study");
    for (auto* sub : {run, converge, epsilon})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        check_solver_threads();
        const llbar::Config cfg = load_config(config_path, overrides);
        if (run->parsed())
            return cmd_run(cfg, quiet);
        if (converge->parsed())
            return cmd_converge(cfg, quiet);
        if (epsilon->parsed())
            return cmd_epsilon(cfg, quiet);
        return kExitConfig;
    } catch (const llbar::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const llbar::solver_error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolver;
    } catch (const llbar::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
