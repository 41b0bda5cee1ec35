#pragma once

#include "llbar/fem.hpp"
#include "llbar/model.hpp"
#include "llbar/sparse.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace llbar {

enum class SchemeKind { euler, euler_bloch, cn };

struct SchemeConfig {
    double k = 0.0;  // time step
    SchemeKind scheme = SchemeKind::euler;
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    double linear_tol = 1e-12;
    int linear_max_iter = 20000;
    int first_step_substeps = 1;   // substepping of the dedicated CN start
    bool cn_first_beta = true;     // keep the anisotropy term in the CN first step

    void validate() const;
};

struct StepperState {
    int n = 0;
    double t = 0.0;
    VectorField u_curr;
    std::optional<VectorField> u_prev;  // u^{n-1}, kept for the CN two-step update
    VectorField h_last;                 // H^{n} (Euler) or H^{n-1/2} (CN)
    double energy_curr = 0.0;
    int newton_iters_last = 0;
    double newton_residual_last = 0.0;
    std::vector<double> newton_history_last;  // residual norms of the last solve
};

struct NewtonOutcome {
    std::vector<double> solution;
    int iterations = 0;
    std::vector<double> residual_history;  // includes the initial residual
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;
using JacobianFn = std::function<const SparseMatrix&(const std::vector<double>&)>;
using LinearSolveFn =
    std::function<std::vector<double>(const SparseMatrix&, const std::vector<double>&)>;

// Plain Newton with an analytic sparse Jacobian. Stops when
// ||F|| <= tol * max(1, ||F(guess)||); throws solver_error with the residual
// trace when maxit is exceeded. The linear solves default to a sparse LU;
// callers may supply their own solver (e.g. one with a cached symbolic
// analysis).
NewtonOutcome newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                           const std::vector<double>& guess, double tol, int maxit,
                           const LinearSolveFn& linear_solve = {});

// r = E_next - E_prev + k (lambda_r ||H||^2 + lambda_e ||grad H||^2).
// Nonpositive for the Euler schemes, zero for Crank-Nicolson up to solver
// tolerance.
double dissipation_residual(double E_prev, double E_next, const VectorField& H, double k,
                            const ModelParams& p, SchemeKind scheme);

namespace detail {
class BlockSystem;
}

// Drives one trajectory of the selected fully discrete scheme over the
// stacked (U, H) unknowns. A stepper instance is single-stream.
class TimeStepper {
public:
    TimeStepper(std::shared_ptr<const FeSpace> space, const ModelParams& params,
                const SchemeConfig& cfg);
    ~TimeStepper();

    TimeStepper(const TimeStepper&) = delete;
    TimeStepper& operator=(const TimeStepper&) = delete;

    void initialize(const VectorField& u0);

    struct StepInfo {
        double energy = 0.0;
        double h_l2 = 0.0;
        double h_h1semi = 0.0;
        double diss_residual = 0.0;
        int newton_iters = 0;
    };

    // Advances n -> n+1 with the configured scheme.
    StepInfo step();

    const StepperState& state() const { return state_; }
    const SparseMatrix& mass() const { return M_; }
    const SparseMatrix& stiffness() const { return K_; }
    const FeSpace& space() const { return *space_; }
    const ModelParams& params() const { return params_; }
    const SchemeConfig& config() const { return cfg_; }

private:
    StepInfo euler_step();
    StepInfo cn_first_step();
    StepInfo cn_step();
    VectorField initial_field_guess(const VectorField& u) const;
    LinearSolveFn newton_linear_solve();
    StepInfo finish_step(const std::vector<double>& z, const NewtonOutcome& outcome,
                         std::optional<double> substep_field_diss, int extra_iters);

    std::shared_ptr<const FeSpace> space_;
    ModelParams params_;
    SchemeConfig cfg_;
    SparseMatrix M_;
    SparseMatrix K_;
    std::unique_ptr<detail::BlockSystem> jac_;
    DirectSolver newton_lu_;  // symbolic analysis shared across all steps
    StepperState state_;
};

} // namespace llbar
