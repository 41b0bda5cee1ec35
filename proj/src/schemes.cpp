#include "llbar/schemes.hpp"

#include "llbar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace llbar {

void SchemeConfig::validate() const {
    if (!(k > 0.0))
        throw config_error("SchemeConfig: time step k must be > 0");
    if (!(newton_tol > 0.0) || !(linear_tol > 0.0))
        throw config_error("SchemeConfig: tolerances must be positive");
    if (newton_max_iter < 1 || linear_max_iter < 1)
        throw config_error("SchemeConfig: iteration limits must be >= 1");
    if (first_step_substeps < 1)
        throw config_error("SchemeConfig: first_step_substeps must be >= 1");
}

NewtonOutcome newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                           const std::vector<double>& guess, double tol, int maxit,
                           const LinearSolveFn& linear_solve) {
    LinearSolveFn solve = linear_solve;
    std::shared_ptr<DirectSolver> fallback;
    if (!solve) {
        fallback = std::make_shared<DirectSolver>();
        solve = [fallback](const SparseMatrix& A, const std::vector<double>& b) {
            fallback->factorize(A);
            return fallback->solve(b);
        };
    }

    NewtonOutcome out;
    out.solution = guess;
    std::vector<double> f = residual(out.solution);
    double rnorm = norm2(f);
    out.residual_history.push_back(rnorm);
    const double target = tol * std::max(1.0, rnorm);
    if (rnorm <= target)
        return out;

    std::vector<double> rhs(f.size());
    for (int m = 1; m <= maxit; ++m) {
        const SparseMatrix& J = jacobian(out.solution);
        for (std::size_t i = 0; i < f.size(); ++i)
            rhs[i] = -f[i];
        const std::vector<double> delta = solve(J, rhs);
        for (std::size_t i = 0; i < f.size(); ++i)
            out.solution[i] += delta[i];
        f = residual(out.solution);
        rnorm = norm2(f);
        out.residual_history.push_back(rnorm);
        if (rnorm <= target) {
            out.iterations = m;
            return out;
        }
    }
    throw solver_error("newton_solve: no convergence within " + std::to_string(maxit) +
                           " iterations (residual " + std::to_string(rnorm) + ")",
                       out.residual_history);
}

double dissipation_residual(double E_prev, double E_next, const VectorField& H, double k,
                            const ModelParams& p, SchemeKind /*scheme*/) {
    const double h_l2 = norm(*H.space, H, NormKind::L2);
    const double h_semi = norm(*H.space, H, NormKind::H1_semi);
    return (E_next - E_prev) + k * (p.lambda_r * h_l2 * h_l2 + p.lambda_e * h_semi * h_semi);
}

namespace detail {

// 6N x 6N Newton matrix over the stacked (U, Y) unknowns, stored as one CSR
// whose pattern is fixed by the scalar P1 adjacency: every (block-row,
// block-col) pair carries a full 3x3 component block per node pair.
class BlockSystem {
public:
    BlockSystem(const FeSpace& space, const SparseMatrix& scalar_pattern) : space_(&space) {
        n_ = scalar_pattern.rows();
        adj_offsets_ = scalar_pattern.row_offsets();
        adj_cols_ = scalar_pattern.col_indices();

        const int rows = 6 * n_;
        std::vector<int> offsets(rows + 1, 0);
        for (int bi = 0; bi < 2; ++bi)
            for (int i = 0; i < n_; ++i) {
                const int deg = adj_offsets_[i + 1] - adj_offsets_[i];
                for (int c = 0; c < 3; ++c)
                    offsets[3 * n_ * bi + 3 * i + c + 1] = 6 * deg;
            }
        for (int r = 0; r < rows; ++r)
            offsets[r + 1] += offsets[r];

        std::vector<int> cols(offsets[rows]);
        for (int bi = 0; bi < 2; ++bi)
            for (int i = 0; i < n_; ++i)
                for (int c = 0; c < 3; ++c) {
                    int pos = offsets[3 * n_ * bi + 3 * i + c];
                    for (int bj = 0; bj < 2; ++bj)
                        for (int t = adj_offsets_[i]; t < adj_offsets_[i + 1]; ++t)
                            for (int d = 0; d < 3; ++d)
                                cols[pos++] = 3 * n_ * bj + 3 * adj_cols_[t] + d;
                }

        std::vector<double> values(cols.size(), 0.0);
        A_ = SparseMatrix::from_csr(rows, rows, std::move(offsets), std::move(cols),
                                    std::move(values));
    }

    void clear() { std::fill(A_.mutable_values().begin(), A_.mutable_values().end(), 0.0); }
    void snapshot_base() { base_ = A_.values(); }
    void restore_base() { A_.mutable_values() = base_; }

    const SparseMatrix& matrix() const { return A_; }

    void add_scalar(int bi, int bj, const SparseMatrix& S, double factor) {
        double* vals = A_.mutable_values().data();
        for (int i = 0; i < n_; ++i)
            for (int k = S.row_offsets()[i]; k < S.row_offsets()[i + 1]; ++k) {
                const int j = S.col_indices()[k];
                const double v = factor * S.values()[k];
                for (int c = 0; c < 3; ++c)
                    vals[value_index(bi, i, c, bj, j, c)] += v;
            }
    }

    void add_scalar_outer(int bi, int bj, const SparseMatrix& S, const Vec3& e, double factor) {
        double* vals = A_.mutable_values().data();
        for (int i = 0; i < n_; ++i)
            for (int k = S.row_offsets()[i]; k < S.row_offsets()[i + 1]; ++k) {
                const int j = S.col_indices()[k];
                const double v = factor * S.values()[k];
                for (int c = 0; c < 3; ++c) {
                    if (e[c] == 0.0)
                        continue;
                    for (int d = 0; d < 3; ++d)
                        if (e[d] != 0.0)
                            vals[value_index(bi, i, c, bj, j, d)] += v * e[c] * e[d];
                }
            }
    }

    // Adds factor * int phi_a phi_b B_cd with B evaluated per quadrature
    // point of the high rule.
    template <typename BlockFn>
    void add_block_form(int bi, int bj, const BlockFn& block_at_qp, double factor) {
        const FeSpace& sp = *space_;
        const QuadRule& rule = sp.high_rule();
        const int npe = sp.nodes_per_element();
        double* vals = A_.mutable_values().data();
        double B[3][3];
        for (int e = 0; e < sp.n_elements(); ++e) {
            const auto& nodes = sp.element_nodes(e);
            const double scale = sp.element_measure(e) / (sp.mesh().dim == 1 ? 1.0 : 0.5);
            for (int q = 0; q < rule.n_points(); ++q) {
                const double w = factor * rule.weights[q] * scale;
                block_at_qp(e, q, B);
                for (int a = 0; a < npe; ++a) {
                    const int ia = nodes[a];
                    const int dega = adj_offsets_[ia + 1] - adj_offsets_[ia];
                    for (int b = 0; b < npe; ++b) {
                        const double s = w * rule.basis[q][a] * rule.basis[q][b];
                        const int slot = find_slot(ia, nodes[b]);
                        for (int c = 0; c < 3; ++c) {
                            const int base = A_.row_offsets()[3 * n_ * bi + 3 * ia + c] +
                                             (bj * dega + slot) * 3;
                            vals[base] += s * B[c][0];
                            vals[base + 1] += s * B[c][1];
                            vals[base + 2] += s * B[c][2];
                        }
                    }
                }
            }
        }
    }

private:
    int find_slot(int i, int j) const {
        const auto begin = adj_cols_.begin() + adj_offsets_[i];
        const auto end = adj_cols_.begin() + adj_offsets_[i + 1];
        return static_cast<int>(std::lower_bound(begin, end, j) - begin);
    }

    int value_index(int bi, int i, int c, int bj, int j, int d) const {
        const int deg = adj_offsets_[i + 1] - adj_offsets_[i];
        return A_.row_offsets()[3 * n_ * bi + 3 * i + c] + (bj * deg + find_slot(i, j)) * 3 + d;
    }

    const FeSpace* space_;
    int n_ = 0;
    std::vector<int> adj_offsets_;
    std::vector<int> adj_cols_;
    SparseMatrix A_;
    std::vector<double> base_;
};

} // namespace detail

namespace {

VectorField field_from_slice(const std::shared_ptr<const FeSpace>& space,
                             const std::vector<double>& z, int offset) {
    VectorField f(space);
    std::copy(z.begin() + offset, z.begin() + offset + static_cast<long>(f.coeffs.size()),
              f.coeffs.begin());
    return f;
}

void axpy(std::vector<double>& y, const std::vector<double>& x, double a) {
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += a * x[i];
}

} // namespace

TimeStepper::TimeStepper(std::shared_ptr<const FeSpace> space, const ModelParams& params,
                         const SchemeConfig& cfg)
    : space_(std::move(space)), params_(params), cfg_(cfg) {
    params_.validate();
    cfg_.validate();
    M_ = assemble_mass(*space_);
    K_ = assemble_stiffness(*space_);
    jac_ = std::make_unique<detail::BlockSystem>(*space_, M_);
}

TimeStepper::~TimeStepper() = default;

LinearSolveFn TimeStepper::newton_linear_solve() {
    return [this](const SparseMatrix& A, const std::vector<double>& b) {
        newton_lu_.factorize(A);
        return newton_lu_.solve(b);
    };
}

VectorField TimeStepper::initial_field_guess(const VectorField& u) const {
    // Solves the (linear in Y) field equation at the given u: the discrete
    // effective field M Y = -K u + kappa mu M u - kappa cubic(u) - beta Ae u.
    const int n = space_->n_nodes();
    std::vector<double> rhs(3 * n, 0.0);
    K_.spmv_block3_add(u.coeffs.data(), rhs.data(), -1.0);
    M_.spmv_block3_add(u.coeffs.data(), rhs.data(), params_.kappa * params_.mu);
    axpy(rhs, cubic_load(*space_, u), -params_.kappa);
    axpy(rhs, anisotropy_apply(params_, M_, u.coeffs), -params_.beta);

    VectorField y(space_);
    std::vector<double> comp(n);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i)
            comp[i] = rhs[3 * i + c];
        const auto sol = solve_krylov(M_, comp, cfg_.linear_tol, cfg_.linear_max_iter);
        for (int i = 0; i < n; ++i)
            y.coeffs[3 * i + c] = sol.x[i];
    }
    return y;
}

void TimeStepper::initialize(const VectorField& u0) {
    if (!u0.space || u0.space->n_nodes() != space_->n_nodes())
        throw config_error("TimeStepper: initial field does not match the space");
    state_ = StepperState{};
    state_.u_curr = u0;
    state_.u_curr.space = space_;
    state_.h_last = initial_field_guess(state_.u_curr);
    state_.energy_curr = energy(*space_, params_, state_.u_curr);
}

TimeStepper::StepInfo TimeStepper::step() {
    switch (cfg_.scheme) {
    case SchemeKind::euler:
    case SchemeKind::euler_bloch:
        return euler_step();
    case SchemeKind::cn:
        return state_.n == 0 ? cn_first_step() : cn_step();
    }
    throw config_error("TimeStepper: unknown scheme");
}

TimeStepper::StepInfo TimeStepper::finish_step(const std::vector<double>& z,
                                               const NewtonOutcome& outcome,
                                               std::optional<double> substep_field_diss,
                                               int extra_iters) {
    const int n3 = 3 * space_->n_nodes();
    VectorField u_next = field_from_slice(space_, z, 0);
    VectorField y = field_from_slice(space_, z, n3);

    const double e_prev = state_.energy_curr;
    const double e_next = energy(*space_, params_, u_next);

    StepInfo info;
    info.energy = e_next;
    info.h_l2 = norm(*space_, y, NormKind::L2);
    info.h_h1semi = norm(*space_, y, NormKind::H1_semi);
    info.newton_iters = outcome.iterations + extra_iters;
    if (substep_field_diss) {
        // Substepped first step: the per-substep field contributions were
        // accumulated by the caller.
        info.diss_residual = (e_next - e_prev) + *substep_field_diss;
    } else {
        info.diss_residual = dissipation_residual(e_prev, e_next, y, cfg_.k, params_, cfg_.scheme);
    }

    state_.u_prev = std::move(state_.u_curr);
    state_.u_curr = std::move(u_next);
    state_.h_last = std::move(y);
    state_.n += 1;
    state_.t = state_.n * cfg_.k;
    state_.energy_curr = e_next;
    state_.newton_iters_last = info.newton_iters;
    state_.newton_residual_last = outcome.residual_history.back();
    state_.newton_history_last = outcome.residual_history;
    return info;
}

TimeStepper::StepInfo TimeStepper::euler_step() {
    const int n3 = 3 * space_->n_nodes();
    const double k = cfg_.k;
    const bool bloch = cfg_.scheme == SchemeKind::euler_bloch;
    const double kmu = params_.kappa * params_.mu;
    const VectorField un = state_.u_curr;

    // Explicit kappa mu M u^n load (plain Euler only).
    std::vector<double> mu_term;
    if (!bloch) {
        mu_term.assign(n3, 0.0);
        M_.spmv_block3_add(un.coeffs.data(), mu_term.data(), -kmu);
    }

    jac_->clear();
    jac_->add_scalar(0, 0, M_, 1.0 / k);
    jac_->add_scalar(0, 1, M_, -params_.lambda_r);
    jac_->add_scalar(0, 1, K_, -params_.lambda_e);
    jac_->add_block_form(
        0, 1,
        [&](int e, int q, double B[3][3]) {
            kernels::cross_block(field_at_qp(*space_, space_->high_rule(), un, e, q), B);
        },
        params_.gamma);
    jac_->add_scalar(1, 0, K_, 1.0);
    if (bloch)
        jac_->add_scalar(1, 0, M_, -kmu);
    if (params_.beta != 0.0)
        jac_->add_scalar_outer(1, 0, M_, params_.e_axis, params_.beta);
    jac_->add_scalar(1, 1, M_, 1.0);
    jac_->snapshot_base();

    auto residual = [&](const std::vector<double>& z) {
        VectorField u = field_from_slice(space_, z, 0);
        VectorField y = field_from_slice(space_, z, n3);
        std::vector<double> f(2 * n3, 0.0);

        std::vector<double> du(n3);
        for (int i = 0; i < n3; ++i)
            du[i] = u.coeffs[i] - un.coeffs[i];
        M_.spmv_block3_add(du.data(), f.data(), 1.0 / k);
        M_.spmv_block3_add(y.coeffs.data(), f.data(), -params_.lambda_r);
        K_.spmv_block3_add(y.coeffs.data(), f.data(), -params_.lambda_e);
        {
            const auto cr = cross_apply(*space_, un, y);
            for (int i = 0; i < n3; ++i)
                f[i] += params_.gamma * cr[i];
        }

        double* f2 = f.data() + n3;
        M_.spmv_block3_add(y.coeffs.data(), f2, 1.0);
        K_.spmv_block3_add(u.coeffs.data(), f2, 1.0);
        if (bloch)
            M_.spmv_block3_add(u.coeffs.data(), f2, -kmu);
        else
            for (int i = 0; i < n3; ++i)
                f2[i] += mu_term[i];
        {
            const auto cu = cubic_load(*space_, u);
            for (int i = 0; i < n3; ++i)
                f2[i] += params_.kappa * cu[i];
        }
        if (params_.beta != 0.0) {
            const auto an = anisotropy_apply(params_, M_, u.coeffs);
            for (int i = 0; i < n3; ++i)
                f2[i] += params_.beta * an[i];
        }
        return f;
    };

    auto jacobian = [&](const std::vector<double>& z) -> const SparseMatrix& {
        jac_->restore_base();
        VectorField u = field_from_slice(space_, z, 0);
        jac_->add_block_form(
            1, 0,
            [&](int e, int q, double B[3][3]) {
                kernels::cubic_block(field_at_qp(*space_, space_->high_rule(), u, e, q), B);
            },
            params_.kappa);
        return jac_->matrix();
    };

    std::vector<double> guess(2 * n3);
    std::copy(un.coeffs.begin(), un.coeffs.end(), guess.begin());
    std::copy(state_.h_last.coeffs.begin(), state_.h_last.coeffs.end(), guess.begin() + n3);

    const NewtonOutcome outcome = newton_solve(residual, jacobian, guess, cfg_.newton_tol,
                                               cfg_.newton_max_iter, newton_linear_solve());
    return finish_step(outcome.solution, outcome, std::nullopt, 0);
}

TimeStepper::StepInfo TimeStepper::cn_step() {
    if (!state_.u_prev)
        throw config_error("cn_step: previous solution missing (run the first step first)");
    const int n3 = 3 * space_->n_nodes();
    const double k = cfg_.k;
    const double kmu = params_.kappa * params_.mu;
    const VectorField un = state_.u_curr;

    // Extrapolated cross field (3 u^n - u^{n-1}) / 2.
    VectorField uhat(space_);
    for (int i = 0; i < n3; ++i)
        uhat.coeffs[i] = 1.5 * un.coeffs[i] - 0.5 * state_.u_prev->coeffs[i];

    jac_->clear();
    jac_->add_scalar(0, 0, M_, 1.0 / k);
    jac_->add_scalar(0, 1, M_, -params_.lambda_r);
    jac_->add_scalar(0, 1, K_, -params_.lambda_e);
    jac_->add_block_form(
        0, 1,
        [&](int e, int q, double B[3][3]) {
            kernels::cross_block(field_at_qp(*space_, space_->high_rule(), uhat, e, q), B);
        },
        params_.gamma);
    jac_->add_scalar(1, 0, K_, 0.5);
    jac_->add_scalar(1, 0, M_, -0.5 * kmu);
    if (params_.beta != 0.0)
        jac_->add_scalar_outer(1, 0, M_, params_.e_axis, 0.5 * params_.beta);
    jac_->add_scalar(1, 1, M_, 1.0);
    jac_->snapshot_base();

    auto residual = [&](const std::vector<double>& z) {
        VectorField u = field_from_slice(space_, z, 0);
        VectorField y = field_from_slice(space_, z, n3);
        std::vector<double> f(2 * n3, 0.0);

        std::vector<double> du(n3), um(n3);
        for (int i = 0; i < n3; ++i) {
            du[i] = u.coeffs[i] - un.coeffs[i];
            um[i] = 0.5 * (u.coeffs[i] + un.coeffs[i]);
        }
        M_.spmv_block3_add(du.data(), f.data(), 1.0 / k);
        M_.spmv_block3_add(y.coeffs.data(), f.data(), -params_.lambda_r);
        K_.spmv_block3_add(y.coeffs.data(), f.data(), -params_.lambda_e);
        {
            const auto cr = cross_apply(*space_, uhat, y);
            for (int i = 0; i < n3; ++i)
                f[i] += params_.gamma * cr[i];
        }

        double* f2 = f.data() + n3;
        M_.spmv_block3_add(y.coeffs.data(), f2, 1.0);
        K_.spmv_block3_add(um.data(), f2, 1.0);
        M_.spmv_block3_add(um.data(), f2, -kmu);
        {
            const auto ps = psi_load(*space_, un, u);
            for (int i = 0; i < n3; ++i)
                f2[i] += params_.kappa * ps[i];
        }
        if (params_.beta != 0.0) {
            const auto an = anisotropy_apply(params_, M_, um);
            for (int i = 0; i < n3; ++i)
                f2[i] += params_.beta * an[i];
        }
        return f;
    };

    auto jacobian = [&](const std::vector<double>& z) -> const SparseMatrix& {
        jac_->restore_base();
        VectorField u = field_from_slice(space_, z, 0);
        jac_->add_block_form(
            1, 0,
            [&](int e, int q, double B[3][3]) {
                kernels::psi_block(field_at_qp(*space_, space_->high_rule(), un, e, q),
                                   field_at_qp(*space_, space_->high_rule(), u, e, q), B);
            },
            params_.kappa);
        return jac_->matrix();
    };

    std::vector<double> guess(2 * n3);
    std::copy(un.coeffs.begin(), un.coeffs.end(), guess.begin());
    std::copy(state_.h_last.coeffs.begin(), state_.h_last.coeffs.end(), guess.begin() + n3);

    const NewtonOutcome outcome = newton_solve(residual, jacobian, guess, cfg_.newton_tol,
                                               cfg_.newton_max_iter, newton_linear_solve());
    return finish_step(outcome.solution, outcome, std::nullopt, 0);
}

TimeStepper::StepInfo TimeStepper::cn_first_step() {
    const int n3 = 3 * space_->n_nodes();
    const int substeps = cfg_.first_step_substeps;
    const double dt = cfg_.k / substeps;
    const double kmu = params_.kappa * params_.mu;

    const VectorField u0 = state_.u_curr;
    VectorField u_sub = u0;
    VectorField y_guess = state_.h_last;

    double diss_fields = 0.0;
    int total_iters = 0;
    NewtonOutcome last_outcome;
    std::vector<double> z_final;

    for (int s = 0; s < substeps; ++s) {
        auto residual = [&](const std::vector<double>& z) {
            VectorField u = field_from_slice(space_, z, 0);
            VectorField y = field_from_slice(space_, z, n3);
            std::vector<double> f(2 * n3, 0.0);

            std::vector<double> du(n3), uh(n3);
            for (int i = 0; i < n3; ++i) {
                du[i] = u.coeffs[i] - u_sub.coeffs[i];
                uh[i] = 0.5 * (u.coeffs[i] + u_sub.coeffs[i]);
            }
            VectorField uhf(space_);
            uhf.coeffs = uh;

            M_.spmv_block3_add(du.data(), f.data(), 1.0 / dt);
            M_.spmv_block3_add(y.coeffs.data(), f.data(), -params_.lambda_r);
            K_.spmv_block3_add(y.coeffs.data(), f.data(), -params_.lambda_e);
            {
                const auto cr = cross_apply(*space_, uhf, y);
                for (int i = 0; i < n3; ++i)
                    f[i] += params_.gamma * cr[i];
            }

            double* f2 = f.data() + n3;
            M_.spmv_block3_add(y.coeffs.data(), f2, 1.0);
            K_.spmv_block3_add(uh.data(), f2, 1.0);
            M_.spmv_block3_add(uh.data(), f2, -kmu);
            {
                const auto ps = psi_load(*space_, u_sub, u);
                for (int i = 0; i < n3; ++i)
                    f2[i] += params_.kappa * ps[i];
            }
            if (cfg_.cn_first_beta && params_.beta != 0.0) {
                const auto an = anisotropy_apply(params_, M_, uh);
                for (int i = 0; i < n3; ++i)
                    f2[i] += params_.beta * an[i];
            }
            return f;
        };

        // The cross term couples U and Y implicitly, so the whole Jacobian is
        // rebuilt at every iterate (first step only).
        auto jacobian = [&](const std::vector<double>& z) -> const SparseMatrix& {
            VectorField u = field_from_slice(space_, z, 0);
            VectorField y = field_from_slice(space_, z, n3);
            VectorField uhf(space_);
            for (int i = 0; i < n3; ++i)
                uhf.coeffs[i] = 0.5 * (u.coeffs[i] + u_sub.coeffs[i]);

            jac_->clear();
            jac_->add_scalar(0, 0, M_, 1.0 / dt);
            jac_->add_block_form(
                0, 0,
                [&](int e, int q, double B[3][3]) {
                    kernels::cross_block(field_at_qp(*space_, space_->high_rule(), y, e, q), B);
                },
                -0.5 * params_.gamma);
            jac_->add_scalar(0, 1, M_, -params_.lambda_r);
            jac_->add_scalar(0, 1, K_, -params_.lambda_e);
            jac_->add_block_form(
                0, 1,
                [&](int e, int q, double B[3][3]) {
                    kernels::cross_block(field_at_qp(*space_, space_->high_rule(), uhf, e, q), B);
                },
                params_.gamma);
            jac_->add_scalar(1, 0, K_, 0.5);
            jac_->add_scalar(1, 0, M_, -0.5 * kmu);
            if (cfg_.cn_first_beta && params_.beta != 0.0)
                jac_->add_scalar_outer(1, 0, M_, params_.e_axis, 0.5 * params_.beta);
            jac_->add_block_form(
                1, 0,
                [&](int e, int q, double B[3][3]) {
                    kernels::psi_block(field_at_qp(*space_, space_->high_rule(), u_sub, e, q),
                                       field_at_qp(*space_, space_->high_rule(), u, e, q), B);
                },
                params_.kappa);
            jac_->add_scalar(1, 1, M_, 1.0);
            return jac_->matrix();
        };

        std::vector<double> guess(2 * n3);
        std::copy(u_sub.coeffs.begin(), u_sub.coeffs.end(), guess.begin());
        std::copy(y_guess.coeffs.begin(), y_guess.coeffs.end(), guess.begin() + n3);

        last_outcome = newton_solve(residual, jacobian, guess, cfg_.newton_tol,
                                    cfg_.newton_max_iter, newton_linear_solve());
        z_final = last_outcome.solution;
        total_iters += last_outcome.iterations;

        u_sub = field_from_slice(space_, z_final, 0);
        y_guess = field_from_slice(space_, z_final, n3);
        const double y_l2 = norm(*space_, y_guess, NormKind::L2);
        const double y_semi = norm(*space_, y_guess, NormKind::H1_semi);
        diss_fields += dt * (params_.lambda_r * y_l2 * y_l2 + params_.lambda_e * y_semi * y_semi);
    }

    return finish_step(z_final, last_outcome, diss_fields,
                       total_iters - last_outcome.iterations);
}

} // namespace llbar
