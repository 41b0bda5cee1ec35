#include "llbar/model.hpp"

#include "llbar/errors.hpp"

#include <cmath>

namespace llbar {

void ModelParams::validate() const {
    if (!(lambda_r > 0.0))
        throw config_error("ModelParams: lambda_r must be > 0");
    if (!(lambda_e >= 0.0))
        throw config_error("ModelParams: lambda_e must be >= 0");
    if (!(kappa > 0.0))
        throw config_error("ModelParams: kappa must be > 0");
    if (std::abs(norm2(e_axis) - 1.0) > 1e-12)
        throw config_error("ModelParams: e_axis must be a unit vector");
}

double energy(const FeSpace& space, const ModelParams& p, const VectorField& u,
              EnergyBranch branch) {
    const bool positive =
        branch == EnergyBranch::automatic ? (p.mu > 0.0) : (branch == EnergyBranch::mu_positive);
    const QuadRule& rule = space.high_rule();
    const int npe = space.nodes_per_element();

    double total = 0.0;
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const auto& g = space.element_grads(e);
        const double measure = space.element_measure(e);

        // Exchange part: gradients are constant on the element.
        double grad_sq = 0.0;
        for (int c = 0; c < 3; ++c) {
            double dx = 0.0, dy = 0.0;
            for (int a = 0; a < npe; ++a) {
                const double cv = u.coeffs[3 * nodes[a] + c];
                dx += cv * g[a][0];
                dy += cv * g[a][1];
            }
            grad_sq += dx * dx + dy * dy;
        }
        double elem = 0.5 * measure * grad_sq;

        const double scale = measure / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            const Vec3 uq = field_at_qp(space, rule, u, e, q);
            const double n2 = norm2_sq(uq);
            const double ea = dot(p.e_axis, uq);
            if (positive) {
                const double dev = n2 - p.mu;
                elem += w * (0.25 * p.kappa * dev * dev + 0.5 * p.beta * ea * ea);
            } else {
                elem += w * (0.25 * p.kappa * n2 * n2 - 0.5 * p.kappa * p.mu * n2 +
                             0.5 * p.beta * ea * ea);
            }
        }
        total += elem;
    }
    return total;
}

std::vector<double> cubic_load(const FeSpace& space, const VectorField& u) {
    const QuadRule& rule = space.high_rule();
    const int npe = space.nodes_per_element();
    std::vector<double> b(3 * space.n_nodes(), 0.0);
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            const Vec3 uq = field_at_qp(space, rule, u, e, q);
            const Vec3 f = norm2_sq(uq) * uq;
            for (int a = 0; a < npe; ++a) {
                const double s = w * rule.basis[q][a];
                b[3 * nodes[a]] += s * f[0];
                b[3 * nodes[a] + 1] += s * f[1];
                b[3 * nodes[a] + 2] += s * f[2];
            }
        }
    }
    return b;
}

SparseMatrix cubic_jacobian(const FeSpace& space, const VectorField& u) {
    return assemble_block_form(space, [&](int e, int q, double B[3][3]) {
        kernels::cubic_block(field_at_qp(space, space.high_rule(), u, e, q), B);
    });
}

SparseMatrix cross_matrix(const FeSpace& space, const VectorField& w) {
    return assemble_block_form(space, [&](int e, int q, double B[3][3]) {
        kernels::cross_block(field_at_qp(space, space.high_rule(), w, e, q), B);
    });
}

std::vector<double> anisotropy_apply(const ModelParams& p, const SparseMatrix& M,
                                     const std::vector<double>& u_coeffs) {
    const int n = M.rows();
    std::vector<double> comp(n), t(n), s(n, 0.0), b(3 * n);
    for (int d = 0; d < 3; ++d) {
        for (int i = 0; i < n; ++i)
            comp[i] = u_coeffs[3 * i + d];
        M.spmv(comp.data(), t.data());
        for (int i = 0; i < n; ++i)
            s[i] += p.e_axis[d] * t[i];
    }
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
            b[3 * i + c] = p.e_axis[c] * s[i];
    return b;
}

std::vector<double> cross_apply(const FeSpace& space, const VectorField& w, const VectorField& y) {
    const QuadRule& rule = space.high_rule();
    const int npe = space.nodes_per_element();
    std::vector<double> b(3 * space.n_nodes(), 0.0);
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double wq = rule.weights[q] * scale;
            const Vec3 f = cross(field_at_qp(space, rule, w, e, q), field_at_qp(space, rule, y, e, q));
            for (int a = 0; a < npe; ++a) {
                const double s = wq * rule.basis[q][a];
                b[3 * nodes[a]] += s * f[0];
                b[3 * nodes[a] + 1] += s * f[1];
                b[3 * nodes[a] + 2] += s * f[2];
            }
        }
    }
    return b;
}

std::vector<double> psi_load(const FeSpace& space, const VectorField& u_n,
                             const VectorField& u_np1) {
    const QuadRule& rule = space.high_rule();
    const int npe = space.nodes_per_element();
    std::vector<double> b(3 * space.n_nodes(), 0.0);
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            const Vec3 a = field_at_qp(space, rule, u_n, e, q);
            const Vec3 c = field_at_qp(space, rule, u_np1, e, q);
            const double s2 = 0.5 * (norm2_sq(a) + norm2_sq(c));
            const Vec3 f = (0.5 * s2) * (a + c);
            for (int i = 0; i < npe; ++i) {
                const double s = w * rule.basis[q][i];
                b[3 * nodes[i]] += s * f[0];
                b[3 * nodes[i] + 1] += s * f[1];
                b[3 * nodes[i] + 2] += s * f[2];
            }
        }
    }
    return b;
}

SparseMatrix psi_jacobian(const FeSpace& space, const VectorField& u_n, const VectorField& u_np1) {
    return assemble_block_form(space, [&](int e, int q, double B[3][3]) {
        kernels::psi_block(field_at_qp(space, space.high_rule(), u_n, e, q),
                           field_at_qp(space, space.high_rule(), u_np1, e, q), B);
    });
}

} // namespace llbar
