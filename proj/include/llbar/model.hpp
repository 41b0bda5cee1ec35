#pragma once

#include "llbar/fem.hpp"
#include "llbar/sparse.hpp"
#include "llbar/vec3.hpp"

#include <vector>

namespace llbar {

// Physical coefficients of the LLBar / regularised LLBloch system. The sign
// of mu selects the regime (positive below the Curie temperature); beta may
// carry either sign.
struct ModelParams {
    double lambda_r = 0.0;  // relativistic damping, > 0
    double lambda_e = 0.0;  // exchange damping, >= 0
    double gamma = 0.0;     // gyromagnetic ratio
    double kappa = 0.0;     // internal exchange coefficient, > 0
    double mu = 0.0;
    double beta = 0.0;      // uniaxial anisotropy
    Vec3 e_axis = {0.0, 0.0, 1.0};

    void validate() const;  // throws config_error when an invariant fails

    bool operator==(const ModelParams&) const = default;
};

enum class EnergyBranch { automatic, mu_positive, mu_negative };

// Free energy. mu > 0: 1/2 |grad u|^2 + kappa/4 ||u|^2 - mu|^2 + beta/2 (e.u)^2;
// mu <= 0 uses the branch with the quartic and -kappa mu/2 |u|^2 terms. The two
// branches differ by the constant kappa mu^2 |D| / 4.
double energy(const FeSpace& space, const ModelParams& p, const VectorField& u,
              EnergyBranch branch = EnergyBranch::automatic);

// b_{i,c} = <|u|^2 u, phi_i e_c>; the kappa factor is applied by the caller.
std::vector<double> cubic_load(const FeSpace& space, const VectorField& u);

// Derivative of cubic_load; per-point block |u|^2 I + 2 u u^T, symmetric.
SparseMatrix cubic_jacobian(const FeSpace& space, const VectorField& u);

// Matrix of the bilinear form (C(w) Y)_{i,c} = <w x y, phi_i e_c> for fixed w.
SparseMatrix cross_matrix(const FeSpace& space, const VectorField& w);

// b = (e e^T (x) M) u, blockwise through the scalar mass matrix.
std::vector<double> anisotropy_apply(const ModelParams& p, const SparseMatrix& M,
                                     const std::vector<double>& u_coeffs);

// Action of cross_matrix(w) on the coefficients of y without materialising
// the matrix: b_{i,c} = <w x y, phi_i e_c>.
std::vector<double> cross_apply(const FeSpace& space, const VectorField& w, const VectorField& y);

// psi(u^n, u^{n+1}) = 1/2 (|u^{n+1}|^2 + |u^n|^2) (u^n + u^{n+1}) / 2 tested
// against phi_i e_c.
std::vector<double> psi_load(const FeSpace& space, const VectorField& u_n,
                             const VectorField& u_np1);

// Derivative of psi_load with respect to its second argument.
SparseMatrix psi_jacobian(const FeSpace& space, const VectorField& u_n, const VectorField& u_np1);

// Per-point blocks shared between the standalone matrices above and the fused
// Newton Jacobian assembly.
namespace kernels {

inline void cubic_block(const Vec3& u, double B[3][3]) {
    const double n2 = norm2_sq(u);
    for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
            B[c][d] = 2.0 * u[c] * u[d] + (c == d ? n2 : 0.0);
}

inline void cross_block(const Vec3& w, double B[3][3]) {
    B[0][0] = 0.0;    B[0][1] = -w[2]; B[0][2] = w[1];
    B[1][0] = w[2];   B[1][1] = 0.0;   B[1][2] = -w[0];
    B[2][0] = -w[1];  B[2][1] = w[0];  B[2][2] = 0.0;
}

inline void psi_block(const Vec3& a, const Vec3& b, double B[3][3]) {
    const double s = 0.25 * (norm2_sq(a) + norm2_sq(b));
    for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
            B[c][d] = 0.5 * (a[c] + b[c]) * b[d] + (c == d ? s : 0.0);
}

} // namespace kernels

// Assembles the 3N x 3N matrix of a zero-order block form
// A_{(i,c),(j,d)} = int phi_i phi_j B_{cd}(x), with B evaluated from the
// supplied fields at each high-rule quadrature point.
template <typename BlockFn>
SparseMatrix assemble_block_form(const FeSpace& space, const BlockFn& block_at_qp) {
    const QuadRule& rule = space.high_rule();
    const int npe = space.nodes_per_element();
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(space.n_elements()) * rule.n_points() * npe * npe * 9);
    double B[3][3];
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            block_at_qp(e, q, B);
            for (int a = 0; a < npe; ++a) {
                for (int b = 0; b < npe; ++b) {
                    const double s = w * rule.basis[q][a] * rule.basis[q][b];
                    for (int c = 0; c < 3; ++c)
                        for (int d = 0; d < 3; ++d)
                            if (B[c][d] != 0.0)
                                triplets.push_back(
                                    {3 * nodes[a] + c, 3 * nodes[b] + d, s * B[c][d]});
                }
            }
        }
    }
    return SparseMatrix::from_triplets(3 * space.n_nodes(), 3 * space.n_nodes(), triplets);
}

} // namespace llbar
