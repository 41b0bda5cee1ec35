#pragma once

#include "llbar/mesh.hpp"
#include "llbar/sparse.hpp"
#include "llbar/vec3.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace llbar {

// R^3-valued analytic function of the spatial point (y ignored in 1d).
using VectorFn = std::function<Vec3(double, double)>;
// Spatial gradient: component [0] is d/dx, component [1] is d/dy.
using VectorGradFn = std::function<std::array<Vec3, 2>(double, double)>;

// Quadrature rule on the reference element (unit interval or the triangle
// (0,0)-(1,0)-(0,1)). Weights sum to the reference measure. basis[q][a] holds
// the P1 basis values at point q.
struct QuadRule {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
    std::vector<std::array<double, 3>> basis;
    int n_points() const { return static_cast<int>(points.size()); }
};

QuadRule make_rule_low(int dim);   // exact for polynomial degree 2 (3 on segments)
QuadRule make_rule_high(int dim);  // exact for polynomial degree 4 (5 on segments)

// P1 Lagrange space over a Mesh, with per-element geometry precomputed.
class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    int degree() const { return 1; }
    int n_nodes() const { return mesh_->n_nodes(); }
    int n_elements() const { return mesh_->n_elements(); }
    int nodes_per_element() const { return mesh_->nodes_per_element(); }

    const QuadRule& low_rule() const { return low_; }
    const QuadRule& high_rule() const { return high_; }

    const std::array<int, 3>& element_nodes(int e) const { return mesh_->elements[e]; }
    // Physical basis gradients, constant on the element.
    const std::array<std::array<double, 2>, 3>& element_grads(int e) const { return grads_[e]; }
    double element_measure(int e) const { return measures_[e]; }
    // Physical coordinates of reference point p in element e.
    std::array<double, 2> map_point(int e, const std::array<double, 2>& p) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    QuadRule low_;
    QuadRule high_;
    std::vector<std::array<std::array<double, 2>, 3>> grads_;
    std::vector<double> measures_;
};

// Coefficients of an R^3-valued P1 function, node-major interleaved
// (ux, uy, uz per node).
struct VectorField {
    std::shared_ptr<const FeSpace> space;
    std::vector<double> coeffs;

    VectorField() = default;
    explicit VectorField(std::shared_ptr<const FeSpace> s)
        : space(std::move(s)), coeffs(3 * space->n_nodes(), 0.0) {}

    Vec3 node_value(int i) const { return {coeffs[3 * i], coeffs[3 * i + 1], coeffs[3 * i + 2]}; }
    void set_node_value(int i, const Vec3& v) {
        coeffs[3 * i] = v[0];
        coeffs[3 * i + 1] = v[1];
        coeffs[3 * i + 2] = v[2];
    }
};

// Linf is the nodal maximum of the Euclidean norm of the 3-vector; the same
// convention is applied to fields and to errors. L4 integrates with the high
// rule (exact for P1 data).
enum class NormKind { L2, H1, H1_semi, Linf, L4 };

// Scalar mass matrix M_ij = int phi_i phi_j; SPD.
SparseMatrix assemble_mass(const FeSpace& space);

// Scalar stiffness K_ij = int grad phi_i . grad phi_j; PSD with the constants
// as kernel (pure Neumann).
SparseMatrix assemble_stiffness(const FeSpace& space);

VectorField interpolate_nodal(const std::shared_ptr<const FeSpace>& space, const VectorFn& f);

// L2 projection: solves M c = <f, phi_i> per component.
VectorField l2_project(const std::shared_ptr<const FeSpace>& space, const VectorFn& f,
                       double linear_tol = 1e-12, int linear_maxit = 10000);

// Ritz projection with zero-mean matching, via the augmented system
// [[K, m], [m^T, 0]] where m_i = <phi_i, 1>.
VectorField ritz_project(const std::shared_ptr<const FeSpace>& space, const VectorFn& f,
                         const VectorGradFn& grad_f, double linear_tol = 1e-12,
                         int linear_maxit = 10000);

// Discrete Laplacian: w with M w = -K v, componentwise.
VectorField apply_discrete_laplacian(const FeSpace& space, const SparseMatrix& M,
                                     const SparseMatrix& K, const VectorField& v,
                                     double linear_tol = 1e-12, int linear_maxit = 10000);

double norm(const FeSpace& space, const VectorField& v, NormKind kind);

// Represents the coarse function exactly on the once-refined mesh (nested P1
// spaces); throws config_error if fine_space is not the uniform refinement of
// the coarse field's mesh.
VectorField prolong(const VectorField& coarse, const std::shared_ptr<const FeSpace>& fine_space);

// u_h evaluated at quadrature point q of element e.
inline Vec3 field_at_qp(const FeSpace& space, const QuadRule& rule, const VectorField& u, int e,
                        int q) {
    const auto& nodes = space.element_nodes(e);
    const auto& phi = rule.basis[q];
    Vec3 val = {0.0, 0.0, 0.0};
    for (int a = 0; a < space.nodes_per_element(); ++a) {
        const double* c = &u.coeffs[3 * nodes[a]];
        val[0] += phi[a] * c[0];
        val[1] += phi[a] * c[1];
        val[2] += phi[a] * c[2];
    }
    return val;
}

} // namespace llbar
