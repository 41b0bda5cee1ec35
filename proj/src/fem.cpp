#include "llbar/fem.hpp"

#include "llbar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace llbar {

namespace {

std::array<double, 3> p1_basis(int dim, double x, double y) {
    if (dim == 1)
        return {1.0 - x, x, 0.0};
    return {1.0 - x - y, x, y};
}

void fill_basis(QuadRule& rule, int dim) {
    rule.basis.resize(rule.points.size());
    for (std::size_t q = 0; q < rule.points.size(); ++q)
        rule.basis[q] = p1_basis(dim, rule.points[q][0], rule.points[q][1]);
}

} // namespace

QuadRule make_rule_low(int dim) {
    QuadRule rule;
    if (dim == 1) {
        const double a = 0.5 / std::sqrt(3.0);
        rule.points = {{0.5 - a, 0.0}, {0.5 + a, 0.0}};
        rule.weights = {0.5, 0.5};
    } else {
        // Edge midpoints: exact for quadratics.
        rule.points = {{0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};
        rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    }
    fill_basis(rule, dim);
    return rule;
}

QuadRule make_rule_high(int dim) {
    QuadRule rule;
    if (dim == 1) {
        const double a = 0.5 * std::sqrt(3.0 / 5.0);
        rule.points = {{0.5 - a, 0.0}, {0.5, 0.0}, {0.5 + a, 0.0}};
        rule.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    } else {
        // Six-point degree-4 rule, two symmetric orbits.
        const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011 / 2.0;
        const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322 / 2.0;
        rule.points = {{b1, b1}, {a1, b1}, {b1, a1}, {b2, b2}, {a2, b2}, {b2, a2}};
        rule.weights = {w1, w1, w1, w2, w2, w2};
    }
    fill_basis(rule, dim);
    return rule;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)), low_(make_rule_low(mesh_->dim)), high_(make_rule_high(mesh_->dim)) {
    const int ne = mesh_->n_elements();
    grads_.resize(ne);
    measures_.resize(ne);
    for (int e = 0; e < ne; ++e) {
        const auto& el = mesh_->elements[e];
        measures_[e] = mesh_->element_measure(e);
        if (mesh_->dim == 1) {
            const double len = measures_[e];
            grads_[e][0] = {-1.0 / len, 0.0};
            grads_[e][1] = {1.0 / len, 0.0};
            grads_[e][2] = {0.0, 0.0};
        } else {
            const auto& a = mesh_->nodes[el[0]];
            const auto& b = mesh_->nodes[el[1]];
            const auto& c = mesh_->nodes[el[2]];
            const double det = 2.0 * measures_[e];
            // grad phi_a = rot(edge opposite a) / (2 area)
            grads_[e][0] = {(b[1] - c[1]) / det, (c[0] - b[0]) / det};
            grads_[e][1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
            grads_[e][2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
        }
    }
}

std::array<double, 2> FeSpace::map_point(int e, const std::array<double, 2>& p) const {
    const auto& el = mesh_->elements[e];
    const auto phi = p1_basis(mesh_->dim, p[0], p[1]);
    double x = 0.0, y = 0.0;
    for (int a = 0; a < nodes_per_element(); ++a) {
        x += phi[a] * mesh_->nodes[el[a]][0];
        y += phi[a] * mesh_->nodes[el[a]][1];
    }
    return {x, y};
}

SparseMatrix assemble_mass(const FeSpace& space) {
    const QuadRule& rule = space.low_rule();
    const int npe = space.nodes_per_element();
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(space.n_elements()) * npe * npe);
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            for (int a = 0; a < npe; ++a)
                for (int b = 0; b < npe; ++b)
                    triplets.push_back({nodes[a], nodes[b], w * rule.basis[q][a] * rule.basis[q][b]});
        }
    }
    return SparseMatrix::from_triplets(space.n_nodes(), space.n_nodes(), triplets);
}

SparseMatrix assemble_stiffness(const FeSpace& space) {
    const int npe = space.nodes_per_element();
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(space.n_elements()) * npe * npe);
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const auto& g = space.element_grads(e);
        const double area = space.element_measure(e);
        for (int a = 0; a < npe; ++a)
            for (int b = 0; b < npe; ++b)
                triplets.push_back(
                    {nodes[a], nodes[b], area * (g[a][0] * g[b][0] + g[a][1] * g[b][1])});
    }
    return SparseMatrix::from_triplets(space.n_nodes(), space.n_nodes(), triplets);
}

VectorField interpolate_nodal(const std::shared_ptr<const FeSpace>& space, const VectorFn& f) {
    VectorField u(space);
    const Mesh& mesh = space->mesh();
    for (int i = 0; i < space->n_nodes(); ++i)
        u.set_node_value(i, f(mesh.nodes[i][0], mesh.nodes[i][1]));
    return u;
}

namespace {

// Right-hand side <f, phi_i e_c> via the high rule, node-major interleaved.
std::vector<double> moment_load(const FeSpace& space, const VectorFn& f) {
    const QuadRule& rule = space.high_rule();
    std::vector<double> b(3 * space.n_nodes(), 0.0);
    const int npe = space.nodes_per_element();
    for (int e = 0; e < space.n_elements(); ++e) {
        const auto& nodes = space.element_nodes(e);
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            const auto xy = space.map_point(e, rule.points[q]);
            const Vec3 fv = f(xy[0], xy[1]);
            for (int a = 0; a < npe; ++a) {
                const double s = w * rule.basis[q][a];
                b[3 * nodes[a]] += s * fv[0];
                b[3 * nodes[a] + 1] += s * fv[1];
                b[3 * nodes[a] + 2] += s * fv[2];
            }
        }
    }
    return b;
}

} // namespace

VectorField l2_project(const std::shared_ptr<const FeSpace>& space, const VectorFn& f,
                       double linear_tol, int linear_maxit) {
    const SparseMatrix M = assemble_mass(*space);
    const std::vector<double> b = moment_load(*space, f);
    const int n = space->n_nodes();
    VectorField u(space);
    std::vector<double> rhs(n);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i)
            rhs[i] = b[3 * i + c];
        const auto sol = solve_krylov(M, rhs, linear_tol, linear_maxit);
        for (int i = 0; i < n; ++i)
            u.coeffs[3 * i + c] = sol.x[i];
    }
    return u;
}

VectorField ritz_project(const std::shared_ptr<const FeSpace>& space, const VectorFn& f,
                         const VectorGradFn& grad_f, double linear_tol, int linear_maxit) {
    const FeSpace& sp = *space;
    const int n = sp.n_nodes();
    const SparseMatrix K = assemble_stiffness(sp);
    const SparseMatrix M = assemble_mass(sp);

    // m_i = <phi_i, 1> = mass row sums.
    std::vector<double> m(n, 0.0);
    {
        std::vector<double> ones(n, 1.0);
        M.spmv(ones.data(), m.data());
    }

    // Augmented singular-Neumann system, shared pattern for all components.
    std::vector<Triplet> triplets;
    triplets.reserve(K.nnz() + 2 * n);
    for (int i = 0; i < n; ++i)
        for (int k = K.row_offsets()[i]; k < K.row_offsets()[i + 1]; ++k)
            triplets.push_back({i, K.col_indices()[k], K.values()[k]});
    for (int i = 0; i < n; ++i) {
        triplets.push_back({i, n, m[i]});
        triplets.push_back({n, i, m[i]});
    }
    const SparseMatrix A = SparseMatrix::from_triplets(n + 1, n + 1, triplets);

    // g_i = <grad f, grad phi_i>, and the mean of f, via the high rule.
    const QuadRule& rule = sp.high_rule();
    std::vector<double> g(3 * n, 0.0);
    Vec3 mean = {0.0, 0.0, 0.0};
    const int npe = sp.nodes_per_element();
    for (int e = 0; e < sp.n_elements(); ++e) {
        const auto& nodes = sp.element_nodes(e);
        const auto& gr = sp.element_grads(e);
        const double scale = sp.element_measure(e) / (sp.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            const auto xy = sp.map_point(e, rule.points[q]);
            const auto df = grad_f(xy[0], xy[1]);
            const Vec3 fv = f(xy[0], xy[1]);
            mean[0] += w * fv[0];
            mean[1] += w * fv[1];
            mean[2] += w * fv[2];
            for (int a = 0; a < npe; ++a)
                for (int c = 0; c < 3; ++c)
                    g[3 * nodes[a] + c] += w * (df[0][c] * gr[a][0] + df[1][c] * gr[a][1]);
        }
    }

    VectorField u(space);
    std::vector<double> rhs(n + 1);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i)
            rhs[i] = g[3 * i + c];
        rhs[n] = mean[c];
        const auto sol = solve_krylov(A, rhs, linear_tol, linear_maxit);
        for (int i = 0; i < n; ++i)
            u.coeffs[3 * i + c] = sol.x[i];
    }
    return u;
}

VectorField apply_discrete_laplacian(const FeSpace& space, const SparseMatrix& M,
                                     const SparseMatrix& K, const VectorField& v,
                                     double linear_tol, int linear_maxit) {
    const int n = space.n_nodes();
    VectorField w(v.space);
    std::vector<double> comp(n), rhs(n);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i)
            comp[i] = v.coeffs[3 * i + c];
        K.spmv(comp.data(), rhs.data());
        for (int i = 0; i < n; ++i)
            rhs[i] = -rhs[i];
        const auto sol = solve_krylov(M, rhs, linear_tol, linear_maxit);
        for (int i = 0; i < n; ++i)
            w.coeffs[3 * i + c] = sol.x[i];
    }
    return w;
}

double norm(const FeSpace& space, const VectorField& v, NormKind kind) {
    if (kind == NormKind::Linf) {
        double m = 0.0;
        for (int i = 0; i < space.n_nodes(); ++i)
            m = std::max(m, norm2(v.node_value(i)));
        return m;
    }
    if (kind == NormKind::H1_semi || kind == NormKind::H1) {
        double semi_sq = 0.0;
        for (int e = 0; e < space.n_elements(); ++e) {
            const auto& nodes = space.element_nodes(e);
            const auto& g = space.element_grads(e);
            double acc = 0.0;
            for (int c = 0; c < 3; ++c) {
                double dx = 0.0, dy = 0.0;
                for (int a = 0; a < space.nodes_per_element(); ++a) {
                    const double cv = v.coeffs[3 * nodes[a] + c];
                    dx += cv * g[a][0];
                    dy += cv * g[a][1];
                }
                acc += dx * dx + dy * dy;
            }
            semi_sq += space.element_measure(e) * acc;
        }
        if (kind == NormKind::H1_semi)
            return std::sqrt(semi_sq);
        const double l2 = norm(space, v, NormKind::L2);
        return std::sqrt(l2 * l2 + semi_sq);
    }

    const QuadRule& rule = (kind == NormKind::L4) ? space.high_rule() : space.low_rule();
    double acc = 0.0;
    for (int e = 0; e < space.n_elements(); ++e) {
        const double scale = space.element_measure(e) / (space.mesh().dim == 1 ? 1.0 : 0.5);
        for (int q = 0; q < rule.n_points(); ++q) {
            const double w = rule.weights[q] * scale;
            const Vec3 uq = field_at_qp(space, rule, v, e, q);
            const double sq = norm2_sq(uq);
            acc += w * (kind == NormKind::L4 ? sq * sq : sq);
        }
    }
    return (kind == NormKind::L4) ? std::pow(acc, 0.25) : std::sqrt(acc);
}

VectorField prolong(const VectorField& coarse, const std::shared_ptr<const FeSpace>& fine_space) {
    const Mesh& cm = coarse.space->mesh();
    const Mesh& fm = fine_space->mesh();
    if (fm.dim != cm.dim || fm.divisions != 2 * cm.divisions)
        throw config_error("prolong: fine mesh is not the uniform refinement of the coarse mesh");

    VectorField fine(fine_space);
    const int n = cm.divisions;
    if (cm.dim == 1) {
        for (int i = 0; i <= n; ++i)
            fine.set_node_value(2 * i, coarse.node_value(i));
        for (int i = 0; i < n; ++i) {
            const Vec3 mid = 0.5 * (coarse.node_value(i) + coarse.node_value(i + 1));
            fine.set_node_value(2 * i + 1, mid);
        }
        return fine;
    }

    const int cs = n + 1;
    const int fs = 2 * n + 1;
    auto cidx = [cs](int i, int j) { return j * cs + i; };
    auto fidx = [fs](int i, int j) { return j * fs + i; };
    for (int j = 0; j <= 2 * n; ++j) {
        for (int i = 0; i <= 2 * n; ++i) {
            Vec3 v;
            if (i % 2 == 0 && j % 2 == 0) {
                v = coarse.node_value(cidx(i / 2, j / 2));
            } else if (j % 2 == 0) {
                v = 0.5 * (coarse.node_value(cidx(i / 2, j / 2)) +
                           coarse.node_value(cidx(i / 2 + 1, j / 2)));
            } else if (i % 2 == 0) {
                v = 0.5 * (coarse.node_value(cidx(i / 2, j / 2)) +
                           coarse.node_value(cidx(i / 2, j / 2 + 1)));
            } else {
                // Midpoint of the lower-left to upper-right cell diagonal.
                v = 0.5 * (coarse.node_value(cidx(i / 2, j / 2)) +
                           coarse.node_value(cidx(i / 2 + 1, j / 2 + 1)));
            }
            fine.set_node_value(fidx(i, j), v);
        }
    }
    return fine;
}

} // namespace llbar
