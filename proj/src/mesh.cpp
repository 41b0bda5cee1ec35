#include "llbar/mesh.hpp"

#include "llbar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace llbar {

double Mesh::element_measure(int e) const {
    const auto& el = elements[e];
    if (dim == 1) {
        return nodes[el[1]][0] - nodes[el[0]][0];
    }
    const auto& a = nodes[el[0]];
    const auto& b = nodes[el[1]];
    const auto& c = nodes[el[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

Mesh build_structured_mesh(int dim, int n) {
    if (dim != 1 && dim != 2)
        throw config_error("build_structured_mesh: dim must be 1 or 2, got " + std::to_string(dim));
    if (n < 1)
        throw config_error("build_structured_mesh: divisions must be >= 1, got " + std::to_string(n));

    Mesh mesh;
    mesh.dim = dim;
    mesh.divisions = n;
    const double dx = 1.0 / n;

    if (dim == 1) {
        mesh.nodes.reserve(n + 1);
        for (int i = 0; i <= n; ++i)
            mesh.nodes.push_back({i * dx, 0.0});
        mesh.elements.reserve(n);
        for (int i = 0; i < n; ++i)
            mesh.elements.push_back({i, i + 1, -1});
        mesh.h = dx;
        return mesh;
    }

    mesh.nodes.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            mesh.nodes.push_back({i * dx, j * dx});

    // Two positively oriented triangles per cell, cut along lower-left to
    // upper-right.
    mesh.elements.reserve(2 * n * n);
    const int stride = n + 1;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = j * stride + i;
            const int b = a + 1;
            const int c = a + stride + 1;
            const int d = a + stride;
            mesh.elements.push_back({a, b, c});
            mesh.elements.push_back({a, c, d});
        }
    }
    mesh.h = std::sqrt(2.0) * dx;
    return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
    return build_structured_mesh(mesh.dim, 2 * mesh.divisions);
}

double mesh_size(const Mesh& mesh) {
    double h = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.elements[e];
        const int m = mesh.nodes_per_element();
        for (int a = 0; a < m; ++a) {
            for (int b = a + 1; b < m; ++b) {
                const double ex = mesh.nodes[el[a]][0] - mesh.nodes[el[b]][0];
                const double ey = mesh.nodes[el[a]][1] - mesh.nodes[el[b]][1];
                h = std::max(h, std::hypot(ex, ey));
            }
        }
    }
    return h;
}

} // namespace llbar
