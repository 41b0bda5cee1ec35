#pragma once

#include <array>
#include <vector>

namespace llbar {

// Structured simplicial triangulation of the unit interval (dim 1) or unit
// square (dim 2). Nodes are numbered lexicographically with x fastest, and
// every square cell is split by the diagonal from its lower-left to its
// upper-right corner, so meshes built with divisions n and 2n are nested.
// Immutable after construction.
struct Mesh {
    int dim = 0;         // 1 or 2
    int divisions = 0;   // cells per axis
    std::vector<std::array<double, 2>> nodes;  // (x, y); y is 0 for dim 1
    std::vector<std::array<int, 3>> elements;  // node indices; [2] is -1 for dim 1
    double h = 0.0;      // maximal element diameter

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elements() const { return static_cast<int>(elements.size()); }
    int nodes_per_element() const { return dim + 1; }

    // Length (dim 1) or area (dim 2) of element e; positive for valid meshes.
    double element_measure(int e) const;
};

// Builds the structured mesh with n cells per axis. Throws config_error for
// dim outside {1,2} or n < 1.
Mesh build_structured_mesh(int dim, int n);

// Halves every cell edge; the coarse P1 space is a subspace of the fine one.
Mesh refine_uniform(const Mesh& mesh);

// Maximal element diameter (recomputed from the element list).
double mesh_size(const Mesh& mesh);

} // namespace llbar
