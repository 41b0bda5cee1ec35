#pragma once

#include <cstddef>
#include <memory>
#include <tuple>
#include <vector>

namespace llbar {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

// Compressed-row sparse matrix. Within each row the column indices are
// strictly increasing; duplicate triplets are summed during construction.
// Immutable layout after construction; values may be rewritten in place by
// owners that keep the pattern fixed (see find_value).
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);

    // Adopts prebuilt CSR arrays; callers guarantee sorted column indices per
    // row. Used by owners that manage a fixed pattern themselves.
    static SparseMatrix from_csr(int rows, int cols, std::vector<int> row_offsets,
                                 std::vector<int> col_indices, std::vector<double> values);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nnz() const { return static_cast<int>(values_.size()); }

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    // y = A x, fixed left-to-right accumulation per row.
    void spmv(const double* x, double* y) const;
    std::vector<double> spmv(const std::vector<double>& x) const;

    // y += factor * A x.
    void spmv_add(const double* x, double* y, double factor = 1.0) const;

    // Blockwise action of a scalar N x N matrix on a node-major interleaved
    // 3-vector field: y[3i+c] = sum_j A_ij x[3j+c].
    void spmv_block3(const double* x, double* y) const;
    std::vector<double> spmv_block3(const std::vector<double>& x) const;
    void spmv_block3_add(const double* x, double* y, double factor = 1.0) const;

    // Pointer to the stored value at (i, j), or nullptr if outside the
    // pattern. Binary search within the row.
    double* find_value(int i, int j);
    double value_at(int i, int j) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_offsets_;
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

struct KrylovResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  // final true residual norm ||b - A x||
};

// Solves A x = b to ||A x - b|| <= tol * max(1, ||b||) with a Jacobi
// (diagonal) preconditioned BiCGStab, falling back to restarted GMRES if
// BiCGStab stagnates. Throws solver_error on non-convergence, carrying the
// residual history.
KrylovResult solve_krylov(const SparseMatrix& A, const std::vector<double>& b, double tol,
                          int maxit, const std::vector<double>& guess = {});

// Sparse LU for the coupled Newton systems, whose spectrum defeats
// diagonally preconditioned Krylov methods. The symbolic analysis is reused
// across refactorisations with an unchanged pattern.
class DirectSolver {
public:
    DirectSolver();
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    void factorize(const SparseMatrix& A);  // throws solver_error if singular
    std::vector<double> solve(const std::vector<double>& b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Vector helpers shared by the solvers.
double dot_product(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

} // namespace llbar
