#include "llbar/sparse.hpp"

#include "llbar/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace llbar {

struct DirectSolver::Impl {
    Eigen::SparseMatrix<double> mat;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    std::vector<int> pattern_offsets;
    std::vector<int> pattern_cols;
    std::vector<int> csr_to_csc;
    bool analyzed = false;

    bool same_pattern(const SparseMatrix& A) const {
        return analyzed && pattern_offsets == A.row_offsets() && pattern_cols == A.col_indices();
    }

    void build_structure(const SparseMatrix& A) {
        const int n = A.rows();
        const int nnz = A.nnz();
        pattern_offsets = A.row_offsets();
        pattern_cols = A.col_indices();

        // Column-major structure; scanning CSR rows in order keeps each
        // column's row indices sorted.
        std::vector<int> col_start(n + 1, 0);
        for (int k = 0; k < nnz; ++k)
            col_start[pattern_cols[k] + 1]++;
        for (int c = 0; c < n; ++c)
            col_start[c + 1] += col_start[c];

        std::vector<int> next = col_start;
        std::vector<int> inner(nnz);
        csr_to_csc.resize(nnz);
        for (int i = 0; i < n; ++i)
            for (int k = pattern_offsets[i]; k < pattern_offsets[i + 1]; ++k) {
                const int pos = next[pattern_cols[k]]++;
                inner[pos] = i;
                csr_to_csc[k] = pos;
            }

        mat.resize(n, n);
        mat.resizeNonZeros(nnz);
        std::copy(col_start.begin(), col_start.end(), mat.outerIndexPtr());
        std::copy(inner.begin(), inner.end(), mat.innerIndexPtr());
        lu.analyzePattern(mat);
        analyzed = true;
    }
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factorize(const SparseMatrix& A) {
    if (A.rows() != A.cols())
        throw config_error("DirectSolver: matrix must be square");
    if (!impl_->same_pattern(A))
        impl_->build_structure(A);
    double* vals = impl_->mat.valuePtr();
    const auto& src = A.values();
    for (int k = 0; k < A.nnz(); ++k)
        vals[impl_->csr_to_csc[k]] = src[k];
    impl_->lu.factorize(impl_->mat);
    if (impl_->lu.info() != Eigen::Success)
        throw solver_error("DirectSolver: factorization failed (matrix singular?)", {});
}

std::vector<double> DirectSolver::solve(const std::vector<double>& b) const {
    if (!impl_->analyzed)
        throw config_error("DirectSolver: solve before factorize");
    if (static_cast<int>(b.size()) != impl_->mat.rows())
        throw config_error("DirectSolver: rhs length mismatch");
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success)
        throw solver_error("DirectSolver: back substitution failed", {});
    return std::vector<double>(x.data(), x.data() + x.size());
}

} // namespace llbar
