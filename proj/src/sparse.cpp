#include "llbar/sparse.hpp"

#include "llbar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace llbar {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw config_error("from_triplets: index (" + std::to_string(t.row) + ", " +
                               std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                               std::to_string(cols));
    }

    std::vector<Triplet> sorted = triplets;
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        // Duplicates are ordered by value so the summation below does not
        // depend on the input permutation.
        return std::tie(a.row, a.col, a.value) < std::tie(b.row, b.col, b.value);
    });

    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_offsets_.assign(rows + 1, 0);

    std::size_t i = 0;
    while (i < sorted.size()) {
        const int r = sorted[i].row;
        const int c = sorted[i].col;
        double sum = 0.0;
        while (i < sorted.size() && sorted[i].row == r && sorted[i].col == c) {
            sum += sorted[i].value;
            ++i;
        }
        m.col_indices_.push_back(c);
        m.values_.push_back(sum);
        m.row_offsets_[r + 1]++;
    }
    for (int r = 0; r < rows; ++r)
        m.row_offsets_[r + 1] += m.row_offsets_[r];
    return m;
}

SparseMatrix SparseMatrix::from_csr(int rows, int cols, std::vector<int> row_offsets,
                                    std::vector<int> col_indices, std::vector<double> values) {
    if (static_cast<int>(row_offsets.size()) != rows + 1 || col_indices.size() != values.size() ||
        row_offsets.back() != static_cast<int>(col_indices.size()))
        throw config_error("from_csr: inconsistent array sizes");
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_offsets_ = std::move(row_offsets);
    m.col_indices_ = std::move(col_indices);
    m.values_ = std::move(values);
    return m;
}

void SparseMatrix::spmv(const double* x, double* y) const {
    for (int r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            acc += values_[k] * x[col_indices_[k]];
        y[r] = acc;
    }
}

std::vector<double> SparseMatrix::spmv(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != cols_)
        throw config_error("spmv: vector length " + std::to_string(x.size()) +
                           " does not match cols " + std::to_string(cols_));
    std::vector<double> y(rows_);
    spmv(x.data(), y.data());
    return y;
}

void SparseMatrix::spmv_add(const double* x, double* y, double factor) const {
    for (int r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            acc += values_[k] * x[col_indices_[k]];
        y[r] += factor * acc;
    }
}

void SparseMatrix::spmv_block3(const double* x, double* y) const {
    for (int r = 0; r < rows_; ++r) {
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            const double v = values_[k];
            const double* xj = x + 3 * col_indices_[k];
            acc0 += v * xj[0];
            acc1 += v * xj[1];
            acc2 += v * xj[2];
        }
        y[3 * r] = acc0;
        y[3 * r + 1] = acc1;
        y[3 * r + 2] = acc2;
    }
}

std::vector<double> SparseMatrix::spmv_block3(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != 3 * cols_)
        throw config_error("spmv_block3: vector length mismatch");
    std::vector<double> y(3 * rows_);
    spmv_block3(x.data(), y.data());
    return y;
}

void SparseMatrix::spmv_block3_add(const double* x, double* y, double factor) const {
    for (int r = 0; r < rows_; ++r) {
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            const double v = values_[k];
            const double* xj = x + 3 * col_indices_[k];
            acc0 += v * xj[0];
            acc1 += v * xj[1];
            acc2 += v * xj[2];
        }
        y[3 * r] += factor * acc0;
        y[3 * r + 1] += factor * acc1;
        y[3 * r + 2] += factor * acc2;
    }
}

double* SparseMatrix::find_value(int i, int j) {
    const int lo = row_offsets_[i];
    const int hi = row_offsets_[i + 1];
    auto begin = col_indices_.begin() + lo;
    auto end = col_indices_.begin() + hi;
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j)
        return nullptr;
    return &values_[lo + (it - begin)];
}

double SparseMatrix::value_at(int i, int j) const {
    const double* v = const_cast<SparseMatrix*>(this)->find_value(i, j);
    return v == nullptr ? 0.0 : *v;
}

double dot_product(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot_product(a, a)); }

namespace {

std::vector<double> jacobi_scaling(const SparseMatrix& A) {
    std::vector<double> d(A.rows(), 1.0);
    for (int r = 0; r < A.rows(); ++r) {
        const double v = A.value_at(r, r);
        if (v != 0.0)
            d[r] = 1.0 / v;
    }
    return d;
}

// Right-preconditioned BiCGStab on A D x' = b so the recursed residual is the
// true residual. Returns true on success.
bool bicgstab(const SparseMatrix& A, const std::vector<double>& b, const std::vector<double>& d,
              double target, int maxit, std::vector<double>& x, int& iters,
              std::vector<double>& history) {
    const int n = A.rows();
    std::vector<double> r(n), r0(n), p(n), v(n), s(n), t(n), tmp(n);

    A.spmv(x.data(), r.data());
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - r[i];
    r0 = r;

    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);

    double rnorm = norm2(r);
    history.push_back(rnorm);
    if (rnorm <= target) {
        iters = 0;
        return true;
    }

    for (int it = 1; it <= maxit; ++it) {
        const double rho_new = dot_product(r0, r);
        if (std::abs(rho_new) < 1e-290) {
            // Shadow vector lost orthogonality; restart from the current
            // residual and keep iterating.
            r0 = r;
            rho = dot_product(r0, r);
            if (std::abs(rho) < 1e-290) {
                iters = it;
                return false;
            }
            p = r;
        } else {
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for (int i = 0; i < n; ++i)
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }

        for (int i = 0; i < n; ++i)
            tmp[i] = d[i] * p[i];
        A.spmv(tmp.data(), v.data());
        const double r0v = dot_product(r0, v);
        if (std::abs(r0v) < 1e-290) {
            iters = it;
            return false;
        }
        alpha = rho / r0v;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * d[i] * p[i];
            s[i] = r[i] - alpha * v[i];
        }
        double snorm = norm2(s);
        if (snorm <= target) {
            r = s;
            history.push_back(snorm);
            iters = it;
            return true;
        }

        for (int i = 0; i < n; ++i)
            tmp[i] = d[i] * s[i];
        A.spmv(tmp.data(), t.data());
        const double tt = dot_product(t, t);
        if (tt < 1e-290) {
            iters = it;
            return false;
        }
        omega = dot_product(t, s) / tt;
        if (omega == 0.0) {
            iters = it;
            return false;
        }
        for (int i = 0; i < n; ++i) {
            x[i] += omega * d[i] * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm2(r);
        history.push_back(rnorm);
        if (rnorm <= target) {
            iters = it;
            return true;
        }
    }
    iters = maxit;
    return false;
}

// Restarted GMRES with modified Gram-Schmidt, right diagonal preconditioning.
bool gmres(const SparseMatrix& A, const std::vector<double>& b, const std::vector<double>& d,
           double target, int maxit, int restart, std::vector<double>& x, int& iters,
           std::vector<double>& history) {
    const int n = A.rows();
    const int m = std::min(restart, maxit);
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
    std::vector<double> H((m + 1) * m, 0.0);
    std::vector<double> cs(m), sn(m), g(m + 1), tmp(n), w(n);

    iters = 0;
    while (iters < maxit) {
        A.spmv(x.data(), w.data());
        for (int i = 0; i < n; ++i)
            V[0][i] = b[i] - w[i];
        double beta = norm2(V[0]);
        history.push_back(beta);
        if (beta <= target)
            return true;
        for (int i = 0; i < n; ++i)
            V[0][i] /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        std::fill(H.begin(), H.end(), 0.0);

        int k = 0;
        for (; k < m && iters < maxit; ++k, ++iters) {
            for (int i = 0; i < n; ++i)
                tmp[i] = d[i] * V[k][i];
            A.spmv(tmp.data(), w.data());
            for (int j = 0; j <= k; ++j) {
                const double hjk = dot_product(w, V[j]);
                H[j * m + k] = hjk;
                for (int i = 0; i < n; ++i)
                    w[i] -= hjk * V[j][i];
            }
            const double hk1 = norm2(w);
            H[(k + 1) * m + k] = hk1;
            if (hk1 > 0.0)
                for (int i = 0; i < n; ++i)
                    V[k + 1][i] = w[i] / hk1;

            // Apply stored Givens rotations, then form a new one.
            for (int j = 0; j < k; ++j) {
                const double t1 = cs[j] * H[j * m + k] + sn[j] * H[(j + 1) * m + k];
                const double t2 = -sn[j] * H[j * m + k] + cs[j] * H[(j + 1) * m + k];
                H[j * m + k] = t1;
                H[(j + 1) * m + k] = t2;
            }
            const double denom = std::hypot(H[k * m + k], H[(k + 1) * m + k]);
            if (denom == 0.0)
                break;
            cs[k] = H[k * m + k] / denom;
            sn[k] = H[(k + 1) * m + k] / denom;
            H[k * m + k] = denom;
            H[(k + 1) * m + k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            history.push_back(std::abs(g[k + 1]));
            if (std::abs(g[k + 1]) <= target) {
                ++k;
                ++iters;
                break;
            }
        }

        // Back-substitute and update x.
        std::vector<double> y(k, 0.0);
        for (int j = k - 1; j >= 0; --j) {
            double s = g[j];
            for (int l = j + 1; l < k; ++l)
                s -= H[j * m + l] * y[l];
            y[j] = s / H[j * m + j];
        }
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < n; ++i)
                x[i] += d[i] * y[j] * V[j][i];

        A.spmv(x.data(), w.data());
        for (int i = 0; i < n; ++i)
            w[i] = b[i] - w[i];
        const double truenorm = norm2(w);
        history.push_back(truenorm);
        if (truenorm <= target)
            return true;
        if (k == 0)
            return false;
    }
    return false;
}

} // namespace

KrylovResult solve_krylov(const SparseMatrix& A, const std::vector<double>& b, double tol,
                          int maxit, const std::vector<double>& guess) {
    if (A.rows() != A.cols())
        throw config_error("solve_krylov: matrix must be square");
    if (static_cast<int>(b.size()) != A.rows())
        throw config_error("solve_krylov: rhs length mismatch");
    if (tol <= 0.0)
        throw config_error("solve_krylov: tolerance must be positive");

    const int n = A.rows();
    KrylovResult result;
    result.x.assign(n, 0.0);
    if (!guess.empty()) {
        if (static_cast<int>(guess.size()) != n)
            throw config_error("solve_krylov: guess length mismatch");
        result.x = guess;
    }

    const double bnorm = norm2(b);
    const double target = tol * std::max(1.0, bnorm);
    if (bnorm == 0.0 && guess.empty()) {
        result.residual = 0.0;
        return result;
    }

    const std::vector<double> d = jacobi_scaling(A);
    std::vector<double> history;

    int iters = 0;
    bool ok = bicgstab(A, b, d, target, maxit, result.x, iters, history);
    result.iterations = iters;
    if (std::getenv("LLBAR_KRYLOV_LOG"))
        std::fprintf(stderr, "krylov: n=%d bicgstab ok=%d iters=%d\n", n, ok ? 1 : 0, iters);

    // True residual check; the BiCGStab recursion can drift.
    std::vector<double> r(n);
    A.spmv(result.x.data(), r.data());
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - r[i];
    result.residual = norm2(r);
    if (ok && result.residual <= target)
        return result;

    int gmres_iters = 0;
    ok = gmres(A, b, d, target, maxit, 100, result.x, gmres_iters, history);
    result.iterations += gmres_iters;
    A.spmv(result.x.data(), r.data());
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - r[i];
    result.residual = norm2(r);
    if (ok && result.residual <= target)
        return result;

    history.push_back(result.residual);
    throw solver_error("solve_krylov: no convergence within " + std::to_string(maxit) +
                           " iterations (residual " + std::to_string(result.residual) + ", target " +
                           std::to_string(target) + ")",
                       history);
}

} // namespace llbar
