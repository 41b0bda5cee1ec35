#include "llbar/errors.hpp"
#include "llbar/sparse.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace llbar;

TEST_CASE("from_triplets basics") {
    const auto I = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
    CHECK(I.nnz() == 2);
    CHECK(I.value_at(0, 0) == 1.0);
    CHECK(I.value_at(0, 1) == 0.0);

    const auto D = SparseMatrix::from_triplets(1, 1, {{0, 0, 1.0}, {0, 0, 2.0}});
    CHECK(D.nnz() == 1);
    CHECK(D.value_at(0, 0) == 3.0);

    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 2, 1.0}}), config_error);
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{-1, 0, 1.0}}), config_error);
}

TEST_CASE("triplet permutations build bit-identical matrices") {
    oracle::Rng rng(42);
    std::vector<Triplet> t;
    for (int k = 0; k < 60; ++k)
        t.push_back({static_cast<int>(rng.uniform(0, 5)), static_cast<int>(rng.uniform(0, 5)),
                     rng.uniform(-1, 1)});
    const auto A = SparseMatrix::from_triplets(5, 5, t);
    for (int perm = 0; perm < 5; ++perm) {
        // Deterministic shuffle.
        for (std::size_t i = t.size(); i > 1; --i)
            std::swap(t[i - 1], t[static_cast<std::size_t>(rng.uniform(0, double(i)))]);
        const auto B = SparseMatrix::from_triplets(5, 5, t);
        CHECK(A.row_offsets() == B.row_offsets());
        CHECK(A.col_indices() == B.col_indices());
        CHECK(A.values() == B.values());
    }
}

TEST_CASE("spmv identity, zero, and dense oracle") {
    const auto I = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
    const std::vector<double> x = {1.5, -2.0, 0.25};
    CHECK(I.spmv(x) == x);

    const auto Z = SparseMatrix::from_triplets(3, 3, {});
    CHECK(Z.spmv(x) == std::vector<double>{0.0, 0.0, 0.0});

    oracle::Rng rng(7);
    std::vector<Triplet> t;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            t.push_back({i, j, rng.uniform(-2, 2)});
    const auto A = SparseMatrix::from_triplets(5, 5, t);
    const auto D = oracle::dense_from_sparse(A);
    std::vector<double> v(5);
    for (auto& c : v)
        c = rng.uniform(-1, 1);
    const auto y = A.spmv(v);
    for (int i = 0; i < 5; ++i) {
        double expect = 0.0;
        for (int j = 0; j < 5; ++j)
            expect += D.at(i, j) * v[j];
        CHECK(std::abs(y[i] - expect) < 1e-15);
    }

    CHECK(A.spmv(v) == y);  // repeated calls bit-identical
    CHECK_THROWS_AS(A.spmv(std::vector<double>(4, 0.0)), config_error);
}

TEST_CASE("triplet union merges linearly under spmv") {
    oracle::Rng rng(11);
    std::vector<Triplet> ta, tb;
    for (int k = 0; k < 25; ++k) {
        ta.push_back({static_cast<int>(rng.uniform(0, 4)), static_cast<int>(rng.uniform(0, 4)),
                      rng.uniform(-1, 1)});
        tb.push_back({static_cast<int>(rng.uniform(0, 4)), static_cast<int>(rng.uniform(0, 4)),
                      rng.uniform(-1, 1)});
    }
    std::vector<Triplet> tu = ta;
    tu.insert(tu.end(), tb.begin(), tb.end());
    const auto A = SparseMatrix::from_triplets(4, 4, ta);
    const auto B = SparseMatrix::from_triplets(4, 4, tb);
    const auto U = SparseMatrix::from_triplets(4, 4, tu);
    std::vector<double> x(4);
    for (auto& c : x)
        c = rng.uniform(-1, 1);
    const auto yu = U.spmv(x);
    const auto ya = A.spmv(x);
    const auto yb = B.spmv(x);
    for (int i = 0; i < 4; ++i)
        CHECK(yu[i] == doctest::Approx(ya[i] + yb[i]).epsilon(1e-13));
}

TEST_CASE("solve_krylov trivial systems") {
    const auto I = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
    const std::vector<double> b = {2.0, -1.0, 0.5};
    const auto r = solve_krylov(I, b, 1e-12, 100);
    CHECK(r.iterations <= 1);
    for (int i = 0; i < 3; ++i)
        CHECK(r.x[i] == doctest::Approx(b[i]).epsilon(1e-12));

    const auto D = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}});
    const auto rd = solve_krylov(D, {2.0, 8.0}, 1e-12, 100);
    CHECK(rd.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rd.x[1] == doctest::Approx(2.0).epsilon(1e-12));

    // Zero right-hand side short-circuits to the zero vector.
    const auto rz = solve_krylov(D, {0.0, 0.0}, 1e-12, 100);
    CHECK(rz.x == std::vector<double>{0.0, 0.0});
    CHECK(rz.iterations == 0);
}

namespace {

SparseMatrix random_well_conditioned(int n, oracle::Rng& rng) {
    // Diagonally dominant dense-ish matrix.
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double v = rng.uniform(-1, 1) / n;
            row += std::abs(v);
            t.push_back({i, j, v});
        }
        t.push_back({i, i, row + 1.0 + rng.uniform(0, 1)});
    }
    return SparseMatrix::from_triplets(n, n, t);
}

} // namespace

TEST_CASE("solve_krylov matches dense LU on a well-conditioned 50x50 system") {
    oracle::Rng rng(123);
    const auto A = random_well_conditioned(50, rng);
    std::vector<double> b(50);
    for (auto& c : b)
        c = rng.uniform(-1, 1);
    const auto r = solve_krylov(A, b, 1e-13, 5000);
    const auto xd = oracle::lu_solve(oracle::dense_from_sparse(A), b);
    double diff = 0.0;
    for (int i = 0; i < 50; ++i)
        diff += (r.x[i] - xd[i]) * (r.x[i] - xd[i]);
    CHECK(std::sqrt(diff) < 1e-8);

    // Residual contract.
    std::vector<double> res(50);
    A.spmv(r.x.data(), res.data());
    for (int i = 0; i < 50; ++i)
        res[i] -= b[i];
    CHECK(norm2(res) <= 1e-13 * std::max(1.0, norm2(b)));
}

TEST_CASE("solve_krylov reports non-convergence with residual history") {
    oracle::Rng rng(5);
    const auto A = random_well_conditioned(40, rng);
    std::vector<double> b(40);
    for (auto& c : b)
        c = rng.uniform(-1, 1);
    try {
        solve_krylov(A, b, 1e-14, 1);
        FAIL("expected solver_error");
    } catch (const solver_error& e) {
        CHECK(!e.residuals.empty());
        CHECK(e.final_residual() > 0.0);
    }
}

TEST_CASE("direct solver matches dense LU and reuses the pattern") {
    oracle::Rng rng(9);
    auto A = random_well_conditioned(30, rng);
    std::vector<double> b(30);
    for (auto& c : b)
        c = rng.uniform(-1, 1);

    DirectSolver lu;
    lu.factorize(A);
    auto x = lu.solve(b);
    auto xd = oracle::lu_solve(oracle::dense_from_sparse(A), b);
    for (int i = 0; i < 30; ++i)
        CHECK(x[i] == doctest::Approx(xd[i]).epsilon(1e-10));

    // Same pattern, new values.
    auto& vals = A.mutable_values();
    for (auto& v : vals)
        v *= 2.0;
    lu.factorize(A);
    x = lu.solve(b);
    xd = oracle::lu_solve(oracle::dense_from_sparse(A), b);
    for (int i = 0; i < 30; ++i)
        CHECK(x[i] == doctest::Approx(xd[i]).epsilon(1e-10));

    const auto S = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    DirectSolver lu2;
    CHECK_THROWS_AS(lu2.factorize(S), solver_error);
}
