// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "agora/svd.hpp"
#include "support/synthetic.hpp"

TEST_CASE("svd: recovers an exact rank-1 factorization", "[svd]") {
    Eigen::VectorXd u(4);
    u << 0.5, -0.5, 0.5, 0.5;
    Eigen::VectorXd v(3);
    v << 0.0, 0.6, 0.8;
    const double sigma = 3.0;
    const Eigen::MatrixXd x = sigma * u * v.transpose();

    const auto f = agora::truncated_svd(x, 1, 7);
    CHECK(f.S(0) == Catch::Approx(sigma).epsilon(0).margin(1e-10));
    CHECK_FALSE(f.rank_deficient);

    // sign convention: the largest-magnitude entry of each U column is
    // nonnegative; here all |u_i| tie, and u as given starts positive.
    CHECK((f.U.col(0) - u).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((f.Vt.row(0).transpose() - v).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("svd: matches a dense jacobi decomposition", "[svd]") {
    for (const auto [rows, cols] : {std::pair<int, int>{12, 7}, {7, 12}, {9, 9}}) {
        const Eigen::MatrixXd x = synthetic::dense_uniform(rows, cols, 99 + rows);
        const auto r = static_cast<std::size_t>(std::min(rows, cols));
        const auto f = agora::truncated_svd(x, r, 1);

        Eigen::JacobiSVD<Eigen::MatrixXd> exact(x);
        INFO(rows << "x" << cols);
        CHECK((f.S - exact.singularValues().head(static_cast<Eigen::Index>(r)))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-8);
        // full-width factorization reconstructs the matrix
        CHECK((f.U * f.S.asDiagonal() * f.Vt - x).cwiseAbs().maxCoeff() <= 1e-8);
        // orthonormality of the recovered bases
        CHECK((f.U.transpose() * f.U - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() <=
              1e-10);
        CHECK((f.Vt * f.Vt.transpose() - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() <=
              1e-10);
    }
}

TEST_CASE("svd: truncation keeps the leading singular values", "[svd]") {
    const Eigen::MatrixXd x = synthetic::dense_uniform(20, 15, 5);
    const auto f = agora::truncated_svd(x, 4, 11);

    Eigen::JacobiSVD<Eigen::MatrixXd> exact(x);
    CHECK((f.S - exact.singularValues().head(4)).cwiseAbs().maxCoeff() <= 1e-8);
    for (int k = 1; k < 4; ++k) CHECK(f.S(k) <= f.S(k - 1));
}

TEST_CASE("svd: sign convention fixes each left vector", "[svd]") {
    const Eigen::MatrixXd x = synthetic::dense_uniform(10, 8, 31);
    const auto f = agora::truncated_svd(x, 5, 3);
    for (int k = 0; k < 5; ++k) {
        Eigen::Index argmax = 0;
        f.U.col(k).cwiseAbs().maxCoeff(&argmax);
        CHECK(f.U(argmax, k) >= 0.0);
    }
}

TEST_CASE("svd: rank-deficient input zeroes trailing components", "[svd]") {
    Eigen::MatrixXd x(6, 4);
    x.col(0) = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
    x.col(1) = 2.0 * x.col(0);
    x.col(2) = Eigen::VectorXd::Ones(6);
    x.col(3) = x.col(0) + x.col(2); // rank 2 overall

    const auto f = agora::truncated_svd(x, 3, 17);
    CHECK(f.rank_deficient);
    CHECK(f.S(2) == 0.0);
    CHECK(f.U.col(2).norm() == 0.0);
    CHECK(f.Vt.row(2).norm() == 0.0);
    CHECK(f.S(0) > 0.0);
    CHECK((f.U * f.S.asDiagonal() * f.Vt - x).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("svd: deterministic for a fixed seed", "[svd]") {
    Eigen::SparseMatrix<double, Eigen::RowMajor> x =
        synthetic::dtm_from_dense(synthetic::dense_uniform(30, 20, 8)).X;
    const auto a = agora::truncated_svd(x, 6, 42);
    const auto b = agora::truncated_svd(x, 6, 42);
    CHECK(a.U == b.U);
    CHECK(a.S == b.S);
    CHECK(a.Vt == b.Vt);
}

TEST_CASE("svd: sparse and dense inputs agree", "[svd]") {
    const Eigen::MatrixXd dense = synthetic::dense_uniform(18, 11, 13);
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse = dense.sparseView();
    const auto fd = agora::truncated_svd(dense, 5, 9);
    const auto fs = agora::truncated_svd(sparse, 5, 9);
    CHECK((fd.S - fs.S).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fd.U - fs.U).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("svd: rank bound is validated", "[svd]") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 5);
    CHECK_THROWS_WITH(agora::truncated_svd(x, 4, 1), "truncated_svd: r exceeds min(rows, cols)");
}
