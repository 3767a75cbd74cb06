// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 Agora Contributors

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace agora {

struct SvdFactors {
    Eigen::MatrixXd U;  // D×r, orthonormal columns
    Eigen::VectorXd S;  // r, descending
    Eigen::MatrixXd Vt; // r×V, orthonormal rows
    bool rank_deficient = false;
};

namespace detail {

/// Standard-normal stream built on mt19937_64 with an explicit
/// Box-Muller transform, so the realized values are identical across
/// standard libraries (std::normal_distribution is not portable).
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = unit_open();
        const double u2 = unit_open();
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = two_pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double unit_open() { // uniform on (0, 1]
        return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(y.rows(), y.cols());
    return qr.householderQ() * q;
}

} // namespace detail

/// Rank-r truncated SVD by seeded randomized subspace iteration
/// (oversampling 10, 7 power iterations). Deterministic given the seed.
/// Sign convention: in each U column the entry of largest magnitude is
/// made nonnegative. Singular values below 1e-12 · S(0) are zeroed along
/// with their vectors and the result is flagged rank-deficient.
template <typename MatrixT>
SvdFactors truncated_svd(const MatrixT& X, std::size_t r, std::uint64_t seed) {
    const auto rows = static_cast<std::size_t>(X.rows());
    const auto cols = static_cast<std::size_t>(X.cols());
    if (r > std::min(rows, cols))
        throw std::invalid_argument("truncated_svd: r exceeds min(rows, cols)");

    const std::size_t oversample = 10;
    const std::size_t l = std::min(r + oversample, std::min(rows, cols));
    const int power_iterations = 7;

    detail::GaussianStream gauss(seed);
    Eigen::MatrixXd omega(cols, l);
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < cols; ++i)
            omega(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gauss.next();

    Eigen::MatrixXd q = detail::orthonormalize(X * omega);
    for (int it = 0; it < power_iterations; ++it) {
        const Eigen::MatrixXd z = detail::orthonormalize(X.transpose() * q);
        q = detail::orthonormalize(X * z);
    }

    // B = QᵀX is l×V with V possibly large; take QR of Bᵀ so the final
    // Jacobi SVD runs on an l×l triangle.
    const Eigen::MatrixXd bt = X.transpose() * q; // V×l
    const Eigen::MatrixXd q2 = detail::orthonormalize(bt);
    const Eigen::MatrixXd rt = (q2.transpose() * bt).transpose(); // l×l, B = rt · q2ᵀ

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rt, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdFactors out;
    out.U = q * svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
    out.S = svd.singularValues().head(static_cast<Eigen::Index>(r));
    out.Vt = (q2 * svd.matrixV().leftCols(static_cast<Eigen::Index>(r))).transpose();

    const double floor = out.S(0) * 1e-12;
    for (Eigen::Index k = 0; k < out.S.size(); ++k) {
        if (out.S(k) < floor || out.S(0) == 0.0) {
            out.S(k) = 0.0;
            out.U.col(k).setZero();
            out.Vt.row(k).setZero();
            out.rank_deficient = true;
            continue;
        }
        Eigen::Index argmax = 0;
        out.U.col(k).cwiseAbs().maxCoeff(&argmax);
        if (out.U(argmax, k) < 0.0) {
            out.U.col(k) = -out.U.col(k);
            out.Vt.row(k) = -out.Vt.row(k);
        }
    }
    return out;
}

} // namespace agora
