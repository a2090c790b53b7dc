// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IQLOC_LINALG_HPP
#define IQLOC_LINALG_HPP

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "iqloc/errors.hpp"

// Small dense helpers for symmetric information matrices. Parameters in a FIM
// routinely differ by 20+ orders of magnitude in scale (seconds vs radians vs
// path gain), so every conditioning decision is made on the diagonally
// equilibrated matrix S = D J D with D = diag(J)^-1/2.

namespace iqloc::linalg
{
    template <typename Derived>
    typename Derived::PlainObject symmetrize(const Eigen::MatrixBase<Derived> &m)
    {
        return 0.5 * (m + m.transpose());
    }

    // Returns D = diag(J)^-1/2; zero or negative diagonal entries map to 1.
    template <typename Derived>
    Eigen::VectorXd equilibration(const Eigen::MatrixBase<Derived> &J)
    {
        Eigen::VectorXd d(J.rows());
        for (Eigen::Index i = 0; i < J.rows(); ++i)
        {
            const double v = J(i, i);
            d(i) = (v > 0.0 && std::isfinite(v)) ? 1.0 / std::sqrt(v) : 1.0;
        }
        return d;
    }

    struct EquilibratedEigen
    {
        Eigen::VectorXd scale;       // D
        Eigen::VectorXd eigenvalues; // of D J D, ascending
        Eigen::MatrixXd eigenvectors;

        // lambda_max / lambda_min, infinite when lambda_min <= 0
        double condition() const
        {
            const double lo = eigenvalues(0);
            const double hi = eigenvalues(eigenvalues.size() - 1);
            if (!(lo > 0.0))
                return std::numeric_limits<double>::infinity();
            return hi / lo;
        }
    };

    template <typename Derived>
    EquilibratedEigen equilibrated_eigen(const Eigen::MatrixBase<Derived> &J)
    {
        EquilibratedEigen out;
        out.scale = equilibration(J);
        const Eigen::MatrixXd S = out.scale.asDiagonal() * symmetrize(Eigen::MatrixXd(J)) * out.scale.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        out.eigenvalues = es.eigenvalues();
        out.eigenvectors = es.eigenvectors();
        return out;
    }

    template <typename Derived>
    double equilibrated_condition(const Eigen::MatrixBase<Derived> &J)
    {
        return equilibrated_eigen(J).condition();
    }

    // Generalized inverse G of a PSD matrix (J G J = J) built from the
    // equilibrated eigendecomposition; eigenvalues below lambda_max / max_condition
    // are treated as exact zeros.
    template <typename Derived>
    Eigen::MatrixXd generalized_inverse(const Eigen::MatrixBase<Derived> &J, double max_condition, int *rank = nullptr)
    {
        const auto ee = equilibrated_eigen(J);
        const Eigen::Index n = ee.eigenvalues.size();
        const double cutoff = ee.eigenvalues(n - 1) / max_condition;
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
        int r = 0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (ee.eigenvalues(i) > cutoff && ee.eigenvalues(i) > 0.0)
            {
                inv(i) = 1.0 / ee.eigenvalues(i);
                ++r;
            }
        }
        if (rank)
            *rank = r;
        const Eigen::MatrixXd Sinv = ee.eigenvectors * inv.asDiagonal() * ee.eigenvectors.transpose();
        return ee.scale.asDiagonal() * Sinv * ee.scale.asDiagonal();
    }

    // Solves J X = B for symmetric positive definite J through an LDLT
    // factorization of the equilibrated matrix. Returns false (and leaves X
    // untouched) when the equilibrated condition number exceeds max_condition.
    inline bool solve_spd(const Eigen::MatrixXd &J, const Eigen::MatrixXd &B, double max_condition,
                          Eigen::MatrixXd &X, double &condition)
    {
        const auto ee = equilibrated_eigen(J);
        condition = ee.condition();
        if (!(condition <= max_condition))
            return false;
        const Eigen::MatrixXd S = ee.scale.asDiagonal() * symmetrize(J) * ee.scale.asDiagonal();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
        if (ldlt.info() != Eigen::Success)
            return false;
        X = ee.scale.asDiagonal() * ldlt.solve(ee.scale.asDiagonal() * B);
        return true;
    }

    // Smallest eigenvalue of a symmetric matrix (no equilibration).
    template <typename Derived>
    double min_eigenvalue(const Eigen::MatrixBase<Derived> &m)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(Eigen::MatrixXd(m)), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }

    // True when A - B is PSD up to -tol * ||A||_2.
    template <typename DA, typename DB>
    bool loewner_geq(const Eigen::MatrixBase<DA> &A, const Eigen::MatrixBase<DB> &B, double tol)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(Eigen::MatrixXd(A)), Eigen::EigenvaluesOnly);
        const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
        return min_eigenvalue(Eigen::MatrixXd(A - B)) >= -tol * norm;
    }

    // Inverse of a symmetric positive definite matrix, throwing E(condition)
    // when the equilibrated condition number exceeds max_condition.
    template <typename E, typename Derived>
    typename Derived::PlainObject inverse_spd(const Eigen::MatrixBase<Derived> &J, double max_condition)
    {
        Eigen::MatrixXd X;
        double condition = 0.0;
        const Eigen::MatrixXd Jd = J;
        if (!solve_spd(Jd, Eigen::MatrixXd::Identity(Jd.rows(), Jd.cols()), max_condition, X, condition))
            throw E(condition);
        return symmetrize(X);
    }
}

#endif
