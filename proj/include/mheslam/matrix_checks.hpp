#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace mheslam {

inline bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-9)
{
    return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

inline bool is_symmetric_psd(const Eigen::MatrixXd& m, double tol = 1e-9)
{
    return is_symmetric(m, tol) && min_eigenvalue(m) >= -tol;
}

inline bool is_symmetric_pd(const Eigen::MatrixXd& m, double tol = 1e-12)
{
    return is_symmetric(m) && min_eigenvalue(m) > tol;
}

}  // namespace mheslam
