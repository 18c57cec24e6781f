#pragma once

#include <Eigen/Dense>

namespace lod2rec {

// Exact solution of  min 0.5 x'Hx - g'x  s.t.  Ax = b  via the KKT system.
// H must be positive semidefinite with null(H) ∩ null(A) = {0}; redundant but
// consistent constraint rows are fine (rank-revealing solve).
struct ConstrainedLsqResult {
    Eigen::VectorXd x;
    double constraint_residual = 0.0;  // max |Ax - b|
};

ConstrainedLsqResult solve_equality_constrained(const Eigen::MatrixXd& H,
                                                const Eigen::VectorXd& g,
                                                const Eigen::MatrixXd& A,
                                                const Eigen::VectorXd& b);

// Projection of x0 onto {x : Ax = b}: the minimizer of ||x - x0||^2.
ConstrainedLsqResult project_onto_constraints(const Eigen::VectorXd& x0,
                                              const Eigen::MatrixXd& A,
                                              const Eigen::VectorXd& b);

} // namespace lod2rec
