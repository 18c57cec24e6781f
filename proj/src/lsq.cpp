#include "lod2rec/lsq.hpp"

namespace lod2rec {

ConstrainedLsqResult solve_equality_constrained(const Eigen::MatrixXd& H,
                                                const Eigen::VectorXd& g,
                                                const Eigen::MatrixXd& A,
                                                const Eigen::VectorXd& b) {
    const Eigen::Index n = H.rows();
    const Eigen::Index m = A.rows();

    if (m == 0) {
        ConstrainedLsqResult res;
        res.x = H.ldlt().solve(g);
        return res;
    }

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = H;
    kkt.topRightCorner(n, m) = A.transpose();
    kkt.bottomLeftCorner(m, n) = A;
    Eigen::VectorXd rhs(n + m);
    rhs.head(n) = g;
    rhs.tail(m) = b;

    // Redundant constraint rows make the KKT matrix singular but consistent;
    // a rank-revealing least-norm solve still returns the exact primal.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    Eigen::VectorXd sol = cod.solve(rhs);

    ConstrainedLsqResult res;
    res.x = sol.head(n);
    res.constraint_residual = m > 0 ? (A * res.x - b).cwiseAbs().maxCoeff() : 0.0;
    return res;
}

ConstrainedLsqResult project_onto_constraints(const Eigen::VectorXd& x0,
                                              const Eigen::MatrixXd& A,
                                              const Eigen::VectorXd& b) {
    const Eigen::Index n = x0.size();
    Eigen::MatrixXd H = 2.0 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = 2.0 * x0;
    return solve_equality_constrained(H, g, A, b);
}

} // namespace lod2rec
