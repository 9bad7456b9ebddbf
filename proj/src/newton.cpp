#include "cc/newton.hpp"

namespace cc {

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& F, const Vector& x,
                   double step) {
    Vector f0 = F(x);
    Matrix J(f0.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
        Vector xp = x;
        xp[j] += step;
        J.col(j) = (F(xp) - f0) / step;
    }
    return J;
}

Matrix fd_jacobian_central(const std::function<Vector(const Vector&)>& F,
                           const Vector& x, double step) {
    Matrix J;
    for (int j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        Vector col = (F(xp) - F(xm)) / (2.0 * step);
        if (J.size() == 0) J.resize(col.size(), x.size());
        J.col(j) = col;
    }
    return J;
}

Vector newton_solve(const std::function<Vector(const Vector&)>& F,
                    const Vector& target, const Vector& x0,
                    const NewtonOptions& opts) {
    Vector x = x0;
    Vector r = F(x) - target;
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < opts.max_iter; ++it) {
        if (rn <= opts.residual_tol) return x;
        Matrix J = fd_jacobian(F, x, opts.fd_step);
        Vector dx;
        if (J.rows() == J.cols()) {
            dx = J.partialPivLu().solve(-r);
        } else {
            dx = J.colPivHouseholderQr().solve(-r);
        }
        if (!dx.allFinite()) throw NoConvergence("newton step is not finite");

        // damping by halving on residual increase
        double lambda = 1.0;
        bool accepted = false;
        for (int d = 0; d < opts.max_damping; ++d) {
            Vector xn = x + lambda * dx;
            Vector rnew;
            try {
                rnew = F(xn) - target;
            } catch (const ChartExit&) {
                lambda *= 0.5;
                continue;
            }
            double rnn = rnew.lpNorm<Eigen::Infinity>();
            if (rnn < rn) {
                x = xn;
                r = rnew;
                rn = rnn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (rn <= opts.residual_tol) return x;
    throw NoConvergence("newton did not reach tolerance (residual " +
                        std::to_string(rn) + ")");
}

}  // namespace cc
