#include "cc/tangent_cone.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "cc/newton.hpp"

namespace cc {

namespace {

void check_same_algebra(const GroupElement& x, const GroupElement& y) {
    if (x.algebra != y.algebra)
        throw AlgebraMismatch("group elements belong to different algebras");
}

// Jacobian of theta_g at first-kind coordinates y.
Matrix theta_jacobian(const CCStructure& S, const Point& g, const Vector& y,
                      const FlowOptions& opts) {
    return fd_jacobian_central(
        [&](const Vector& v) { return coords1_forward(S, g, v, opts); }, y,
        opts.fd_step);
}

}  // namespace

std::string RateTable::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "epsilon,deviation\n";
    for (const auto& [eps, dev] : rows) out << eps << "," << dev << "\n";
    out << "# slope=" << slope << "\n";
    return out.str();
}

GradedAlgebra nilpotentize(const CCStructure& S, const Point& g) {
    auto consts = structure_constants(S, g);
    GradedAlgebra A;
    A.base = g;
    A.N = S.N;
    A.M = S.M;
    A.degrees = S.degrees;
    A.c_hat.assign(S.N, Matrix::Zero(S.N, S.N));
    for (int i = 0; i < S.N; ++i)
        for (int j = 0; j < S.N; ++j)
            for (int k = 0; k < S.N; ++k)
                if (S.degrees[i] + S.degrees[j] == S.degrees[k])
                    A.c_hat[i](j, k) = consts.at(i, j, k);

    // Jacobi identity must survive the graded truncation.
    double residual = 0.0;
    for (int i = 0; i < S.N; ++i)
        for (int j = 0; j < S.N; ++j)
            for (int k = 0; k < S.N; ++k)
                for (int l = 0; l < S.N; ++l) {
                    double sum = 0.0;
                    for (int m = 0; m < S.N; ++m)
                        sum += A.at(i, j, m) * A.at(m, k, l) +
                               A.at(j, k, m) * A.at(m, i, l) +
                               A.at(k, i, m) * A.at(m, j, l);
                    residual = std::max(residual, std::abs(sum));
                }
    if (residual > 1e-9)
        throw JacobiViolation("nilpotentized constants violate Jacobi, residual " +
                              std::to_string(residual));
    return A;
}

Vector algebra_bracket(const GradedAlgebra& A, const Vector& u, const Vector& v) {
    Vector w = Vector::Zero(A.N);
    for (int i = 0; i < A.N; ++i) {
        if (u[i] == 0.0) continue;
        for (int j = 0; j < A.N; ++j) {
            if (v[j] == 0.0) continue;
            for (int k = 0; k < A.N; ++k) {
                double c = A.at(i, j, k);
                if (c != 0.0) w[k] += u[i] * v[j] * c;
            }
        }
    }
    return w;
}

Vector bch_coords(const GradedAlgebra& A, const Vector& x, const Vector& y) {
    if (A.M > 4)
        throw UnsupportedDepth("BCH coefficients tabulated only up to step 4");
    Vector z = x + y;
    if (A.M >= 2) {
        Vector xy = algebra_bracket(A, x, y);
        z += 0.5 * xy;
        if (A.M >= 3) {
            Vector xxy = algebra_bracket(A, x, xy);
            Vector yxy = algebra_bracket(A, y, xy);
            z += (1.0 / 12.0) * (xxy - yxy);
            if (A.M >= 4) z -= (1.0 / 24.0) * algebra_bracket(A, y, xxy);
        }
    }
    return z;
}

GroupElement bch_product(const GradedAlgebra& A, const GroupElement& x,
                         const GroupElement& y) {
    check_same_algebra(x, y);
    return GroupElement{x.algebra, bch_coords(A, x.x, y.x)};
}

Vector bch_tangent(const GradedAlgebra& A, const Vector& a, const Vector& v) {
    Vector w = v + 0.5 * algebra_bracket(A, a, v);
    if (A.M >= 3)
        w += (1.0 / 12.0) * algebra_bracket(A, a, algebra_bracket(A, a, v));
    return w;
}

Vector dilation_coords(const GradedAlgebra& A, const Vector& x, double t) {
    Vector base = (t < 0.0) ? Vector(-x) : x;
    double s = std::abs(t);
    Vector out(A.N);
    for (int i = 0; i < A.N; ++i) out[i] = base[i] * std::pow(s, A.degrees[i]);
    return out;
}

GroupElement dilation(const GradedAlgebra& A, const GroupElement& x, double t) {
    return GroupElement{x.algebra, dilation_coords(A, x.x, t)};
}

double hom_norm(const GradedAlgebra& A, const Vector& x) {
    return graded_max_norm(x, A.degrees);
}

double hom_norm(const GradedAlgebra& A, const GroupElement& x) {
    return hom_norm(A, x.x);
}

Point hat_flow(const CCStructure& S, const GradedAlgebra& A, const Point& p,
               const Vector& coeffs, double t, const FlowOptions& opts) {
    Vector y = coords1_inverse(S, A.base, p, opts).x;
    Vector z = bch_coords(A, y, t * coeffs);
    return coords1_forward(S, A.base, z, opts);
}

Point local_group_product(const CCStructure& S, const GradedAlgebra& A,
                          const Point& u, const Point& v, const FlowOptions& opts) {
    Vector xu = coords1_inverse(S, A.base, u, opts).x;
    Vector xv = coords1_inverse(S, A.base, v, opts).x;
    return coords1_forward(S, A.base, bch_coords(A, xu, xv), opts);
}

double d_g_infty(const CCStructure& S, const GradedAlgebra& A, const Point& u,
                 const Point& v, const FlowOptions& opts) {
    Vector xu = coords1_inverse(S, A.base, u, opts).x;
    Vector xv = coords1_inverse(S, A.base, v, opts).x;
    return hom_norm(A, bch_coords(A, Vector(-xv), xu));
}

Vector hat_field(const CCStructure& S, const GradedAlgebra& A, int i, const Point& x,
                 const FlowOptions& opts) {
    Vector y = coords1_inverse(S, A.base, x, opts).x;
    Matrix Dtheta = theta_jacobian(S, A.base, y, opts);
    return Dtheta * bch_tangent(A, y, Vector::Unit(A.N, i - 1));
}

Vector rescaled_field(const CCStructure& S, const GradedAlgebra& A, int i,
                      const Point& x, double eps, const FlowOptions& opts) {
    Vector y = coords1_inverse(S, A.base, x, opts).x;
    Vector yq = dilation_coords(A, y, eps);
    Point q = coords1_forward(S, A.base, yq, opts);
    if (!S.in_chart(q)) throw ChartExit("dilated sample point left the chart");

    Vector V = std::pow(eps, A.degrees[i - 1]) * S.fields[i - 1].eval(q);
    // (Delta^g_{1/eps})_* = Dtheta(y) . diag(eps^{-deg}) . [Dtheta(yq)]^{-1}
    Matrix Dq = theta_jacobian(S, A.base, yq, opts);
    Vector w = Dq.partialPivLu().solve(V);
    for (int k = 0; k < A.N; ++k) w[k] *= std::pow(eps, -A.degrees[k]);
    return theta_jacobian(S, A.base, y, opts) * w;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [eps, dev] : rows) {
        if (eps <= 0.0) continue;
        double lx = std::log(eps), ly = std::log(std::max(dev, 1e-16));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    double denom = n * sxx - sx * sx;
    return (denom == 0.0) ? 0.0 : (n * sxy - sx * sy) / denom;
}

RateTable rescaled_field_deviation(const CCStructure& S, const Point& g,
                                   const std::vector<double>& eps_grid,
                                   const std::vector<Point>& sample_points,
                                   const FlowOptions& opts) {
    auto A = nilpotentize(S, g);
    RateTable table;
    for (double eps : eps_grid) {
        double dev = 0.0;
        for (const auto& x : sample_points) {
            for (int i = 1; i <= S.N; ++i) {
                Vector diff = rescaled_field(S, A, i, x, eps, opts) -
                              hat_field(S, A, i, x, opts);
                dev = std::max(dev, diff.lpNorm<Eigen::Infinity>());
            }
        }
        table.rows.emplace_back(eps, dev);
    }
    table.slope = fit_loglog_slope(table.rows);
    return table;
}

CCStructure nilpotent_model(const GradedAlgebra& A, double chart_radius) {
    CCStructure S;
    S.N = A.N;
    S.M = A.M;
    S.degrees = A.degrees;
    S.chart_radius = chart_radius;
    // Recover filtration dims from the degree list.
    S.filtration_dims.assign(A.M, 0);
    for (int k = 0; k < A.N; ++k) S.filtration_dims[A.degrees[k] - 1] += 1;
    for (int d = 1; d < A.M; ++d) S.filtration_dims[d] += S.filtration_dims[d - 1];

    // Xhat_i(x) = e_i + 1/2 [x,e_i] + 1/12 [x,[x,e_i]] componentwise as
    // polynomials in x.
    for (int i = 0; i < A.N; ++i) {
        std::vector<Polynomial> comp(A.N, Polynomial(A.N));
        comp[i].add_term(1.0, std::vector<int>(A.N, 0));
        // b1[k] = sum_j x_j c_hat_jik  (linear)
        std::vector<Polynomial> b1(A.N, Polynomial(A.N));
        for (int j = 0; j < A.N; ++j)
            for (int k = 0; k < A.N; ++k) {
                double c = A.at(j, i, k);
                if (c != 0.0) {
                    std::vector<int> pows(A.N, 0);
                    pows[j] = 1;
                    b1[k].add_term(c, std::move(pows));
                }
            }
        for (int k = 0; k < A.N; ++k) comp[k] = comp[k] + Polynomial::constant(0.5, A.N) * b1[k];
        if (A.M >= 3) {
            // b2[l] = sum_{m,k} x_m c_hat_mkl b1[k]  (quadratic)
            for (int l = 0; l < A.N; ++l) {
                Polynomial b2(A.N);
                for (int m = 0; m < A.N; ++m)
                    for (int k = 0; k < A.N; ++k) {
                        double c = A.at(m, k, l);
                        if (c == 0.0 || b1[k].terms().empty()) continue;
                        Polynomial xm(A.N);
                        std::vector<int> pows(A.N, 0);
                        pows[m] = 1;
                        xm.add_term(c, std::move(pows));
                        b2 = b2 + xm * b1[k];
                    }
                comp[l] = comp[l] + Polynomial::constant(1.0 / 12.0, A.N) * b2;
            }
        }
        S.fields.push_back(PolyField{std::move(comp)});
    }
    return S;
}

RateTable metrics_deviation_report(const CCStructure& S, const Point& g,
                                   const std::vector<double>& eps_grid, int n,
                                   std::uint64_t seed, const FlowOptions& opts) {
    RateTable table;
    if (n <= 0) return table;
    auto A = nilpotentize(S, g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> field(1, S.dim_h1());

    auto sample_box = [&](double eps) {
        // Box(g, eps) in coords of the 1st kind: |x_i| <= eps^{deg X_i}.
        Vector x(S.N);
        for (int i = 0; i < S.N; ++i)
            x[i] = unit(rng) * std::pow(eps, S.degrees[i]);
        return coords1_forward(S, g, x, opts);
    };

    for (double eps : eps_grid) {
        double dev = 0.0;
        for (int s = 0; s < n; ++s) {
            try {
                Point u = sample_box(eps), v = sample_box(eps);
                dev = std::max(dev, std::abs(d_g_infty(S, A, u, v, opts) -
                                             d_infty(S, u, v, opts)));
            } catch (const NoConvergence&) {
            } catch (const ChartExit&) {
            }
        }
        // L-segment horizontal words: hatted vs. original composition.
        const int L = 4;
        for (int s = 0; s < std::max(1, n / 4); ++s) {
            try {
                Point w = g, w_hat = g;
                for (int l = 0; l < L; ++l) {
                    int j = field(rng);
                    double b = unit(rng) * eps;
                    w = flow(S, w, Vector::Unit(S.N, j - 1), b, opts);
                    w_hat = hat_flow(S, A, w_hat, Vector::Unit(S.N, j - 1), b, opts);
                }
                dev = std::max(dev, std::max(d_g_infty(S, A, w_hat, w, opts),
                                             d_infty(S, w_hat, w, opts)));
            } catch (const NoConvergence&) {
            } catch (const ChartExit&) {
            }
        }
        table.rows.emplace_back(eps, dev);
    }
    table.slope = fit_loglog_slope(table.rows);
    return table;
}

}  // namespace cc
