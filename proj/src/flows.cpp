#include "cc/flows.hpp"

#include <cmath>
#include <random>

#include "cc/newton.hpp"

namespace cc {

namespace {

// y' = sum coeffs_i X_i(y), evaluated without temporaries in the hot loop.
void field_combination(const CCStructure& S, const Vector& coeffs, const Vector& y,
                       Vector& out) {
    out.setZero();
    for (int i = 0; i < S.N; ++i) {
        double c = coeffs[i];
        if (c == 0.0) continue;
        for (int k = 0; k < S.N; ++k)
            out[k] += c * S.fields[i].components[k].eval(y);
    }
}

}  // namespace

Point flow(const CCStructure& S, const Point& p, const Vector& coeffs, double t,
           const FlowOptions& opts) {
    if (!S.in_chart(p)) throw ChartExit("flow start outside chart box");
    if (t == 0.0) return p;

    double arc = std::abs(t) * coeffs.lpNorm<Eigen::Infinity>();
    int steps = std::max(1, static_cast<int>(std::ceil(arc / opts.h_max)));
    double h = t / steps;

    Vector y = p, k1(S.N), k2(S.N), k3(S.N), k4(S.N), tmp(S.N);
    for (int s = 0; s < steps; ++s) {
        field_combination(S, coeffs, y, k1);
        tmp = y + (0.5 * h) * k1;
        field_combination(S, coeffs, tmp, k2);
        tmp = y + (0.5 * h) * k2;
        field_combination(S, coeffs, tmp, k3);
        tmp = y + h * k3;
        field_combination(S, coeffs, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!S.in_chart(y)) throw ChartExit("flow trajectory left the chart box");
    }
    return y;
}

Point coords1_forward(const CCStructure& S, const Point& g, const Vector& x,
                      const FlowOptions& opts) {
    return flow(S, g, x, 1.0, opts);
}

Coords1 coords1_inverse(const CCStructure& S, const Point& g, const Point& u,
                        const FlowOptions& opts) {
    // theta_g(x) ~ g + F(g) x near 0, which is a good starting guess.
    Matrix F = frame_at(S, g);
    Vector x0 = F.partialPivLu().solve(u - g);

    NewtonOptions nopts;
    nopts.fd_step = opts.fd_step;
    nopts.residual_tol = opts.newton_tol;
    nopts.max_iter = opts.newton_max_iter;
    Vector x = newton_solve(
        [&](const Vector& v) { return coords1_forward(S, g, v, opts); }, u, x0, nopts);
    return Coords1{g, x};
}

Point coords2_forward(const CCStructure& S, const Point& g, const Vector& a,
                      const FlowOptions& opts) {
    // Index 1 applied first: exp(a_N X_N) o ... o exp(a_1 X_1)(g).
    Point p = g;
    for (int k = 0; k < S.N; ++k) {
        if (a[k] == 0.0) continue;
        p = flow(S, p, Vector::Unit(S.N, k), a[k], opts);
    }
    return p;
}

Coords2 coords2_inverse(const CCStructure& S, const Point& g, const Point& u,
                        const FlowOptions& opts) {
    Matrix F = frame_at(S, g);
    Vector a0 = F.partialPivLu().solve(u - g);

    NewtonOptions nopts;
    nopts.fd_step = opts.fd_step;
    nopts.residual_tol = opts.newton_tol;
    nopts.max_iter = opts.newton_max_iter;
    Vector a = newton_solve(
        [&](const Vector& v) { return coords2_forward(S, g, v, opts); }, u, a0, nopts);
    return Coords2{g, a};
}

double graded_max_norm(const Vector& y, const std::vector<int>& degrees) {
    double best = 0.0;
    for (int i = 0; i < y.size(); ++i) {
        double a = std::abs(y[i]);
        double v = (a == 0.0) ? 0.0 : std::pow(a, 1.0 / degrees[i]);
        best = std::max(best, v);
    }
    return best;
}

double graded_rho_norm(const Vector& y, const CCStructure& S) {
    double best = 0.0;
    int lo = 0;
    for (int layer = 0; layer < S.M; ++layer) {
        int hi = S.filtration_dims[layer];
        double sq = y.segment(lo, hi - lo).squaredNorm();
        double v = (sq == 0.0) ? 0.0 : std::pow(sq, 1.0 / (2.0 * (layer + 1)));
        best = std::max(best, v);
        lo = hi;
    }
    return best;
}

double d_infty(const CCStructure& S, const Point& g, const Point& u,
               const FlowOptions& opts) {
    return graded_max_norm(coords1_inverse(S, g, u, opts).x, S.degrees);
}

double d_2(const CCStructure& S, const Point& g, const Point& u,
           const FlowOptions& opts) {
    return graded_max_norm(coords2_inverse(S, g, u, opts).a, S.degrees);
}

double d_rho(const CCStructure& S, const Point& g, const Point& u,
             const FlowOptions& opts) {
    return graded_rho_norm(coords1_inverse(S, g, u, opts).x, S);
}

ConstantsEstimate metric_equivalence_report(const CCStructure& S, const Region& region,
                                            int n_samples, std::uint64_t seed,
                                            const FlowOptions& opts) {
    ConstantsEstimate est;
    est.region = region;
    est.c1_hat = std::numeric_limits<double>::infinity();
    est.c2_hat = 0.0;
    est.q_hat = 1.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto sample_point = [&]() {
        Point p = region.center;
        for (int i = 0; i < S.N; ++i) p[i] += unit(rng) * region.half_width[i];
        return p;
    };

    for (int s = 0; s < n_samples; ++s) {
        Point g = sample_point(), u = sample_point(), w = sample_point();
        double dinf_gu, dinf_ug, d2_gu;
        try {
            dinf_gu = d_infty(S, g, u, opts);
            dinf_ug = d_infty(S, u, g, opts);
            d2_gu = d_2(S, g, u, opts);
        } catch (const NoConvergence&) {
            continue;  // outside the diffeomorphism neighborhood
        } catch (const ChartExit&) {
            continue;
        }
        if (dinf_gu <= 0.0) continue;  // degenerate pair
        est.symmetry_defect =
            std::max(est.symmetry_defect, std::abs(dinf_gu - dinf_ug));
        double ratio = d2_gu / dinf_gu;
        est.c1_hat = std::min(est.c1_hat, ratio);
        est.c2_hat = std::max(est.c2_hat, ratio);
        try {
            double duw = d_infty(S, u, w, opts);
            double dwg = d_infty(S, w, g, opts);
            double dug = dinf_ug;
            if (duw + dwg > 0.0) est.q_hat = std::max(est.q_hat, dug / (duw + dwg));
        } catch (const NoConvergence&) {
        } catch (const ChartExit&) {
        }
        ++est.sample_count;
    }
    if (est.sample_count == 0) est.c1_hat = 0.0;
    return est;
}

}  // namespace cc
