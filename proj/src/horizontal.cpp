#include "cc/horizontal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cc/newton.hpp"

namespace cc {

namespace {

int horizontal_dim(const GradedAlgebra& A) {
    int h1 = 0;
    for (int d : A.degrees) h1 += (d == 1) ? 1 : 0;
    return h1;
}

// Is e_k in the span of iterated brackets of the horizontal layer?
bool bracket_generated(const GradedAlgebra& A, int k) {
    int target_deg = A.degrees[k - 1];
    int h1 = horizontal_dim(A);
    std::vector<Vector> prev;
    for (int a = 0; a < h1; ++a) prev.push_back(Vector::Unit(A.N, a));
    for (int d = 2; d <= target_deg; ++d) {
        std::vector<Vector> cur;
        for (int a = 0; a < h1; ++a)
            for (const auto& w : prev)
                cur.push_back(algebra_bracket(A, Vector::Unit(A.N, a), w));
        prev = std::move(cur);
    }
    if (prev.empty()) return false;
    Matrix B(A.N, static_cast<int>(prev.size()));
    for (int c = 0; c < B.cols(); ++c) B.col(c) = prev[c];
    Vector ek = Vector::Unit(A.N, k - 1);
    Vector sol = B.colPivHouseholderQr().solve(ek);
    return (B * sol - ek).lpNorm<Eigen::Infinity>() <= 1e-8;
}

std::vector<std::pair<int, double>> inverse_word(
    const std::vector<std::pair<int, double>>& w) {
    std::vector<std::pair<int, double>> out(w.rbegin(), w.rend());
    for (auto& [j, a] : out) a = -a;
    return out;
}

// Newton correction of the word parameters so the replay hits e_k exactly.
void solve_word(const GradedAlgebra& A, int k,
                std::vector<std::pair<int, double>>& segments) {
    Vector ek = Vector::Unit(A.N, k - 1);
    Vector p0(static_cast<int>(segments.size()));
    for (int i = 0; i < p0.size(); ++i) p0[i] = segments[i].second;

    auto replay = [&](const Vector& params) {
        auto segs = segments;
        for (size_t i = 0; i < segs.size(); ++i) segs[i].second = params[i];
        return replay_plan(A, segs);
    };
    if ((replay(p0) - ek).lpNorm<Eigen::Infinity>() > 1e-10) {
        NewtonOptions nopts;
        nopts.residual_tol = 1e-10;
        Vector p = newton_solve(replay, ek, p0, nopts);
        for (size_t i = 0; i < segments.size(); ++i) segments[i].second = p[i];
    }
    segments.erase(std::remove_if(segments.begin(), segments.end(),
                                  [](const auto& s) {
                                      return std::abs(s.second) < 1e-13;
                                  }),
                   segments.end());
}

// 4-segment commutator word whose replay is e_m up to higher-degree terms.
std::vector<std::pair<int, double>> raw_comm_word(const GradedAlgebra& A, int m) {
    int h1 = horizontal_dim(A);
    int best_a = 1, best_b = 2;
    double best_c = 0.0;
    for (int a = 1; a <= h1; ++a)
        for (int b = 1; b <= h1; ++b)
            if (std::abs(A.at(a - 1, b - 1, m - 1)) > std::abs(best_c)) {
                best_a = a;
                best_b = b;
                best_c = A.at(a - 1, b - 1, m - 1);
            }
    double s = 1.0 / std::sqrt(std::abs(best_c));
    return {{best_a, s}, {best_b, s}, {best_a, -s}, {best_b, -s}};
}

void append_correction_slots(std::vector<std::pair<int, double>>& segments, int h1) {
    for (int rep = 0; rep < 2; ++rep)
        for (int a = 1; a <= h1; ++a) segments.emplace_back(a, 0.0);
}

Point apply_phi_segments(const CCStructure& S, const Point& p,
                         const DecompositionPlan& plan, double t,
                         const FlowOptions& opts) {
    Point q = p;
    if (t >= 0.0) {
        for (const auto& [j, a] : plan.segments)
            q = flow(S, q, Vector::Unit(S.N, j - 1), a * t, opts);
    } else {
        for (auto it = plan.segments.rbegin(); it != plan.segments.rend(); ++it)
            q = flow(S, q, Vector::Unit(S.N, it->first - 1), it->second * t, opts);
    }
    return q;
}

// Replay of a plan scaled to parameter t, exactly in the group.
Vector plan_group_value(const GradedAlgebra& A, const DecompositionPlan& plan,
                        double t) {
    auto segs = plan.segments;
    if (t >= 0.0) {
        for (auto& [j, a] : segs) a *= t;
    } else {
        segs = inverse_word(segs);
        for (auto& [j, a] : segs) a *= -t;
    }
    return replay_plan(A, segs);
}

}  // namespace

double HorizontalPath::length() const {
    double len = 0.0;
    for (const auto& [j, a] : segments) len += std::abs(a);
    return len;
}

std::string HorizontalPath::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "segment_index,field_index,parameter\n";
    for (size_t i = 0; i < segments.size(); ++i)
        out << i << "," << segments[i].first << "," << segments[i].second << "\n";
    return out.str();
}

Vector replay_plan(const GradedAlgebra& A,
                   const std::vector<std::pair<int, double>>& segments) {
    Vector z = Vector::Zero(A.N);
    for (const auto& [j, a] : segments)
        z = bch_coords(A, z, Vector(a * Vector::Unit(A.N, j - 1)));
    return z;
}

Point replay_path(const CCStructure& S, const HorizontalPath& path,
                  const FlowOptions& opts) {
    Point p = path.start;
    for (const auto& [j, a] : path.segments)
        p = flow(S, p, Vector::Unit(S.N, j - 1), a, opts);
    return p;
}

DecompositionPlan fs_decompose(const GradedAlgebra& A, int k) {
    int h1 = horizontal_dim(A);
    if (k <= h1 || k > A.N)
        throw Error("fs_decompose expects a non-horizontal field index");
    int deg = A.degrees[k - 1];
    if (deg > 3) throw UnsupportedDepth("decomposition words tabulated up to degree 3");
    if (!bracket_generated(A, k))
        throw NotGenerated("field " + std::to_string(k) +
                           " is not generated by horizontal brackets");

    std::vector<std::pair<int, double>> segments;
    if (deg == 2) {
        segments = raw_comm_word(A, k);
    } else {
        // deg 3: group commutator of a horizontal segment with a degree-2 word.
        int best_a = 1, best_m = 0;
        double best_c = 0.0;
        for (int a = 1; a <= h1; ++a)
            for (int m = h1 + 1; m <= A.N; ++m)
                if (A.degrees[m - 1] == 2 &&
                    std::abs(A.at(a - 1, m - 1, k - 1)) > std::abs(best_c)) {
                    best_a = a;
                    best_m = m;
                    best_c = A.at(a - 1, m - 1, k - 1);
                }
        if (best_m == 0) {
            // fall back to a generic seed corrected by Newton
            for (int rep = 0; rep < 3; ++rep)
                for (int a = 1; a <= h1; ++a) segments.emplace_back(a, 0.05);
            append_correction_slots(segments, h1);
        } else {
            auto inner = raw_comm_word(A, best_m);
            double lam = std::pow(std::abs(best_c), -1.0 / 3.0);
            for (auto& [j, a] : inner) a *= lam;
            std::vector<std::pair<int, double>> U = {{best_a, lam}};
            std::vector<std::pair<int, double>> first = (best_c > 0) ? U : inner;
            std::vector<std::pair<int, double>> second = (best_c > 0) ? inner : U;
            segments = first;
            segments.insert(segments.end(), second.begin(), second.end());
            auto fi = inverse_word(first), si = inverse_word(second);
            segments.insert(segments.end(), fi.begin(), fi.end());
            segments.insert(segments.end(), si.begin(), si.end());
        }
    }

    // correct the seed word in place; widen with extra slots only if needed
    try {
        solve_word(A, k, segments);
    } catch (const NoConvergence&) {
        append_correction_slots(segments, h1);
        solve_word(A, k, segments);
    }
    Vector check = replay_plan(A, segments) - Vector::Unit(A.N, k - 1);
    if (check.lpNorm<Eigen::Infinity>() > 1e-8)
        throw NoConvergence("decomposition word replay residual too large");

    DecompositionPlan plan;
    plan.k = k;
    plan.segments = std::move(segments);
    plan.L = static_cast<int>(plan.segments.size());
    for (const auto& [j, a] : plan.segments)
        plan.coef_bound = std::max(plan.coef_bound, std::abs(a));
    return plan;
}

Point phi_curve(const CCStructure& S, const Point& g, const DecompositionPlan& plan,
                int k, double t, const FlowOptions& opts) {
    if (k <= S.dim_h1()) return flow(S, g, Vector::Unit(S.N, k - 1), t, opts);
    return apply_phi_segments(S, g, plan, t, opts);
}

Point phi_curve(const CCStructure& S, const Point& g, int k, double t,
                const FlowOptions& opts) {
    if (k <= S.dim_h1()) return flow(S, g, Vector::Unit(S.N, k - 1), t, opts);
    auto plan = fs_decompose(nilpotentize(S, g), k);
    return apply_phi_segments(S, g, plan, t, opts);
}

std::vector<DecompositionPlan> phi_plans(const GradedAlgebra& A) {
    std::vector<DecompositionPlan> plans;
    for (int k = horizontal_dim(A) + 1; k <= A.N; ++k)
        plans.push_back(fs_decompose(A, k));
    return plans;
}

Point phi_system(const CCStructure& S, const Point& g,
                 const std::vector<DecompositionPlan>& plans, const Vector& t,
                 const FlowOptions& opts) {
    int h1 = S.dim_h1();
    Point p = g;
    for (int k = 1; k <= h1; ++k)
        p = flow(S, p, Vector::Unit(S.N, k - 1), t[k - 1], opts);
    for (int k = h1 + 1; k <= S.N; ++k)
        p = apply_phi_segments(S, p, plans[k - h1 - 1], t[k - 1], opts);
    return p;
}

Point phi_system(const CCStructure& S, const Point& g, const Vector& t,
                 const FlowOptions& opts) {
    return phi_system(S, g, phi_plans(nilpotentize(S, g)), t, opts);
}

Vector nilpotent_phi_inverse(const GradedAlgebra& A,
                             const std::vector<DecompositionPlan>& plans,
                             const Vector& x) {
    int h1 = horizontal_dim(A);
    Vector t = Vector::Zero(A.N);
    Vector z = Vector::Zero(A.N);
    for (int k = 1; k <= A.N; ++k) {
        double c = x[k - 1] - z[k - 1];
        int deg = A.degrees[k - 1];
        double tk = (c >= 0 ? 1.0 : -1.0) * std::pow(std::abs(c), 1.0 / deg);
        t[k - 1] = tk;
        Vector w = (k <= h1) ? Vector(tk * Vector::Unit(A.N, k - 1))
                             : plan_group_value(A, plans[k - h1 - 1], tk);
        z = bch_coords(A, z, w);
    }
    return t;
}

ChowResult chow_solve(const CCStructure& S, const Point& g, const Point& v,
                      const FlowOptions& opts) {
    Vector x = coords1_inverse(S, g, v, opts).x;
    double dinf = graded_max_norm(x, S.degrees);

    ChowResult res;
    res.path.start = g;
    res.path.endpoint = g;
    res.t = Vector::Zero(S.N);
    if (dinf < 1e-12) return res;

    auto A = nilpotentize(S, g);
    auto plans = phi_plans(A);
    auto F = [&](const Vector& t) { return phi_system(S, g, plans, t, opts); };
    NewtonOptions nopts;
    nopts.residual_tol = 1e-9;

    Vector t;
    try {
        t = newton_solve(F, v, nilpotent_phi_inverse(A, plans, x), nopts);
    } catch (const NoConvergence&) {
        // continuation through the half-dilated target
        Vector xh = dilation_coords(A, x, 0.5);
        Point vh = coords1_forward(S, g, xh, opts);
        Vector th = newton_solve(F, vh, nilpotent_phi_inverse(A, plans, xh), nopts);
        t = newton_solve(F, v, Vector(2.0 * th), nopts);
    }
    res.t = t;

    int h1 = S.dim_h1();
    for (int k = 1; k <= h1; ++k)
        if (t[k - 1] != 0.0) res.path.segments.emplace_back(k, t[k - 1]);
    for (int k = h1 + 1; k <= S.N; ++k) {
        double tk = t[k - 1];
        if (tk == 0.0) continue;
        const auto& segs = plans[k - h1 - 1].segments;
        if (tk >= 0.0) {
            for (const auto& [j, a] : segs) res.path.segments.emplace_back(j, a * tk);
        } else {
            for (auto it = segs.rbegin(); it != segs.rend(); ++it)
                res.path.segments.emplace_back(it->first, it->second * tk);
        }
    }
    res.path.segments.erase(
        std::remove_if(res.path.segments.begin(), res.path.segments.end(),
                       [](const auto& s) { return std::abs(s.second) < 1e-15; }),
        res.path.segments.end());
    res.path.endpoint = replay_path(S, res.path, opts);
    if ((res.path.endpoint - v).lpNorm<Eigen::Infinity>() > 1e-7)
        throw NoConvergence("chow path replay misses the target");

    double amax = 0.0;
    for (const auto& [j, a] : res.path.segments) amax = std::max(amax, std::abs(a));
    res.c2_ratio = amax / dinf;
    return res;
}

namespace {

struct ControlProblem {
    const CCStructure& S;
    Point g;
    int h1;
    int m;
    FlowOptions fopts;

    Vector embed(const Eigen::Ref<const Vector>& u) const {
        Vector c = Vector::Zero(S.N);
        c.head(h1) = u;
        return c;
    }
    // Forward sim keeping the per-piece states.
    std::vector<Point> states(const Matrix& U) const {
        std::vector<Point> y(m + 1);
        y[0] = g;
        for (int l = 0; l < m; ++l)
            y[l + 1] = flow(S, y[l], embed(U.col(l)), 1.0 / m, fopts);
        return y;
    }
    double control_length(const Matrix& U) const {
        double len = 0.0;
        for (int l = 0; l < m; ++l) len += U.col(l).norm();
        return len / m;
    }
    // Endpoint Jacobian w.r.t. all controls, via per-piece FD Jacobians
    // accumulated backward.
    Matrix endpoint_jacobian(const Matrix& U, const std::vector<Point>& y) const {
        const double h = 1e-6;
        int N = S.N;
        std::vector<Matrix> A_l(m), B_l(m);
        for (int l = 0; l < m; ++l) {
            A_l[l].resize(N, N);
            for (int i = 0; i < N; ++i) {
                Point yp = y[l];
                yp[i] += h;
                A_l[l].col(i) =
                    (flow(S, yp, embed(U.col(l)), 1.0 / m, fopts) - y[l + 1]) / h;
            }
            B_l[l].resize(N, h1);
            for (int i = 0; i < h1; ++i) {
                Vector up = U.col(l);
                up[i] += h;
                B_l[l].col(i) = (flow(S, y[l], embed(up), 1.0 / m, fopts) - y[l + 1]) / h;
            }
        }
        Matrix J(N, h1 * m);
        Matrix P = Matrix::Identity(N, N);
        for (int l = m - 1; l >= 0; --l) {
            J.block(0, h1 * l, N, h1) = P * B_l[l];
            P = P * A_l[l];
        }
        return J;
    }
};

}  // namespace

DistanceBound cc_distance(const CCStructure& S, const Point& g, const Point& v,
                          const CcOptions& opts) {
    DistanceBound bound;
    bound.path.start = g;
    bound.path.endpoint = g;
    double dinf = d_infty(S, g, v, opts.flow);
    if (dinf < 1e-12) return bound;

    ChowResult ch = chow_solve(S, g, v, opts.flow);
    bound.path = ch.path;
    double best = ch.path.length();

    int h1 = S.dim_h1();
    ControlProblem prob{S, g, h1, opts.m, opts.flow};

    // Initial controls from the chow path schedule.
    Matrix U = Matrix::Zero(h1, opts.m);
    double total = ch.path.length();
    if (total > 0.0) {
        std::vector<double> cum{0.0};
        for (const auto& [j, a] : ch.path.segments)
            cum.push_back(cum.back() + std::abs(a) / total);
        for (int l = 0; l < opts.m; ++l) {
            double tau = (l + 0.5) / opts.m;
            size_t seg = 0;
            while (seg + 1 < cum.size() - 1 && tau > cum[seg + 1]) ++seg;
            const auto& [j, a] = ch.path.segments[seg];
            U(j - 1, l) = (a >= 0 ? 1.0 : -1.0) * total;
        }
    }

    auto patched_length = [&](const Matrix& Uc, const Point& endpoint) {
        double len = prob.control_length(Uc);
        double gap = (endpoint - v).lpNorm<Eigen::Infinity>();
        if (gap < 1e-10) return len;
        try {
            return len + chow_solve(S, endpoint, v, opts.flow).path.length();
        } catch (const NoConvergence&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const double w = 1.0 / opts.m;
    double lm = 1e-6;
    int iters_left = opts.budget;
    auto flat = [&](const Matrix& M_) { return Vector(M_.reshaped()); };

    for (double rho = 1e2; rho <= opts.penalty_max && iters_left > 0; rho *= 10.0) {
        for (int it = 0; it < 12 && iters_left > 0; ++it, --iters_left) {
            auto y = prob.states(U);
            Vector r = y.back() - v;
            Vector q = flat(U);
            double obj = 0.5 * w * q.squaredNorm() + 0.5 * rho * r.squaredNorm();
            Matrix J = prob.endpoint_jacobian(U, y);
            Vector grad = w * q + rho * (J.transpose() * r);
            if (grad.lpNorm<Eigen::Infinity>() < 1e-12) break;

            bool accepted = false;
            for (int attempt = 0; attempt < 8; ++attempt) {
                Matrix H = rho * (J.transpose() * J);
                H.diagonal().array() += w + lm;
                Vector dq = H.ldlt().solve(-grad);
                Matrix Utry = U + Matrix(dq.reshaped(h1, opts.m));
                auto ytry = prob.states(Utry);
                Vector rtry = ytry.back() - v;
                double objtry = 0.5 * w * flat(Utry).squaredNorm() +
                                0.5 * rho * rtry.squaredNorm();
                if (objtry < obj) {
                    U = Utry;
                    lm = std::max(lm / 3.0, 1e-10);
                    accepted = true;
                    break;
                }
                lm *= 10.0;
            }
            if (!accepted) break;
        }
        best = std::min(best, patched_length(U, prob.states(U).back()));
    }
    bound.budget_exhausted = (iters_left == 0);
    bound.upper = best;
    bound.lower = std::min(best, opts.c1_hat * dinf);
    return bound;
}

BallBoxReport ball_box_report(const CCStructure& S, const Region& region,
                              const std::vector<double>& r_grid, int n,
                              std::uint64_t seed, const CcOptions& opts) {
    BallBoxReport report;
    if (n <= 0 || r_grid.empty()) return report;
    report.C1_hat = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (int s = 0; s < n; ++s) {
        Point x = region.center;
        for (int i = 0; i < S.N; ++i) x[i] += unit(rng) * region.half_width[i];
        double r = r_grid[s % r_grid.size()];
        Vector y(S.N);
        for (int i = 0; i < S.N; ++i)
            y[i] = unit(rng) * std::pow(r, S.degrees[i]);
        double dinf = graded_max_norm(y, S.degrees);
        if (dinf < 1e-8) continue;
        try {
            Point v = coords1_forward(S, x, y, opts.flow);
            double upper = cc_distance(S, x, v, opts).upper;
            double ratio = upper / dinf;
            report.C1_hat = std::min(report.C1_hat, ratio);
            report.C2_hat = std::max(report.C2_hat, ratio);
            ++report.sample_count;
        } catch (const NoConvergence&) {
        } catch (const ChartExit&) {
        }
    }
    if (report.sample_count == 0) report.C1_hat = 0.0;
    return report;
}

RateTable dcc_local_approx_report(const CCStructure& S, const Point& g,
                                  const std::vector<double>& eps_grid, int n,
                                  std::uint64_t seed, const CcOptions& opts) {
    RateTable table;
    if (n <= 0) return table;
    auto A = nilpotentize(S, g);
    auto model = nilpotent_model(A, S.chart_radius);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (double eps : eps_grid) {
        double dev = 0.0;
        for (int s = 0; s < n; ++s) {
            Vector xu(S.N), xv(S.N);
            for (int i = 0; i < S.N; ++i) {
                xu[i] = unit(rng) * std::pow(eps, S.degrees[i]);
                xv[i] = unit(rng) * std::pow(eps, S.degrees[i]);
            }
            try {
                Point u = coords1_forward(S, g, xu, opts.flow);
                Point v = coords1_forward(S, g, xv, opts.flow);
                double dcc = cc_distance(S, u, v, opts).upper;
                double dcc_model = cc_distance(model, xu, xv, opts).upper;
                dev = std::max(dev, std::abs(dcc - dcc_model));
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
