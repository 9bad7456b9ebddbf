#include "cc/diff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace cc {

namespace {

Point nan_point(int n) {
    return Point::Constant(n, std::numeric_limits<double>::quiet_NaN());
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParseError("bad numeric map parameter: " + item);
        }
    }
    return out;
}

struct ElementFit {
    Vector a;
    double slope = 0.0;
    double last_residual = 0.0;
    double noise_floor = 0.0;
};

// Estimates the group element a with curve(h) ~ theta_{fg}(delta_h(a)) on the
// dyadic grid h0 * 2^{-l}, extrapolating the three finest levels.
ElementFit fit_element(const CCStructure& tgt, const GradedAlgebra& At,
                       const Point& fg,
                       const std::function<Point(double)>& curve,
                       const DiffOptions& opts, const FlowOptions& fo) {
    int levels = std::max(3, opts.levels);
    std::vector<double> hs(levels);
    std::vector<Vector> as(levels);
    std::vector<Vector> ys(levels);
    for (int l = 0; l < levels; ++l) {
        hs[l] = opts.h0 * std::pow(2.0, -l);
        Point u = curve(hs[l]);
        if (!u.allFinite())
            throw UndefinedAlongCurve("map undefined along the derivative curve");
        ys[l] = coords1_inverse(tgt, fg, u, fo).x;
        as[l] = Vector(tgt.N);
        for (int i = 0; i < tgt.N; ++i)
            as[l][i] = ys[l][i] / std::pow(hs[l], At.degrees[i]);
    }
    ElementFit fit;
    // third-order extrapolation: kills the h and h^2 terms of the expansion
    fit.a = (as[levels - 3] - 6.0 * as[levels - 2] + 8.0 * as[levels - 1]) / 3.0;

    std::vector<std::pair<double, double>> rows;
    for (int l = 0; l < levels; ++l) {
        double r = (as[l] - fit.a).lpNorm<Eigen::Infinity>();
        rows.emplace_back(hs[l], std::max(r, 1e-16));
    }
    fit.slope = fit_loglog_slope(rows);
    fit.last_residual = rows.back().second;
    // the h^{-deg} normalization amplifies the inversion noise; certification
    // must not demand more than the solve can deliver
    int deg_max = *std::max_element(At.degrees.begin(), At.degrees.end());
    fit.noise_floor = fo.newton_tol / std::pow(hs.back(), deg_max);
    if (!(fit.slope > 0.5) &&
        fit.last_residual > std::max(10.0 * opts.horiz_tol, 10.0 * fit.noise_floor))
        throw NotDifferentiable("derivative residual does not decay");
    return fit;
}

FlowOptions tight(const DiffOptions& opts) {
    FlowOptions fo = opts.flow;
    fo.newton_tol = 1e-12;
    return fo;
}

DerivativeElement horizontal_derivative_at(const MapUnderTest& f, const Point& g,
                                           const Point& fg, const GradedAlgebra& At,
                                           int j, const DiffOptions& opts) {
    if (j < 1 || j > f.source.dim_h1()) throw Error("horizontal index out of range");
    FlowOptions fo = tight(opts);
    auto curve = [&](double h) {
        return f.eval(flow(f.source, g, Vector::Unit(f.source.N, j - 1), h, fo));
    };
    auto fit = fit_element(f.target, At, fg, curve, opts, fo);
    for (int i = 0; i < f.target.N; ++i)
        if (At.degrees[i] > 1 && std::abs(fit.a[i]) > 1e-6)
            throw NotDifferentiable("horizontal derivative has a vertical part");
    return {fit.a, fit.slope};
}

DerivativeElement curve_derivative_at(const MapUnderTest& f, const Point& g,
                                      const Point& fg, const GradedAlgebra& At,
                                      const DecompositionPlan& plan, int k,
                                      std::vector<DerivativeElement>& horiz,
                                      const DiffOptions& opts) {
    Vector z = Vector::Zero(f.target.N);
    for (const auto& [j, a] : plan.segments)
        z = bch_coords(At, z, dilation_coords(At, horiz[j - 1].x, a));

    FlowOptions fo = tight(opts);
    auto curve = [&](double h) {
        return f.eval(phi_curve(f.source, g, plan, k, h, fo));
    };
    auto fit = fit_element(f.target, At, fg, curve, opts, fo);
    double gap =
        Vector(bch_coords(At, Vector(-z), fit.a)).lpNorm<Eigen::Infinity>();
    if (gap > std::max(1e-5, 10.0 * fit.noise_floor))
        throw ProductMismatch("product formula disagrees with the direct fit");
    return {z, fit.slope};
}

Point eval_or_throw(const MapUnderTest& f, const Point& g) {
    Point fg = f.eval(g);
    if (!fg.allFinite()) throw UndefinedAlongCurve("map undefined at the base point");
    return fg;
}

}  // namespace

std::vector<std::string> list_maps() {
    return {"identity",       "dilation:<t>",        "left_translate:<x1,...,xN>",
            "swap_hom",       "perturbed_dilation",  "nonsmooth_lipschitz"};
}

MapUnderTest make_map(const std::string& name, const CCStructure& S) {
    MapUnderTest f;
    f.source = S;
    f.target = S;
    f.name = name;

    if (name == "identity") {
        f.eval = [](const Point& p) { return p; };
        f.inverse = f.eval;
        return f;
    }
    if (name.rfind("dilation:", 0) == 0) {
        auto nums = parse_numbers(name.substr(9));
        if (nums.size() != 1) throw ParseError("dilation wants one parameter");
        double t = nums[0];
        if (t == 0.0) throw ParseError("dilation parameter must be nonzero");
        auto A = nilpotentize(S, Point::Zero(S.N));
        f.eval = [A, t](const Point& p) { return Point(dilation_coords(A, p, t)); };
        f.inverse = [A, t](const Point& p) {
            return Point(dilation_coords(A, p, 1.0 / t));
        };
        return f;
    }
    if (name.rfind("left_translate:", 0) == 0) {
        auto nums = parse_numbers(name.substr(15));
        if (static_cast<int>(nums.size()) != S.N)
            throw ParseError("left_translate wants N parameters");
        Vector p = Eigen::Map<const Vector>(nums.data(), S.N);
        auto A = nilpotentize(S, Point::Zero(S.N));
        f.eval = [A, p](const Point& u) { return Point(bch_coords(A, p, u)); };
        f.inverse = [A, p](const Point& u) {
            return Point(bch_coords(A, Vector(-p), u));
        };
        return f;
    }
    if (name == "swap_hom") {
        if (S.N != 3) throw Error("swap_hom is a three-dimensional map");
        f.eval = [](const Point& p) {
            Point q(3);
            q << p[1], p[0], -p[2];
            return q;
        };
        f.inverse = f.eval;
        return f;
    }
    if (name == "perturbed_dilation") {
        if (S.N != 3) throw Error("perturbed_dilation is a three-dimensional map");
        f.eval = [](const Point& p) {
            Point q(3);
            double x14 = p[0] * p[0] * p[0] * p[0];
            q << 2.0 * p[0] + p[0] * p[0], 2.0 * p[1], 4.0 * p[2] + x14;
            return q;
        };
        return f;
    }
    if (name == "nonsmooth_lipschitz") {
        if (S.N != 3) throw Error("nonsmooth_lipschitz is a three-dimensional map");
        f.eval = [](const Point& p) {
            Point q = p;
            if (p[0] > 0.0) q[1] += 0.5 * p[0];
            return q;
        };
        f.inverse = [](const Point& p) {
            Point q = p;
            if (p[0] > 0.0) q[1] -= 0.5 * p[0];
            return q;
        };
        return f;
    }
    std::string known;
    for (const auto& m : list_maps()) known += (known.empty() ? "" : ", ") + m;
    throw ParseError("unknown map '" + name + "'; available: " + known);
}

DerivativeElement horizontal_derivative(const MapUnderTest& f, const Point& g,
                                        int j, const DiffOptions& opts) {
    Point fg = eval_or_throw(f, g);
    auto At = nilpotentize(f.target, fg);
    return horizontal_derivative_at(f, g, fg, At, j, opts);
}

DerivativeElement curve_derivative(const MapUnderTest& f, const Point& g, int k,
                                   const DiffOptions& opts) {
    if (k < 1 || k > f.source.N) throw Error("curve index out of range");
    Point fg = eval_or_throw(f, g);
    auto At = nilpotentize(f.target, fg);
    int h1 = f.source.dim_h1();
    if (k <= h1) return horizontal_derivative_at(f, g, fg, At, k, opts);

    auto As = nilpotentize(f.source, g);
    auto plan = fs_decompose(As, k);
    std::vector<DerivativeElement> horiz(h1);
    std::vector<bool> have(h1, false);
    for (const auto& [j, a] : plan.segments)
        if (!have[j - 1]) {
            horiz[j - 1] = horizontal_derivative_at(f, g, fg, At, j, opts);
            have[j - 1] = true;
        }
    return curve_derivative_at(f, g, fg, At, plan, k, horiz, opts);
}

DifferentialMap assemble_differential(const MapUnderTest& f, const Point& g,
                                      const DiffOptions& opts) {
    DifferentialMap L;
    L.g = g;
    L.fg = eval_or_throw(f, g);
    L.source_algebra = nilpotentize(f.source, g);
    L.target_algebra = nilpotentize(f.target, L.fg);
    L.source_plans = phi_plans(L.source_algebra);

    int h1 = f.source.dim_h1();
    L.per_coordinate.resize(f.source.N);
    std::vector<DerivativeElement> horiz(h1);
    for (int j = 1; j <= h1; ++j) {
        horiz[j - 1] = horizontal_derivative_at(f, g, L.fg, L.target_algebra, j, opts);
        L.per_coordinate[j - 1] = horiz[j - 1];
    }
    for (int k = h1 + 1; k <= f.source.N; ++k)
        L.per_coordinate[k - 1] = curve_derivative_at(
            f, g, L.fg, L.target_algebra, L.source_plans[k - h1 - 1], k, horiz, opts);
    return L;
}

Vector apply_differential_coords(const DifferentialMap& L, const Vector& x) {
    Vector t = nilpotent_phi_inverse(L.source_algebra, L.source_plans, x);
    Vector z = Vector::Zero(L.target_algebra.N);
    for (int k = 1; k <= L.source_algebra.N; ++k)
        z = bch_coords(L.target_algebra, z,
                       dilation_coords(L.target_algebra, L.per_coordinate[k - 1].x,
                                       t[k - 1]));
    return z;
}

Point apply_differential(const CCStructure& src, const CCStructure& tgt,
                         const DifferentialMap& L, const Point& v,
                         const FlowOptions& opts) {
    Vector x = coords1_inverse(src, L.g, v, opts).x;
    return coords1_forward(tgt, L.fg, apply_differential_coords(L, x), opts);
}

DiffCheck verify_differential(const MapUnderTest& f, const DifferentialMap& L,
                              const std::vector<double>& eps_grid, int n,
                              std::uint64_t seed, const DiffOptions& opts) {
    DiffCheck check;
    FlowOptions fo = tight(opts);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int skips = 0, total = 0;

    for (double eps : eps_grid) {
        double worst = 0.0;
        for (int s = 0; s < n; ++s) {
            Vector x(f.source.N);
            for (int i = 0; i < f.source.N; ++i)
                x[i] = unit(rng) * std::pow(eps, f.source.degrees[i]);
            ++total;
            try {
                Point v = coords1_forward(f.source, L.g, x, fo);
                Point fv = f.eval(v);
                if (!fv.allFinite()) {
                    ++skips;
                    continue;
                }
                Vector yf = coords1_inverse(f.target, L.fg, fv, fo).x;
                Vector z = apply_differential_coords(L, x);
                worst = std::max(worst, (yf - z).lpNorm<Eigen::Infinity>());
            } catch (const ChartExit&) {
                ++skips;
            }
        }
        check.table.rows.emplace_back(eps, std::max(worst, 1e-16));
    }
    check.table.slope = fit_loglog_slope(check.table.rows);
    check.skip_fraction = total > 0 ? static_cast<double>(skips) / total : 0.0;
    return check;
}

HomReport verify_homomorphism(const DifferentialMap& L, int n, std::uint64_t seed) {
    HomReport rep;
    const auto& As = L.source_algebra;
    const auto& At = L.target_algebra;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    for (int s = 0; s < n; ++s) {
        Vector u(As.N), v(As.N);
        for (int i = 0; i < As.N; ++i) {
            u[i] = unit(rng);
            v[i] = unit(rng);
        }
        Vector Lu = apply_differential_coords(L, u);
        Vector Lv = apply_differential_coords(L, v);
        Vector Luv = apply_differential_coords(L, bch_coords(As, u, v));
        Vector prod = bch_coords(At, Lu, Lv);
        rep.hom_defect =
            std::max(rep.hom_defect, (Luv - prod).lpNorm<Eigen::Infinity>());
        for (double t : {0.3, 0.7, 1.5}) {
            Vector lhs = dilation_coords(At, Lv, t);
            Vector rhs = apply_differential_coords(L, dilation_coords(As, v, t));
            rep.dilation_defect =
                std::max(rep.dilation_defect, (rhs - lhs).lpNorm<Eigen::Infinity>());
        }
    }
    int h1s = 0;
    for (int d : As.degrees) h1s += (d == 1);
    for (int k = 1; k <= h1s; ++k)
        for (int i = 0; i < At.N; ++i)
            if (At.degrees[i] > 1 && std::abs(L.per_coordinate[k - 1].x[i]) > 1e-6)
                rep.horizontality_ok = false;
    return rep;
}

double sr_jacobian(const DifferentialMap& L) {
    const auto& As = L.source_algebra;
    const auto& At = L.target_algebra;
    Matrix M(At.N, As.N);
    for (int k = 0; k < As.N; ++k) M.col(k) = L.per_coordinate[k].x;
    for (int i = 0; i < At.N; ++i)
        for (int k = 0; k < As.N; ++k)
            if (At.degrees[i] != As.degrees[k] && std::abs(M(i, k)) > 1e-6)
                throw GradingViolation("differential mixes grading blocks");
    double det2 = (M.transpose() * M).determinant();
    return det2 > 0.0 ? std::sqrt(det2) : 0.0;
}

AreaReport area_formula_check(const MapUnderTest& f, const Region& support,
                              const Indicator& set, double scale,
                              int n_jacobian_samples, std::uint64_t seed,
                              const DiffOptions& opts) {
    AreaReport rep;
    const auto& src = f.source;
    const auto& tgt = f.target;
    if (!f.inverse) throw Error("area formula needs the inverse of the map");

    std::vector<Point> centers;
    for_each_lattice_center(src, support, scale, [&](const Point& c) {
        if (set(c)) centers.push_back(c);
    });
    int nu = hausdorff_dimension(src);
    double w = std::pow(scale, nu);

    if (!centers.empty()) {
        int m = std::min<int>(std::max(1, n_jacobian_samples),
                              static_cast<int>(centers.size()));
        int stride = static_cast<int>(centers.size()) / m;
        std::vector<Point> base;
        std::vector<Point> images;
        std::vector<double> jac;
        for (int i = 0; i < m; ++i) {
            const Point& c = centers[i * stride];
            base.push_back(c);
            images.push_back(eval_or_throw(f, c));
            jac.push_back(sr_jacobian(assemble_differential(f, c, opts)));
        }
        for (size_t i = 0; i < base.size(); ++i)
            for (size_t j = i + 1; j < base.size(); ++j)
                if ((base[i] - base[j]).lpNorm<Eigen::Infinity>() > scale &&
                    (images[i] - images[j]).lpNorm<Eigen::Infinity>() < 1e-9)
                    throw NonInjectiveDetected("distinct points share an image");
        for (const Point& c : centers) {
            size_t best = 0;
            double bd = (c - base[0]).squaredNorm();
            for (size_t i = 1; i < base.size(); ++i) {
                double d = (c - base[i]).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            rep.lhs += w * jac[best];
        }
    }

    // bounding box of the image: corners plus sampled interior points
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Point lo = Point::Constant(tgt.N, std::numeric_limits<double>::infinity());
    Point hi = -lo;
    auto absorb = [&](const Point& p) {
        Point u = f.eval(p);
        if (!u.allFinite()) return;
        lo = lo.cwiseMin(u);
        hi = hi.cwiseMax(u);
    };
    for (int mask = 0; mask < (1 << src.N); ++mask) {
        Point p = support.center;
        for (int i = 0; i < src.N; ++i)
            p[i] += ((mask >> i) & 1 ? 1.0 : -1.0) * support.half_width[i];
        absorb(p);
    }
    for (int s = 0; s < 200; ++s) {
        Point p = support.center;
        for (int i = 0; i < src.N; ++i) p[i] += unit(rng) * support.half_width[i];
        absorb(p);
    }
    Region image_support{0.5 * (lo + hi), Vector(0.55 * (hi - lo).cwiseMax(scale))};

    Indicator image_set = [&](const Point& u) {
        Point p = f.inverse(u);
        if (!p.allFinite()) return false;
        for (int i = 0; i < src.N; ++i)
            if (std::abs(p[i] - support.center[i]) > support.half_width[i])
                return false;
        return set(p);
    };
    rep.rhs = measure_estimate(tgt, image_set, image_support, {scale}).value;
    rep.gap = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.rhs), 1e-12);
    return rep;
}

}  // namespace cc
