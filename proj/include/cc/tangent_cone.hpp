#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cc/flows.hpp"
#include "cc/structure.hpp"
#include "cc/types.hpp"

namespace cc {

/// Nilpotentized structure constants at a base point, graded by construction:
/// c_hat_ijk = 0 unless deg X_i + deg X_j = deg X_k.
struct GradedAlgebra {
    Point base;
    int N = 0;
    int M = 0;
    std::vector<int> degrees;
    std::vector<Matrix> c_hat;  // c_hat[i](j,k)

    double at(int i, int j, int k) const { return c_hat[i](j, k); }
};

/// Element of the local Carnot group in canonical coordinates of the 1st kind.
struct GroupElement {
    const GradedAlgebra* algebra = nullptr;
    Vector x;
};

/// (epsilon, deviation) rows with a fitted log-log slope.
struct RateTable {
    std::vector<std::pair<double, double>> rows;
    double slope = 0.0;

    std::string to_csv() const;
};

GradedAlgebra nilpotentize(const CCStructure& S, const Point& g);

/// [u, v] through the graded commutator table.
Vector algebra_bracket(const GradedAlgebra& A, const Vector& u, const Vector& v);

/// Exact graded BCH product (nilpotency step M <= 4); the group product is
/// x . y = "x applied first": exp(y-flow) after exp(x-flow).
GroupElement bch_product(const GradedAlgebra& A, const GroupElement& x,
                         const GroupElement& y);
Vector bch_coords(const GradedAlgebra& A, const Vector& x, const Vector& y);

/// d/dt BCH(a, t v) at t = 0: the right-translate of v to a.
Vector bch_tangent(const GradedAlgebra& A, const Vector& a, const Vector& v);

GroupElement dilation(const GradedAlgebra& A, const GroupElement& x, double t);
Vector dilation_coords(const GradedAlgebra& A, const Vector& x, double t);

double hom_norm(const GradedAlgebra& A, const GroupElement& x);
double hom_norm(const GradedAlgebra& A, const Vector& x);

/// exp(t sum coeffs_i Xhat^g_i)(p) realized in the chart through coords1.
Point hat_flow(const CCStructure& S, const GradedAlgebra& A, const Point& p,
               const Vector& coeffs, double t, const FlowOptions& opts = {});

/// Chart realization of u . v in the local Carnot group at A.base.
Point local_group_product(const CCStructure& S, const GradedAlgebra& A,
                          const Point& u, const Point& v,
                          const FlowOptions& opts = {});

/// Local homogeneous distance d^g_infty(u, v).
double d_g_infty(const CCStructure& S, const GradedAlgebra& A, const Point& u,
                 const Point& v, const FlowOptions& opts = {});

/// Rescaled field X^eps_i at chart point x (1-based field index).
Vector rescaled_field(const CCStructure& S, const GradedAlgebra& A, int i,
                      const Point& x, double eps, const FlowOptions& opts = {});

/// Xhat^g_i at chart point x (1-based field index).
Vector hat_field(const CCStructure& S, const GradedAlgebra& A, int i,
                 const Point& x, const FlowOptions& opts = {});

RateTable rescaled_field_deviation(const CCStructure& S, const Point& g,
                                   const std::vector<double>& eps_grid,
                                   const std::vector<Point>& sample_points,
                                   const FlowOptions& opts = {});

RateTable metrics_deviation_report(const CCStructure& S, const Point& g,
                                   const std::vector<double>& eps_grid, int n,
                                   std::uint64_t seed = 0,
                                   const FlowOptions& opts = {});

/// Least-squares slope of log(deviation) against log(epsilon).
double fit_loglog_slope(const std::vector<std::pair<double, double>>& rows);

/// The nilpotent group as a CCStructure of its own: polynomial fields
/// Xhat_i(x) = bch_tangent(x, e_i) in exponential coordinates.
CCStructure nilpotent_model(const GradedAlgebra& A, double chart_radius = 4.0);

}  // namespace cc
