#pragma once

#include <cstdint>

#include "cc/structure.hpp"
#include "cc/types.hpp"

namespace cc {

struct FlowOptions {
    // Fixed-step RK4; the step count scales with the arc parameter
    // |t|*||coeffs|| so short flows stay cheap.
    double h_max = 0.01;
    double fd_step = 1e-6;
    int newton_max_iter = 50;
    double newton_tol = 1e-9;
};

/// Axis-aligned sampling region in chart coordinates.
struct Region {
    Point center;
    Vector half_width;
};

/// Coordinates of the 1st kind: u = exp(sum x_i X_i)(g).
struct Coords1 {
    Point base;
    Vector x;
};

/// Coordinates of the 2nd kind: u = exp(a_N X_N) o ... o exp(a_1 X_1)(g).
struct Coords2 {
    Point base;
    Vector a;
};

/// Empirical metric-equivalence constants over a sampled region.
struct ConstantsEstimate {
    double c1_hat = 0.0;  // min d2/dinf
    double c2_hat = 0.0;  // max d2/dinf
    double q_hat = 1.0;   // quasi-triangle constant for d_infty
    double symmetry_defect = 0.0;
    int sample_count = 0;
    Region region;
};

/// Time-t solution of y' = sum coeffs_i X_i(y), y(0) = p.
Point flow(const CCStructure& S, const Point& p, const Vector& coeffs, double t,
           const FlowOptions& opts = {});

Point coords1_forward(const CCStructure& S, const Point& g, const Vector& x,
                      const FlowOptions& opts = {});
Coords1 coords1_inverse(const CCStructure& S, const Point& g, const Point& u,
                        const FlowOptions& opts = {});

Point coords2_forward(const CCStructure& S, const Point& g, const Vector& a,
                      const FlowOptions& opts = {});
Coords2 coords2_inverse(const CCStructure& S, const Point& g, const Point& u,
                        const FlowOptions& opts = {});

double d_infty(const CCStructure& S, const Point& g, const Point& u,
               const FlowOptions& opts = {});
double d_2(const CCStructure& S, const Point& g, const Point& u,
           const FlowOptions& opts = {});
double d_rho(const CCStructure& S, const Point& g, const Point& u,
             const FlowOptions& opts = {});

/// max_i |y_i|^{1/deg X_i} for a coordinate tuple y (0^{1/m} = 0).
double graded_max_norm(const Vector& y, const std::vector<int>& degrees);
/// Layerwise Euclidean norms with exponents 1/(2i).
double graded_rho_norm(const Vector& y, const CCStructure& S);

ConstantsEstimate metric_equivalence_report(const CCStructure& S, const Region& region,
                                            int n_samples, std::uint64_t seed,
                                            const FlowOptions& opts = {});

}  // namespace cc
