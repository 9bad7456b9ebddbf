#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cc/flows.hpp"
#include "cc/structure.hpp"
#include "cc/tangent_cone.hpp"
#include "cc/types.hpp"

namespace cc {

/// Word of horizontal exponentials replaying to exp(Xhat_k) in the group.
struct DecompositionPlan {
    int k = 0;                                      // 1-based target field
    std::vector<std::pair<int, double>> segments;   // (field index <= h1, coeff)
    int L = 0;
    double coef_bound = 0.0;                        // max |coefficient|
};

struct HorizontalPath {
    Point start;
    std::vector<std::pair<int, double>> segments;  // (field index, signed parameter)
    Point endpoint;

    double length() const;
    std::string to_csv() const;  // rows segment_index,field_index,parameter
};

struct DistanceBound {
    double lower = 0.0;
    double upper = 0.0;
    HorizontalPath path;
    bool budget_exhausted = false;
};

struct ChowResult {
    Vector t;
    HorizontalPath path;
    double c2_ratio = 0.0;  // max |a_i| / d_infty(g, v)
};

struct BallBoxReport {
    double C1_hat = 0.0;
    double C2_hat = 0.0;
    int sample_count = 0;
};

struct CcOptions {
    int m = 64;             // control pieces
    int budget = 60;        // optimizer iterations
    double penalty_max = 1e6;
    double c1_hat = 0.0;    // empirical lower-bound constant (0 = trivial lower)
    FlowOptions flow;
};

/// Replays a plan through the exact group law.
Vector replay_plan(const GradedAlgebra& A,
                   const std::vector<std::pair<int, double>>& segments);

/// Replays a horizontal path through the actual flows.
Point replay_path(const CCStructure& S, const HorizontalPath& path,
                  const FlowOptions& opts = {});

DecompositionPlan fs_decompose(const GradedAlgebra& A, int k);

Point phi_curve(const CCStructure& S, const Point& g, int k, double t,
                const FlowOptions& opts = {});
Point phi_curve(const CCStructure& S, const Point& g, const DecompositionPlan& plan,
                int k, double t, const FlowOptions& opts = {});

/// Plans for every non-horizontal index, keyed by k - h1 - 1.
std::vector<DecompositionPlan> phi_plans(const GradedAlgebra& A);

Point phi_system(const CCStructure& S, const Point& g,
                 const std::vector<DecompositionPlan>& plans, const Vector& t,
                 const FlowOptions& opts = {});
Point phi_system(const CCStructure& S, const Point& g, const Vector& t,
                 const FlowOptions& opts = {});

/// Exact triangular solve of the hatted Phi system in the nilpotent group:
/// returns t with PhiHat(t) = x (coords of the 1st kind).
Vector nilpotent_phi_inverse(const GradedAlgebra& A,
                             const std::vector<DecompositionPlan>& plans,
                             const Vector& x);

ChowResult chow_solve(const CCStructure& S, const Point& g, const Point& v,
                      const FlowOptions& opts = {});

DistanceBound cc_distance(const CCStructure& S, const Point& g, const Point& v,
                          const CcOptions& opts = {});

BallBoxReport ball_box_report(const CCStructure& S, const Region& region,
                              const std::vector<double>& r_grid, int n,
                              std::uint64_t seed = 0, const CcOptions& opts = {});

/// |d_cc - d^g_cc| over eps-boxes, d^g_cc computed on the frozen nilpotent
/// model fields.
RateTable dcc_local_approx_report(const CCStructure& S, const Point& g,
                                  const std::vector<double>& eps_grid, int n,
                                  std::uint64_t seed = 0, const CcOptions& opts = {});

}  // namespace cc
