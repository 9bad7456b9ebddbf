#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cc/flows.hpp"
#include "cc/structure.hpp"
#include "cc/types.hpp"

namespace cc {

using Indicator = std::function<bool(const Point&)>;
/// Sampled function; returns NaN where undefined.
using SampledFn = std::function<double(const Point&)>;

struct MeasureEstimate {
    double value = 0.0;
    std::vector<double> scale_grid;
    std::vector<double> per_scale;
    std::string metric_tag = "infty";
    int nu = 0;

    std::string to_csv() const;  // "# nu=<int>" header, then scale,value rows
};

struct DensityEstimate {
    Point point;
    std::vector<double> r_grid;
    std::vector<double> ratios;
    double limit_guess = 0.0;
};

struct ApLimit {
    double value = 0.0;
    bool certified = false;
    double lim_inf = 0.0;
    double lim_sup = 0.0;
};

struct DoublingReport {
    double C_hat = 0.0;
    int sample_count = 0;
};

/// nu = sum of the degrees.
int hausdorff_dimension(const CCStructure& S);

/// Visits the centers of the anisotropic lattice (spacing r^{deg_i} per
/// coordinate) covering the support box.
void for_each_lattice_center(const CCStructure& S, const Region& support, double r,
                             const std::function<void(const Point&)>& visit);

/// Greedy anisotropic box-covering sum: lattice with spacing r^{deg_i} per
/// coordinate over the support box, center-only membership, value sum r^nu.
MeasureEstimate measure_estimate(const CCStructure& S, const Indicator& indicator,
                                 const Region& support,
                                 const std::vector<double>& scale_grid,
                                 const std::string& metric_tag = "infty");

/// Monte-Carlo density of the set at x over shrinking graded boxes.
DensityEstimate density(const CCStructure& S, const Indicator& indicator,
                        const Point& x, const std::vector<double>& r_grid, int n,
                        std::uint64_t seed = 0, const FlowOptions& opts = {});

/// Approximate limit of f at x0 via super-level-set density quantiles.
ApLimit ap_limit(const CCStructure& S, const SampledFn& f, const Point& x0,
                 const std::vector<double>& r_grid, int n, std::uint64_t seed = 0,
                 double delta = 0.05, double tol = 1e-2,
                 const FlowOptions& opts = {});

/// Empirical doubling constant: max volume ratio of B(x,2r) to B(x,r).
DoublingReport doubling_report(const CCStructure& S, const Region& region,
                               const std::vector<double>& r_grid, int n,
                               std::uint64_t seed = 0, int mc_samples = 4000,
                               const FlowOptions& opts = {});

}  // namespace cc
