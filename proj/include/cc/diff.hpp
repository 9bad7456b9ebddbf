#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cc/horizontal.hpp"
#include "cc/measure.hpp"
#include "cc/structure.hpp"
#include "cc/tangent_cone.hpp"
#include "cc/types.hpp"

namespace cc {

/// Map between chart neighborhoods; eval may return a NaN-filled point where
/// the map is undefined.
struct MapUnderTest {
    CCStructure source;
    CCStructure target;
    std::function<Point(const Point&)> eval;
    std::function<Point(const Point&)> inverse;  // empty when not available
    std::string name;
};

/// Group element of the target local Carnot group at f(g).
struct DerivativeElement {
    Vector x;
    double residual_rate_slope = 0.0;  // decay rate of the defining limit
};

struct DifferentialMap {
    Point g;
    Point fg;
    std::vector<DerivativeElement> per_coordinate;  // slot k-1: ap d_sub(f.Gamma_k)
    GradedAlgebra source_algebra;
    GradedAlgebra target_algebra;
    std::vector<DecompositionPlan> source_plans;
};

struct DiffOptions {
    double h0 = 0.05;       // largest step of the derivative grid
    int levels = 5;         // grid h0 * 2^{-l}
    double horiz_tol = 1e-7;
    FlowOptions flow;
};

struct DiffCheck {
    RateTable table;
    double skip_fraction = 0.0;
};

struct HomReport {
    double hom_defect = 0.0;
    double dilation_defect = 0.0;
    bool horizontality_ok = true;
};

struct AreaReport {
    double lhs = 0.0;  // integral of J^SR over E
    double rhs = 0.0;  // measure of f(E)
    double gap = 0.0;  // |lhs-rhs| / max(rhs, tiny)
};

/// Built-in test maps keyed by name: identity, dilation:<t>,
/// left_translate:<x1,...,xN>, swap_hom, perturbed_dilation,
/// nonsmooth_lipschitz.
MapUnderTest make_map(const std::string& name, const CCStructure& S);
std::vector<std::string> list_maps();

DerivativeElement horizontal_derivative(const MapUnderTest& f, const Point& g,
                                        int j, const DiffOptions& opts = {});

DerivativeElement curve_derivative(const MapUnderTest& f, const Point& g, int k,
                                   const DiffOptions& opts = {});

DifferentialMap assemble_differential(const MapUnderTest& f, const Point& g,
                                      const DiffOptions& opts = {});

/// Evaluation on coordinates of the 1st kind in the source group.
Vector apply_differential_coords(const DifferentialMap& L, const Vector& x);
/// Chart-point evaluation through theta_g and theta_{f(g)}.
Point apply_differential(const CCStructure& src, const CCStructure& tgt,
                         const DifferentialMap& L, const Point& v,
                         const FlowOptions& opts = {});

DiffCheck verify_differential(const MapUnderTest& f, const DifferentialMap& L,
                              const std::vector<double>& eps_grid, int n,
                              std::uint64_t seed = 0, const DiffOptions& opts = {});

HomReport verify_homomorphism(const DifferentialMap& L, int n,
                              std::uint64_t seed = 0);

double sr_jacobian(const DifferentialMap& L);

AreaReport area_formula_check(const MapUnderTest& f, const Region& support,
                              const Indicator& set, double scale,
                              int n_jacobian_samples = 25, std::uint64_t seed = 0,
                              const DiffOptions& opts = {});

}  // namespace cc
