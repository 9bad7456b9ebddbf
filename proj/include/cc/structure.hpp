#pragma once

#include <string>
#include <vector>

#include "cc/polynomial.hpp"
#include "cc/types.hpp"

namespace cc {

/// Chart-level description of a Carnot-Caratheodory structure: a frame of
/// N polynomial vector fields with a declared filtration.  Immutable after
/// load; all operations on it are pure.
struct CCStructure {
    int N = 0;                         // topological dimension
    int M = 0;                         // depth
    std::vector<int> filtration_dims;  // h_1 < ... < h_M = N
    std::vector<int> degrees;          // deg X_k, derived from filtration_dims
    std::vector<PolyField> fields;     // X_1 ... X_N
    double chart_radius = 1.0;         // validity box half-width around 0

    int dim_h1() const { return filtration_dims.front(); }
    bool in_chart(const Point& p) const {
        return p.lpNorm<Eigen::Infinity>() <= chart_radius;
    }
};

struct TangentVector {
    Vector components;  // chart coordinate frame
};

/// Commutator table c_ijk at a base point.
struct StructConsts {
    Point base;
    std::vector<Matrix> c;  // c[i] is the NxN matrix (j,k) -> c_ijk

    double at(int i, int j, int k) const { return c[i](j, k); }
};

struct PointReport {
    Point p;
    double frame_condition = 0.0;
    double grading_residual = 0.0;   // max |c_ijk| over forbidden triples
    bool surjectivity_ok = true;     // condition (2) rank test
    bool frame_ok = true;
};

struct ValidationReport {
    std::vector<PointReport> points;
    bool all_ok = true;
    double max_grading_residual = 0.0;
    double max_condition = 0.0;
};

/// Builds a structure from the JSON space-definition format (keys
/// `dimension`, `filtration`, `fields`, `chart_radius`).
CCStructure load_structure(const std::string& config_text);

/// Columns are X_1(p), ..., X_N(p).
Matrix frame_at(const CCStructure& S, const Point& p);

/// [X_i, X_j](p), symbolic bracket evaluated exactly. Indices 1-based.
TangentVector lie_bracket(const CCStructure& S, int i, int j, const Point& p);

StructConsts structure_constants(const CCStructure& S, const Point& p);

ValidationReport validate_filtration(const CCStructure& S,
                                     const std::vector<Point>& sample_points);

}  // namespace cc
