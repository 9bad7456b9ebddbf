#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace cc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A chart point, N coordinates in chart units.
using Point = Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};
struct InvalidFiltration : Error {
    using Error::Error;
};
struct DegenerateFrame : Error {
    using Error::Error;
};
struct GradingViolation : Error {
    using Error::Error;
};
struct ChartExit : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};
struct JacobiViolation : Error {
    using Error::Error;
};
struct AlgebraMismatch : Error {
    using Error::Error;
};
struct UnsupportedDepth : Error {
    using Error::Error;
};
struct NotGenerated : Error {
    using Error::Error;
};
struct NonInjectiveDetected : Error {
    using Error::Error;
};
struct NotDifferentiable : Error {
    using Error::Error;
};
struct UndefinedAlongCurve : Error {
    using Error::Error;
};
struct ProductMismatch : Error {
    using Error::Error;
};

namespace tol {
// Linear-solve residual for structure constants.
inline constexpr double solve_residual = 1e-10;
// Grading residual |c_ijk| on forbidden index triples.
inline constexpr double grading = 1e-8;
// Frame condition-number bound.
inline constexpr double frame_condition = 1e8;
// Newton residual for coordinate inversions.
inline constexpr double newton_residual = 1e-9;
}  // namespace tol

}  // namespace cc
