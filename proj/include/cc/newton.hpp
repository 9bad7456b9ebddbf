#pragma once

#include <functional>

#include "cc/types.hpp"

namespace cc {

struct NewtonOptions {
    double fd_step = 1e-6;
    double residual_tol = 1e-9;
    int max_iter = 50;
    int max_damping = 30;
};

/// Damped Newton for F(x) = target with a forward-difference Jacobian.
/// Rectangular systems are handled with a least-squares step.  Throws
/// NoConvergence when the residual stalls above tolerance.
Vector newton_solve(const std::function<Vector(const Vector&)>& F,
                    const Vector& target, const Vector& x0,
                    const NewtonOptions& opts = {});

/// Forward-difference Jacobian of F at x.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& F, const Vector& x,
                   double step = 1e-6);

/// Central-difference Jacobian, for the cases that need the extra order.
Matrix fd_jacobian_central(const std::function<Vector(const Vector&)>& F,
                           const Vector& x, double step = 1e-6);

}  // namespace cc
