#pragma once

#include <vector>

#include "wtv/energy.hpp"
#include "wtv/image.hpp"
#include "wtv/losses.hpp"

namespace wtv {

enum class LossKind { Whiteness, Mse };

struct CgSettings {
    double tol = 1e-8;       // relative: ||H w - rhs|| <= tol * ||rhs||
    int max_iters = 2000;
};

struct HessSolveResult {
    Image w;
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

// Conjugate gradients on the SPD lower-level Hessian at x_star (eigenvalues
// in [1, lipschitz_bound]); on max_iters the best iterate is returned with
// converged = false.
HessSolveResult hess_solve(const Image& x_star, const ParamMap& p, double eps,
                           const Image& rhs, const CgSettings& cg);
HessSolveResult hess_solve(const HessOperator& hess, const Image& rhs, const CgSettings& cg);

// Transpose application of the cross derivative d(grad_x F)/d(lambda):
// entry j = <huber_grad((D x_star)_j), (D w)_j>. Valid at the Huber knee
// since huber_grad is C^1.
std::vector<double> cross_jacobian_transpose(const Image& x_star, double eps, const Image& w);

struct HypergradResult {
    std::vector<double> grad_beta;  // length 1 (scalar mode) or n (per-pixel)
    int cg_iterations = 0;
    double cg_residual = 0.0;
    bool cg_converged = false;
    Image adjoint_w;  // solution of the Hessian system
};

// Implicit-function-theorem gradient of the upper loss w.r.t. beta at an
// (approximate) lower-level minimizer:
//   grad_beta = -exp(beta) .* [d(grad_x F)/d(lambda)]^T Hess^{-1} grad_x Q,
// summed over pixels in scalar mode. x_ref is required for the MSE loss.
HypergradResult hypergrad(const Image& x_star, const Image& y, const ParamMap& p, double eps,
                          LossKind loss, const Image* x_ref, const CgSettings& cg);

// Variant taking a precomputed loss gradient (the driver already evaluates
// the loss each outer iteration).
HypergradResult hypergrad_from_loss_grad(const Image& x_star, const ParamMap& p, double eps,
                                         const Image& loss_grad_x, const CgSettings& cg);

}  // namespace wtv
