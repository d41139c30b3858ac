#pragma once

#include "wtv/energy.hpp"
#include "wtv/image.hpp"

namespace wtv {

struct LowerSolveResult {
    enum class Status { Converged, MaxIters, NonFinite };

    Image x_star;
    int iterations = 0;
    double final_step_norm = 0.0;
    double grad_norm = 0.0;   // ||grad F(x_star)||, evaluated once on exit
    double step_size = 0.0;   // tau = 1 / lipschitz_bound(lambda_max, eps)
    Status status = Status::Converged;

    // Recorded so runs are comparable: the while-condition uses the step
    // norm relative to max(1, ||x_t||).
    static constexpr const char* stopping_rule = "||x_{t+1}-x_t|| <= tol*max(1,||x_t||)";
};

// Strongly-convex Nesterov accelerated gradient descent on F_eps, mu = 1,
// fixed step 1/L with L = lipschitz_bound(lambda_max, eps). The stopping
// condition is evaluated after each update (at least one iteration runs).
LowerSolveResult sc_agd(const Image& x0, const Image& y, const ParamMap& p, double eps,
                        double tol, int max_iters);

}  // namespace wtv
