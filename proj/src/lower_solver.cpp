#include "wtv/lower_solver.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace wtv {

LowerSolveResult sc_agd(const Image& x0, const Image& y, const ParamMap& p, double eps,
                        double tol, int max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("sc_agd: tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("sc_agd: max_iters must be >= 1");
    if (!x0.same_shape(y)) throw std::invalid_argument("sc_agd: shape mismatch");

    const double big_l = lipschitz_bound(p.lambda_max(), eps);
    const double tau = 1.0 / big_l;
    const double mu = 1.0;
    const double kappa = mu / big_l;
    const double momentum_denom = 1.0 - tau * mu;

    LowerSolveResult res;
    res.step_size = tau;

    Image x_prev = x0;
    Image x_cur = x0;
    Image z(x0.n1, x0.n2);
    Image grad(x0.n1, x0.n2);
    GradField scratch;

    double theta = 1.0;
    int t = 0;
    const std::size_t n = x0.size();

    while (true) {
        const double a = 1.0 - kappa * theta * theta;
        const double theta_next = 0.5 * (a + std::sqrt(a * a + 4.0 * theta * theta));
        // kappa < 1 holds strictly (L > 1), but momentum_denom can underflow
        // to 0 for vanishing lambda; the kappa -> 1 limit is a plain GD step.
        double momentum = 0.0;
        if (momentum_denom > 0.0)
            momentum = (theta - 1.0) / theta_next * (1.0 - theta_next * mu * tau) / momentum_denom;

        for (std::size_t i = 0; i < n; ++i)
            z.data[i] = x_cur.data[i] + momentum * (x_cur.data[i] - x_prev.data[i]);
        energy_grad_into(z, y, p, eps, grad, scratch);

        double step_sq = 0.0;
        double prev_norm_sq = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = z.data[i] - tau * grad.data[i];
            const double d = xi - x_cur.data[i];
            step_sq += d * d;
            prev_norm_sq += x_cur.data[i] * x_cur.data[i];
            x_prev.data[i] = x_cur.data[i];
            x_cur.data[i] = xi;
            finite = finite && std::isfinite(xi);
        }
        theta = theta_next;
        ++t;

        const double step_norm = std::sqrt(step_sq);
        if (!finite || !std::isfinite(step_norm)) {
            res.status = LowerSolveResult::Status::NonFinite;
            res.final_step_norm = step_norm;
            break;
        }
        if (step_norm <= tol * std::max(1.0, std::sqrt(prev_norm_sq))) {
            res.status = LowerSolveResult::Status::Converged;
            res.final_step_norm = step_norm;
            break;
        }
        if (t >= max_iters) {
            res.status = LowerSolveResult::Status::MaxIters;
            res.final_step_norm = step_norm;
            break;
        }
    }

    res.iterations = t;
    energy_grad_into(x_cur, y, p, eps, grad, scratch);
    res.grad_norm = norm2(grad);
    res.x_star = std::move(x_cur);
    return res;
}

}  // namespace wtv
