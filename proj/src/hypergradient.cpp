#include "wtv/hypergradient.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace wtv {

HessSolveResult hess_solve(const Image& x_star, const ParamMap& p, double eps,
                           const Image& rhs, const CgSettings& cg) {
    return hess_solve(HessOperator(x_star, p, eps), rhs, cg);
}

HessSolveResult hess_solve(const HessOperator& hess, const Image& rhs, const CgSettings& cg) {
    if (!(cg.tol > 0.0)) throw std::invalid_argument("hess_solve: cg tol must be > 0");
    const std::size_t n = rhs.size();

    HessSolveResult out;
    out.w = Image(rhs.n1, rhs.n2);

    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) {
        out.converged = true;
        return out;
    }
    const double target = cg.tol * rhs_norm;

    Image residual = rhs;           // r = rhs - H*0
    Image direction = rhs;
    Image h_dir(rhs.n1, rhs.n2);
    double rr = dot(residual, residual);

    for (int k = 0; k < cg.max_iters; ++k) {
        hess.apply(direction, h_dir);
        const double alpha = rr / dot(direction, h_dir);
        for (std::size_t i = 0; i < n; ++i) {
            out.w.data[i] += alpha * direction.data[i];
            residual.data[i] -= alpha * h_dir.data[i];
        }
        const double rr_next = dot(residual, residual);
        out.iterations = k + 1;
        if (std::sqrt(rr_next) <= target) {
            out.converged = true;
            rr = rr_next;
            break;
        }
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < n; ++i)
            direction.data[i] = residual.data[i] + beta * direction.data[i];
        rr = rr_next;
    }
    out.residual_norm = std::sqrt(rr);
    return out;
}

std::vector<double> cross_jacobian_transpose(const Image& x_star, double eps, const Image& w) {
    if (!x_star.same_shape(w))
        throw std::invalid_argument("cross_jacobian_transpose: shape mismatch");
    GradField gx = grad_apply(x_star);
    GradField gw = grad_apply(w);
    const std::size_t n = gx.pixels();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double h1, h2;
        huber_grad(gx.h(i), gx.v(i), eps, h1, h2);
        out[i] = h1 * gw.h(i) + h2 * gw.v(i);
    }
    return out;
}

HypergradResult hypergrad(const Image& x_star, const Image& y, const ParamMap& p, double eps,
                          LossKind loss, const Image* x_ref, const CgSettings& cg) {
    LossEval ev;
    if (loss == LossKind::Whiteness) {
        ev = whiteness_eval(x_star, y);
    } else {
        if (!x_ref) throw std::invalid_argument("hypergrad: MSE loss requires a reference image");
        ev = mse_eval(x_star, *x_ref);
    }
    return hypergrad_from_loss_grad(x_star, p, eps, ev.grad_x, cg);
}

HypergradResult hypergrad_from_loss_grad(const Image& x_star, const ParamMap& p, double eps,
                                         const Image& loss_grad_x, const CgSettings& cg) {
    HessSolveResult solve = hess_solve(x_star, p, eps, loss_grad_x, cg);
    std::vector<double> cross = cross_jacobian_transpose(x_star, eps, solve.w);

    HypergradResult out;
    out.cg_iterations = solve.iterations;
    out.cg_residual = solve.residual_norm;
    out.cg_converged = solve.converged;
    out.adjoint_w = std::move(solve.w);

    if (p.mode == ParamMap::Mode::Scalar) {
        double sum = 0.0;
        for (double c : cross) sum += c;
        out.grad_beta = {-p.lambda[0] * sum};
    } else {
        out.grad_beta.resize(cross.size());
        for (std::size_t i = 0; i < cross.size(); ++i)
            out.grad_beta[i] = -p.lambda[i] * cross[i];
    }
    return out;
}

}  // namespace wtv
