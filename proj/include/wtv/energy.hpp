#pragma once

#include <cstddef>
#include <vector>

#include "wtv/image.hpp"

namespace wtv {

// Regularization parameterization: beta is unconstrained, lambda = exp(beta)
// element-wise (strictly positive by construction). Scalar mode shares one
// beta across all pixels.
struct ParamMap {
    enum class Mode { Scalar, PerPixel };
    Mode mode = Mode::Scalar;
    std::vector<double> beta;    // length 1 (scalar) or n (per-pixel)
    std::vector<double> lambda;  // exp(beta), kept in sync by the factories

    static ParamMap scalar(double beta0);
    static ParamMap per_pixel(std::vector<double> beta0);
    static ParamMap constant(Mode mode, double beta0, std::size_t n);

    double lambda_at(std::size_t pixel) const {
        return mode == Mode::Scalar ? lambda[0] : lambda[pixel];
    }
    double lambda_max() const;
    double lambda_min() const;
    double lambda_mean(std::size_t n_pixels) const;
    std::size_t dof() const { return beta.size(); }
};

// Huber smoothing of the Euclidean norm on R^2: quadratic-quartic inside
// radius eps, shifted norm outside. C^2, nonnegative, h(0) = 0.
double huber_value(double v1, double v2, double eps);

void huber_grad(double v1, double v2, double eps, double& g1, double& g2);

// Symmetric 2x2 matrix [[a, b], [b, c]].
struct Sym2 {
    double a = 0.0, b = 0.0, c = 0.0;
};

// Positive semidefinite, max eigenvalue <= 3/(2*eps), continuous at |v| = eps.
Sym2 huber_hess(double v1, double v2, double eps);

// F_eps(x; y, lambda) = 1/2 ||x - y||^2 + sum_i lambda_i h_eps((Dx)_i).
double energy_value(const Image& x, const Image& y, const ParamMap& p, double eps);

// grad = (x - y) + D^T (diag(Lambda) gradH(Dx)); the same per-pixel weight
// multiplies both difference components.
Image energy_grad(const Image& x, const Image& y, const ParamMap& p, double eps);
void energy_grad_into(const Image& x, const Image& y, const ParamMap& p, double eps,
                      Image& out, GradField& scratch);

// Matrix-free Hessian-vector product:
//   w + D^T (diag(Lambda) hessH(Dx) Dw).
// Linear and symmetric in w; <w, Hw> >= ||w||^2 (1-strong convexity).
Image hess_vec(const Image& x, const ParamMap& p, double eps, const Image& w);

// Reusable Hessian application at a fixed linearization point x: precomputes
// the per-pixel 2x2 blocks once, then applies to many vectors (CG).
class HessOperator {
  public:
    HessOperator(const Image& x, const ParamMap& p, double eps);
    void apply(const Image& w, Image& out) const;
    Image apply(const Image& w) const;

  private:
    int n1_, n2_;
    std::vector<Sym2> weighted_blocks_;  // lambda_i * hessH((Dx)_i)
    mutable GradField scratch_;
};

// Upper bound on ||hess F_eps||: 1 + 12 * lambda_max / eps.
double lipschitz_bound(double lambda_max, double eps);

}  // namespace wtv
