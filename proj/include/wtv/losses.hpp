#pragma once

#include <vector>

#include "wtv/image.hpp"

namespace wtv {

// Sample normalized autocorrelation of a residual, over the full (n1, n2)
// lag torus. gamma at lag (0,0) is 1 up to rounding; |gamma| <= 1.
struct Autocorr {
    int n1 = 0;
    int n2 = 0;
    std::vector<double> gamma;  // length n, lag (j1, j2) at j1 * n2 + j2
    double residual_norm_sq = 0.0;
};

struct LossEval {
    double value = 0.0;
    Image grad_x;  // gradient of the loss w.r.t. x_star
};

// Discrete circular cross-correlation on the (n1, n2) torus:
//   (A * B)_{j1,j2} = sum_{k1,k2} A_{k1,k2} B_{(j1+k1) mod n1, (j2+k2) mod n2}.
// FFT-backed; agrees with the double-loop definition to rtol 1e-10.
std::vector<double> circular_xcorr(const Image& a, const Image& b);

// Normalized autocorrelation of r = y - x_star. Throws when the residual is
// numerically null (||r||^2 < 1e-300 * n): the normalization is undefined.
Autocorr residual_autocorr(const Image& x_star, const Image& y);

// Q = 1/2 ||gamma||^2 with gamma = (r * r)/||r||^2. The normalization makes
// Q invariant to scaling of r. grad_x is analytic (adjoint of the circular
// correlation through r = y - x), certified against finite differences in
// the tests.
LossEval whiteness_eval(const Image& x_star, const Image& y);

// Q = 1/(2n) ||x_star - x_ref||^2; grad_x = (x_star - x_ref)/n.
LossEval mse_eval(const Image& x_star, const Image& x_ref);

}  // namespace wtv
