#pragma once

#include "wtv/image.hpp"

namespace wtv {

// 10*log10(1/MSE) dB with peak value 1. Identical images return +infinity.
double psnr(const Image& x, const Image& x_ref);

// Mean local SSIM, 11x11 Gaussian window (std 1.5), C1 = 0.01^2, C2 = 0.03^2,
// dynamic range 1, periodic window wrap.
double ssim(const Image& x, const Image& x_ref);

// Improvement of the output over the noisy data, both against the reference.
double ipsnr(const Image& x_out, const Image& y, const Image& x_ref);
double issim(const Image& x_out, const Image& y, const Image& x_ref);

}  // namespace wtv
