#include "wtv/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wtv {

double psnr(const Image& x, const Image& x_ref) {
    if (!x.same_shape(x_ref)) throw std::invalid_argument("psnr: shape mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - x_ref.data[i];
        sq += d * d;
    }
    if (sq == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sq / static_cast<double>(x.size());
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kWindowStd = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_kernel() {
    std::array<double, kWindow> k{};
    const int half = kWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * kWindowStd * kWindowStd));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable Gaussian blur with periodic wrap, consistent with the
// project-wide boundary convention.
Image gauss_filter(const Image& src) {
    static const std::array<double, kWindow> kernel = gaussian_kernel();
    const int half = kWindow / 2;
    const int n1 = src.n1, n2 = src.n2;
    Image tmp(n1, n2), out(n1, n2);
    for (int k1 = 0; k1 < n1; ++k1) {
        for (int k2 = 0; k2 < n2; ++k2) {
            double s = 0.0;
            for (int t = 0; t < kWindow; ++t) {
                int c = k2 + t - half;
                c %= n2;
                if (c < 0) c += n2;
                s += kernel[t] * src.at(k1, c);
            }
            tmp.at(k1, k2) = s;
        }
    }
    for (int k1 = 0; k1 < n1; ++k1) {
        for (int k2 = 0; k2 < n2; ++k2) {
            double s = 0.0;
            for (int t = 0; t < kWindow; ++t) {
                int r = k1 + t - half;
                r %= n1;
                if (r < 0) r += n1;
                s += kernel[t] * tmp.at(r, k2);
            }
            out.at(k1, k2) = s;
        }
    }
    return out;
}

}  // namespace

double ssim(const Image& x, const Image& x_ref) {
    if (!x.same_shape(x_ref)) throw std::invalid_argument("ssim: shape mismatch");
    const std::size_t n = x.size();

    Image xx(x.n1, x.n2), yy(x.n1, x.n2), xy(x.n1, x.n2);
    for (std::size_t i = 0; i < n; ++i) {
        xx.data[i] = x.data[i] * x.data[i];
        yy.data[i] = x_ref.data[i] * x_ref.data[i];
        xy.data[i] = x.data[i] * x_ref.data[i];
    }
    const Image mu_x = gauss_filter(x);
    const Image mu_y = gauss_filter(x_ref);
    const Image m_xx = gauss_filter(xx);
    const Image m_yy = gauss_filter(yy);
    const Image m_xy = gauss_filter(xy);

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = mu_x.data[i], my = mu_y.data[i];
        const double var_x = m_xx.data[i] - mx * mx;
        const double var_y = m_yy.data[i] - my * my;
        const double cov = m_xy.data[i] - mx * my;
        const double num = (2.0 * mx * my + kC1) * (2.0 * cov + kC2);
        const double den = (mx * mx + my * my + kC1) * (var_x + var_y + kC2);
        acc += num / den;
    }
    return acc / static_cast<double>(n);
}

double ipsnr(const Image& x_out, const Image& y, const Image& x_ref) {
    return psnr(x_out, x_ref) - psnr(y, x_ref);
}

double issim(const Image& x_out, const Image& y, const Image& x_ref) {
    return ssim(x_out, x_ref) - ssim(y, x_ref);
}

}  // namespace wtv
