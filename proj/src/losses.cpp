#include "wtv/losses.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace wtv {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// Per-thread r2c/c2r plans and buffers for one grid geometry. FFTW planning
// is not thread-safe; execution on private buffers is.
class FftWorkspace {
  public:
    FftWorkspace(int n1, int n2) : n1_(n1), n2_(n2), half_(n2 / 2 + 1) {
        const std::size_t n = static_cast<std::size_t>(n1) * n2;
        std::lock_guard<std::mutex> lock(planner_mutex());
        real_ = fftw_alloc_real(n);
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(n1) * half_);
        fwd_ = fftw_plan_dft_r2c_2d(n1, n2, real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_2d(n1, n2, spec_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
    }

    ~FftWorkspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    std::size_t spectrum_size() const { return static_cast<std::size_t>(n1_) * half_; }

    void forward(const double* in, std::complex<double>* out) {
        const std::size_t n = static_cast<std::size_t>(n1_) * n2_;
        for (std::size_t i = 0; i < n; ++i) real_[i] = in[i];
        fftw_execute(fwd_);
        for (std::size_t i = 0; i < spectrum_size(); ++i)
            out[i] = {spec_[i][0], spec_[i][1]};
    }

    // Unnormalized inverse; caller divides by n.
    void backward(const std::complex<double>* in, double* out) {
        for (std::size_t i = 0; i < spectrum_size(); ++i) {
            spec_[i][0] = in[i].real();
            spec_[i][1] = in[i].imag();
        }
        fftw_execute(bwd_);
        const std::size_t n = static_cast<std::size_t>(n1_) * n2_;
        for (std::size_t i = 0; i < n; ++i) out[i] = real_[i];
    }

  private:
    int n1_, n2_, half_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

FftWorkspace& workspace_for(int n1, int n2) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<FftWorkspace>> cache;
    auto& slot = cache[{n1, n2}];
    if (!slot) slot = std::make_unique<FftWorkspace>(n1, n2);
    return *slot;
}

}  // namespace

std::vector<double> circular_xcorr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("circular_xcorr: shape mismatch");
    const std::size_t n = a.size();
    FftWorkspace& ws = workspace_for(a.n1, a.n2);
    std::vector<std::complex<double>> sa(ws.spectrum_size()), sb(ws.spectrum_size());
    ws.forward(a.data.data(), sa.data());
    ws.forward(b.data.data(), sb.data());
    for (std::size_t i = 0; i < sa.size(); ++i) sa[i] = std::conj(sa[i]) * sb[i];
    std::vector<double> out(n);
    ws.backward(sa.data(), out.data());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= inv_n;
    return out;
}

Autocorr residual_autocorr(const Image& x_star, const Image& y) {
    if (!x_star.same_shape(y)) throw std::invalid_argument("residual_autocorr: shape mismatch");
    Image r(y.n1, y.n2);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.data[i] = y.data[i] - x_star.data[i];
        s += r.data[i] * r.data[i];
    }
    if (s < 1e-300 * static_cast<double>(r.size()))
        throw std::domain_error("whiteness: autocorrelation undefined for a null residual");

    FftWorkspace& ws = workspace_for(r.n1, r.n2);
    std::vector<std::complex<double>> spec(ws.spectrum_size());
    ws.forward(r.data.data(), spec.data());
    for (auto& c : spec) c = std::norm(c);  // |r_hat|^2, spectrum of r * r
    Autocorr ac;
    ac.n1 = r.n1;
    ac.n2 = r.n2;
    ac.residual_norm_sq = s;
    ac.gamma.resize(r.size());
    ws.backward(spec.data(), ac.gamma.data());
    const double scale = 1.0 / (static_cast<double>(r.size()) * s);
    for (double& g : ac.gamma) g *= scale;
    return ac;
}

LossEval whiteness_eval(const Image& x_star, const Image& y) {
    if (!x_star.same_shape(y)) throw std::invalid_argument("whiteness_eval: shape mismatch");
    const std::size_t n = y.size();
    Image r(y.n1, y.n2);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.data[i] = y.data[i] - x_star.data[i];
        s += r.data[i] * r.data[i];
    }
    if (s < 1e-300 * static_cast<double>(n))
        throw std::domain_error("whiteness: autocorrelation undefined for a null residual");

    FftWorkspace& ws = workspace_for(y.n1, y.n2);
    std::vector<std::complex<double>> spec(ws.spectrum_size());
    ws.forward(r.data.data(), spec.data());

    // a = r * r has spectrum |r_hat|^2; gamma = a / s; Q = 1/2 ||gamma||^2.
    std::vector<double> power(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) power[i] = std::norm(spec[i]);

    std::vector<double> acorr(n);
    {
        std::vector<std::complex<double>> tmp(spec.size());
        for (std::size_t i = 0; i < spec.size(); ++i) tmp[i] = power[i];
        ws.backward(tmp.data(), acorr.data());
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double gamma_i = acorr[i] * inv_n / s;
        q += gamma_i * gamma_i;
    }
    q *= 0.5;

    // dQ/dr = (2/s^2) (a * r) - (4Q/s) r, using that a and gamma are even on
    // the torus; (a * r) has spectrum |r_hat|^2 r_hat. dQ/dx = -dQ/dr.
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= power[i];
    std::vector<double> corr_ar(n);
    ws.backward(spec.data(), corr_ar.data());

    LossEval out;
    out.value = q;
    out.grad_x = Image(y.n1, y.n2);
    const double c1 = 2.0 / (s * s) * inv_n;
    const double c2 = 4.0 * q / s;
    for (std::size_t i = 0; i < n; ++i)
        out.grad_x.data[i] = -(c1 * corr_ar[i] - c2 * r.data[i]);
    return out;
}

LossEval mse_eval(const Image& x_star, const Image& x_ref) {
    if (!x_star.same_shape(x_ref)) throw std::invalid_argument("mse_eval: shape mismatch");
    const double n = static_cast<double>(x_star.size());
    LossEval out;
    out.grad_x = Image(x_star.n1, x_star.n2);
    double q = 0.0;
    for (std::size_t i = 0; i < x_star.size(); ++i) {
        const double d = x_star.data[i] - x_ref.data[i];
        q += d * d;
        out.grad_x.data[i] = d / n;
    }
    out.value = 0.5 * q / n;
    return out;
}

}  // namespace wtv
