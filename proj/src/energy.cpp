#include "wtv/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wtv {

ParamMap ParamMap::scalar(double beta0) {
    ParamMap p;
    p.mode = Mode::Scalar;
    p.beta = {beta0};
    p.lambda = {std::exp(beta0)};
    return p;
}

ParamMap ParamMap::per_pixel(std::vector<double> beta0) {
    if (beta0.empty()) throw std::invalid_argument("ParamMap: empty beta map");
    ParamMap p;
    p.mode = Mode::PerPixel;
    p.lambda.resize(beta0.size());
    for (std::size_t i = 0; i < beta0.size(); ++i) p.lambda[i] = std::exp(beta0[i]);
    p.beta = std::move(beta0);
    return p;
}

ParamMap ParamMap::constant(Mode mode, double beta0, std::size_t n) {
    if (mode == Mode::Scalar) return scalar(beta0);
    return per_pixel(std::vector<double>(n, beta0));
}

double ParamMap::lambda_max() const {
    return *std::max_element(lambda.begin(), lambda.end());
}

double ParamMap::lambda_min() const {
    return *std::min_element(lambda.begin(), lambda.end());
}

double ParamMap::lambda_mean(std::size_t n_pixels) const {
    if (mode == Mode::Scalar) return lambda[0];
    double s = 0.0;
    for (double v : lambda) s += v;
    return s / static_cast<double>(n_pixels);
}

double huber_value(double v1, double v2, double eps) {
    const double r2 = v1 * v1 + v2 * v2;
    const double r = std::sqrt(r2);
    if (r < eps) return (3.0 / (4.0 * eps)) * r2 - (1.0 / (8.0 * eps * eps * eps)) * r2 * r2;
    return r - 3.0 * eps / 8.0;
}

void huber_grad(double v1, double v2, double eps, double& g1, double& g2) {
    const double r2 = v1 * v1 + v2 * v2;
    const double r = std::sqrt(r2);
    if (r < eps) {
        const double s = 3.0 / (2.0 * eps) - r2 / (2.0 * eps * eps * eps);
        g1 = s * v1;
        g2 = s * v2;
    } else {
        g1 = v1 / r;
        g2 = v2 / r;
    }
}

Sym2 huber_hess(double v1, double v2, double eps) {
    const double r2 = v1 * v1 + v2 * v2;
    const double r = std::sqrt(r2);
    Sym2 m;
    if (r < eps) {
        const double e3 = eps * eps * eps;
        const double diag = 3.0 / (2.0 * eps) - r2 / (2.0 * e3);
        m.a = diag - v1 * v1 / e3;
        m.b = -v1 * v2 / e3;
        m.c = diag - v2 * v2 / e3;
    } else {
        const double r3 = r2 * r;
        m.a = 1.0 / r - v1 * v1 / r3;
        m.b = -v1 * v2 / r3;
        m.c = 1.0 / r - v2 * v2 / r3;
    }
    return m;
}

namespace {

void check_shapes(const Image& x, const Image& y, const ParamMap& p) {
    if (!x.same_shape(y)) throw std::invalid_argument("energy: image shape mismatch");
    if (p.mode == ParamMap::Mode::PerPixel && p.beta.size() != x.size())
        throw std::invalid_argument("energy: parameter map size mismatch");
}

}  // namespace

double energy_value(const Image& x, const Image& y, const ParamMap& p, double eps) {
    check_shapes(x, y, p);
    double fidelity = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.data[i] - y.data[i];
        fidelity += d * d;
    }
    GradField g = grad_apply(x);
    const std::size_t n = g.pixels();
    double reg = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        reg += p.lambda_at(i) * huber_value(g.h(i), g.v(i), eps);
    return 0.5 * fidelity + reg;
}

Image energy_grad(const Image& x, const Image& y, const ParamMap& p, double eps) {
    Image out(x.n1, x.n2);
    GradField scratch;
    energy_grad_into(x, y, p, eps, out, scratch);
    return out;
}

void energy_grad_into(const Image& x, const Image& y, const ParamMap& p, double eps,
                      Image& out, GradField& scratch) {
    check_shapes(x, y, p);
    grad_apply_into(x, scratch);
    const std::size_t n = scratch.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        double g1, g2;
        huber_grad(scratch.h(i), scratch.v(i), eps, g1, g2);
        const double lam = p.lambda_at(i);
        scratch.h(i) = lam * g1;
        scratch.v(i) = lam * g2;
    }
    grad_adjoint_into(scratch, out);
    for (std::size_t i = 0; i < n; ++i) out.data[i] += x.data[i] - y.data[i];
}

Image hess_vec(const Image& x, const ParamMap& p, double eps, const Image& w) {
    return HessOperator(x, p, eps).apply(w);
}

HessOperator::HessOperator(const Image& x, const ParamMap& p, double eps)
    : n1_(x.n1), n2_(x.n2) {
    if (p.mode == ParamMap::Mode::PerPixel && p.beta.size() != x.size())
        throw std::invalid_argument("HessOperator: parameter map size mismatch");
    GradField g = grad_apply(x);
    const std::size_t n = g.pixels();
    weighted_blocks_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Sym2 m = huber_hess(g.h(i), g.v(i), eps);
        const double lam = p.lambda_at(i);
        m.a *= lam;
        m.b *= lam;
        m.c *= lam;
        weighted_blocks_[i] = m;
    }
}

void HessOperator::apply(const Image& w, Image& out) const {
    if (w.n1 != n1_ || w.n2 != n2_) throw std::invalid_argument("HessOperator: shape mismatch");
    grad_apply_into(w, scratch_);
    const std::size_t n = scratch_.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        const Sym2& m = weighted_blocks_[i];
        const double gh = scratch_.h(i), gv = scratch_.v(i);
        scratch_.h(i) = m.a * gh + m.b * gv;
        scratch_.v(i) = m.b * gh + m.c * gv;
    }
    grad_adjoint_into(scratch_, out);
    for (std::size_t i = 0; i < n; ++i) out.data[i] += w.data[i];
}

Image HessOperator::apply(const Image& w) const {
    Image out(n1_, n2_);
    apply(w, out);
    return out;
}

double lipschitz_bound(double lambda_max, double eps) {
    return 1.0 + 12.0 * lambda_max / eps;
}

}  // namespace wtv
