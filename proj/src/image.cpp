#include "wtv/image.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace wtv {

const char* rng_algorithm_name() { return "mt19937_64+box-muller"; }

GradField grad_apply(const Image& x) {
    GradField out(x.n1, x.n2);
    grad_apply_into(x, out);
    return out;
}

void grad_apply_into(const Image& x, GradField& out) {
    const int n1 = x.n1, n2 = x.n2;
    if (out.n1 != n1 || out.n2 != n2) out = GradField(n1, n2);
    const std::size_t n = x.size();
    const double* px = x.data.data();
    double* gh = out.data.data();
    double* gv = out.data.data() + n;
    for (int k1 = 0; k1 < n1; ++k1) {
        const std::size_t row = static_cast<std::size_t>(k1) * n2;
        const std::size_t row_down = static_cast<std::size_t>(k1 + 1 == n1 ? 0 : k1 + 1) * n2;
        for (int k2 = 0; k2 < n2; ++k2) {
            const std::size_t i = row + k2;
            const std::size_t right = row + (k2 + 1 == n2 ? 0 : k2 + 1);
            gh[i] = px[right] - px[i];
            gv[i] = px[row_down + k2] - px[i];
        }
    }
}

Image grad_adjoint(const GradField& g) {
    Image out(g.n1, g.n2);
    grad_adjoint_into(g, out);
    return out;
}

void grad_adjoint_into(const GradField& g, Image& out) {
    const int n1 = g.n1, n2 = g.n2;
    if (out.n1 != n1 || out.n2 != n2) out = Image(n1, n2);
    const std::size_t n = g.pixels();
    const double* gh = g.data.data();
    const double* gv = g.data.data() + n;
    double* po = out.data.data();
    for (int k1 = 0; k1 < n1; ++k1) {
        const std::size_t row = static_cast<std::size_t>(k1) * n2;
        const std::size_t row_up = static_cast<std::size_t>(k1 == 0 ? n1 - 1 : k1 - 1) * n2;
        for (int k2 = 0; k2 < n2; ++k2) {
            const std::size_t i = row + k2;
            const std::size_t left = row + (k2 == 0 ? n2 - 1 : k2 - 1);
            po[i] = (gh[left] - gh[i]) + (gv[row_up + k2] - gv[i]);
        }
    }
}

namespace {

// 53-bit mantissa draw in [0,1); bit-identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Image add_noise(const Image& x, const NoiseSpec& spec) {
    if (!(spec.sigma > 0.0)) throw std::invalid_argument("add_noise: sigma must be > 0");
    Image out = x;
    std::mt19937_64 rng(spec.seed);
    const std::size_t n = out.size();
    if (spec.kind == NoiseSpec::Kind::Uniform) {
        const double half_width = spec.sigma * std::sqrt(3.0);
        for (std::size_t i = 0; i < n; ++i)
            out.data[i] += half_width * (2.0 * uniform01(rng) - 1.0);
    } else {
        // Box-Muller, pairs; the std library's normal_distribution is not
        // bit-identical across implementations.
        const double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < n; i += 2) {
            const double u1 = 1.0 - uniform01(rng);  // (0,1], keeps log finite
            const double u2 = uniform01(rng);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            out.data[i] += spec.sigma * radius * std::cos(two_pi * u2);
            if (i + 1 < n) out.data[i + 1] += spec.sigma * radius * std::sin(two_pi * u2);
        }
    }
    return out;
}

Image center_crop(const Image& x, int max_n1, int max_n2) {
    const int m1 = std::min(x.n1, max_n1);
    const int m2 = std::min(x.n2, max_n2);
    if (m1 == x.n1 && m2 == x.n2) return x;
    const int off1 = (x.n1 - m1) / 2;
    const int off2 = (x.n2 - m2) / 2;
    Image out(m1, m2);
    for (int k1 = 0; k1 < m1; ++k1)
        for (int k2 = 0; k2 < m2; ++k2) out.at(k1, k2) = x.at(k1 + off1, k2 + off2);
    return out;
}

double dot(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double norm2(const Image& a) { return std::sqrt(dot(a, a)); }

double mean(const Image& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    return s / static_cast<double>(a.size());
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) + a) + b);
}

}  // namespace wtv
