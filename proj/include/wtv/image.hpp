#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wtv {

// 2-D grayscale raster, row-major: pixel (k1, k2) lives at index k1 * n2 + k2.
// Intensities are nominally in [0,1]; the math routines never clamp.
struct Image {
    int n1 = 0;  // height (rows)
    int n2 = 0;  // width (columns)
    std::vector<double> data;

    Image() = default;
    Image(int height, int width, double fill = 0.0)
        : n1(height),
          n2(width),
          data(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {}

    std::size_t size() const { return data.size(); }
    std::size_t idx(int k1, int k2) const {
        return static_cast<std::size_t>(k1) * static_cast<std::size_t>(n2) +
               static_cast<std::size_t>(k2);
    }
    double& at(int k1, int k2) { return data[idx(k1, k2)]; }
    double at(int k1, int k2) const { return data[idx(k1, k2)]; }
    bool same_shape(const Image& o) const { return n1 == o.n1 && n2 == o.n2; }
};

// Stacked per-pixel forward differences: entries [0,n) hold the horizontal
// block (difference toward the next column), entries [n,2n) the vertical
// block (toward the next row). Same row-major pixel indexing as Image.
struct GradField {
    int n1 = 0;
    int n2 = 0;
    std::vector<double> data;  // length 2 * n1 * n2

    GradField() = default;
    GradField(int height, int width)
        : n1(height),
          n2(width),
          data(2 * static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0.0) {}

    std::size_t pixels() const { return data.size() / 2; }
    double& h(std::size_t i) { return data[i]; }
    double h(std::size_t i) const { return data[i]; }
    double& v(std::size_t i) { return data[pixels() + i]; }
    double v(std::size_t i) const { return data[pixels() + i]; }
};

struct NoiseSpec {
    enum class Kind { Gaussian, Uniform };
    Kind kind = Kind::Gaussian;
    double sigma = 0.0;       // standard deviation for both kinds
    std::uint64_t seed = 0;
};

// Algorithm name recorded in output metadata so runs are reproducible
// across machines.
const char* rng_algorithm_name();

// Forward differences with periodic boundary; linear in x.
GradField grad_apply(const Image& x);
void grad_apply_into(const Image& x, GradField& out);

// Exact adjoint of grad_apply: <Dx, g> = <x, D^T g> for all x, g.
Image grad_adjoint(const GradField& g);
void grad_adjoint_into(const GradField& g, Image& out);

// y = x + e, e i.i.d. zero-mean with std sigma; gaussian N(0, sigma^2) or
// uniform U(-sigma*sqrt(3), sigma*sqrt(3)). Deterministic given spec.seed.
// Output is NOT clipped to [0,1].
Image add_noise(const Image& x, const NoiseSpec& spec);

// Center crop to at most (max_n1, max_n2); returns the image unchanged when
// already small enough.
Image center_crop(const Image& x, int max_n1, int max_n2);

// Small vector helpers shared across modules.
double dot(const Image& a, const Image& b);
double norm2(const Image& a);
double mean(const Image& a);

// Derives a per-run seed from a base seed and run indices (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

}  // namespace wtv
