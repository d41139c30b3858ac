#include <cmath>
#include <set>

#include "doctest.h"
#include "support/oracles.hpp"
#include "wtv/image.hpp"

using namespace wtv;
using namespace wtv::testing;

TEST_SUITE("image") {

TEST_CASE("gradient of a constant image is zero") {
    Image x(5, 7, 0.37);
    GradField g = grad_apply(x);
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("1x2 image periodic forward differences") {
    Image x(1, 2);
    x.data = {0.2, 0.9};  // [a, b]
    GradField g = grad_apply(x);
    CHECK(g.h(0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(g.h(1) == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(g.v(0) == 0.0);
    CHECK(g.v(1) == 0.0);
}

TEST_CASE("impulse columns match the dense difference matrix") {
    const int n1 = 4, n2 = 4;
    const Eigen::MatrixXd d = dense_grad_matrix(n1, n2);
    for (int j : {0, 5, 15}) {
        Image e(n1, n2);
        e.data[j] = 1.0;
        GradField g = grad_apply(e);
        for (int r = 0; r < 2 * n1 * n2; ++r)
            CHECK(g.data[r] == doctest::Approx(d(r, j)).epsilon(1e-15));
    }
}

TEST_CASE("adjoint identity <Dx,g> = <x,D^T g>") {
    for (int trial = 0; trial < 200; ++trial) {
        const int n1 = 1 + trial % 16;
        const int n2 = 1 + (trial * 7) % 16;
        Image x = random_image(n1, n2, 100 + trial, -1.0, 1.0);
        GradField g = random_field(n1, n2, 900 + trial);
        GradField dx = grad_apply(x);
        Image dtg = grad_adjoint(g);
        double lhs = 0.0;
        for (std::size_t i = 0; i < dx.data.size(); ++i) lhs += dx.data[i] * g.data[i];
        const double rhs = dot(x, dtg);
        double xn = norm2(x);
        double gn = 0.0;
        for (double v : g.data) gn += v * v;
        gn = std::sqrt(gn);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1e-30, xn * gn));
    }
}

TEST_CASE("D^T D impulse is the negated 5-point periodic Laplacian") {
    const int n1 = 6, n2 = 5;
    Image e(n1, n2);
    const int r = 2, c = 3;
    e.at(r, c) = 1.0;
    Image lap = grad_adjoint(grad_apply(e));
    for (int k1 = 0; k1 < n1; ++k1)
        for (int k2 = 0; k2 < n2; ++k2) {
            double expected = 0.0;
            if (k1 == r && k2 == c) expected = 4.0;
            if ((k1 == (r + 1) % n1 || k1 == (r + n1 - 1) % n1) && k2 == c) expected = -1.0;
            if ((k2 == (c + 1) % n2 || k2 == (c + n2 - 1) % n2) && k1 == r) expected = -1.0;
            CHECK(lap.at(k1, k2) == doctest::Approx(expected).epsilon(1e-14));
        }
}

TEST_CASE("operator norm of D^T D stays below 8") {
    for (auto [n1, n2] : {std::pair{8, 8}, {9, 7}, {16, 16}, {5, 12}}) {
        const double eig = power_iteration(
            [](const Image& v) { return grad_adjoint(grad_apply(v)); }, n1, n2, 200, 42);
        CHECK(eig <= 8.0 + 1e-9);
        CHECK(eig > 4.0);  // nontrivial operator
    }
}

TEST_CASE("D^T output is orthogonal to constants") {
    GradField g = random_field(9, 11, 77);
    Image dtg = grad_adjoint(g);
    double sum = 0.0;
    for (double v : dtg.data) sum += v;
    CHECK(std::abs(sum) <= 1e-12 * g.data.size());
}

TEST_CASE("noise synthesis is bit-deterministic given the seed") {
    Image zero(16, 16, 0.0);
    for (auto kind : {NoiseSpec::Kind::Gaussian, NoiseSpec::Kind::Uniform}) {
        NoiseSpec spec{kind, 0.07, 987654321ULL};
        Image a = add_noise(zero, spec);
        Image b = add_noise(zero, spec);
        CHECK(a.data == b.data);
    }
}

TEST_CASE("gaussian sample std matches sigma at 256x256") {
    Image zero(256, 256, 0.0);
    NoiseSpec spec{NoiseSpec::Kind::Gaussian, 0.05, 2024ULL};
    Image y = add_noise(zero, spec);
    double m = mean(y);
    double var = 0.0;
    for (double v : y.data) var += (v - m) * (v - m);
    var /= static_cast<double>(y.size() - 1);
    const double sd = std::sqrt(var);
    CHECK(sd >= 0.0485);
    CHECK(sd <= 0.0515);
    CHECK(std::abs(m) < 1e-3);
}

TEST_CASE("uniform noise respects the support bound and std") {
    Image zero(128, 128, 0.0);
    NoiseSpec spec{NoiseSpec::Kind::Uniform, 0.09, 55ULL};
    Image y = add_noise(zero, spec);
    const double bound = 0.09 * std::sqrt(3.0);
    double max_abs = 0.0, var = 0.0;
    for (double v : y.data) {
        max_abs = std::max(max_abs, std::abs(v));
        var += v * v;
    }
    var /= static_cast<double>(y.size());
    CHECK(max_abs <= bound);
    CHECK(std::sqrt(var) == doctest::Approx(0.09).epsilon(0.02));
}

TEST_CASE("sigma must be positive") {
    Image x(4, 4, 0.5);
    CHECK_THROWS_AS(add_noise(x, NoiseSpec{NoiseSpec::Kind::Gaussian, 0.0, 1ULL}),
                    std::invalid_argument);
}

TEST_CASE("center crop takes the middle window") {
    Image x(6, 8);
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = static_cast<double>(i);
    Image c = center_crop(x, 4, 4);
    CHECK(c.n1 == 4);
    CHECK(c.n2 == 4);
    CHECK(c.at(0, 0) == x.at(1, 2));
    CHECK(c.at(3, 3) == x.at(4, 5));
    Image same = center_crop(x, 100, 100);
    CHECK(same.data == x.data);
}

}  // TEST_SUITE
