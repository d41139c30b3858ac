// Scratch experiment driver used while tuning acceptance scales (not a test).
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "support/synthetic.hpp"
#include "wtv/bilevel.hpp"
#include "wtv/image_io.hpp"
#include "wtv/metrics.hpp"

using namespace wtv;
using namespace wtv::testing;

int main(int argc, char** argv) {
    int side = 64;
    int iters = 500;
    double sigma = 0.05;
    std::uint64_t seed = 1;
    const char* loss = "white";
    const char* reg = "wtv";
    double eta = -1.0;
    const char* image_path = nullptr;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--image")) image_path = argv[i + 1];
        if (!std::strcmp(argv[i], "--side")) side = std::atoi(argv[i + 1]);
        if (!std::strcmp(argv[i], "--iters")) iters = std::atoi(argv[i + 1]);
        if (!std::strcmp(argv[i], "--sigma")) sigma = std::atof(argv[i + 1]);
        if (!std::strcmp(argv[i], "--seed")) seed = std::strtoull(argv[i + 1], nullptr, 10);
        if (!std::strcmp(argv[i], "--loss")) loss = argv[i + 1];
        if (!std::strcmp(argv[i], "--reg")) reg = argv[i + 1];
        if (!std::strcmp(argv[i], "--eta")) eta = std::atof(argv[i + 1]);
    }

    Image clean = image_path ? center_crop(load_image(image_path), side, side)
                             : make_natural_image(side, side, seed);
    Image y = add_noise(clean, {NoiseSpec::Kind::Gaussian, sigma, seed + 1000});

    BilevelConfig cfg;
    cfg.loss = !std::strcmp(loss, "white") ? LossKind::Whiteness : LossKind::Mse;
    cfg.mode = !std::strcmp(reg, "wtv") ? ParamMap::Mode::PerPixel : ParamMap::Mode::Scalar;
    cfg.epsilon_smoothing = cfg.mode == ParamMap::Mode::PerPixel ? 0.1 : 0.01;
    cfg.eta = eta > 0 ? eta : (cfg.loss == LossKind::Whiteness ? 1000.0 : 100.0);
    cfg.max_outer_iters = iters;
    cfg.record_timing = true;

    ParamMap beta0 = ParamMap::constant(cfg.mode, 1.0, y.size());
    BilevelResult res = gd_bil(y, beta0, cfg, &clean);

    double best_ipsnr = -1e9;
    int best_iter = 0;
    for (const auto& r : res.trace.rows) {
        if (r.ipsnr > best_ipsnr) {
            best_ipsnr = r.ipsnr;
            best_iter = r.iter;
        }
    }
    double q_at_best = 0.0, total_sec = 0.0;
    for (const auto& r : res.trace.rows) {
        if (r.iter == best_iter) q_at_best = r.q;
        total_sec += r.seconds;
    }

    std::printf("side=%d sigma=%g loss=%s reg=%s rows=%zu status=%d\n", side, sigma, loss, reg,
                res.trace.rows.size(), static_cast<int>(res.status));
    std::printf("peak IPSNR %.3f at iter %d; Q there %.4f; final Q %.4f; final IPSNR %.3f\n",
                best_ipsnr, best_iter, q_at_best, res.trace.rows.back().q,
                res.trace.rows.back().ipsnr);
    std::printf("total %.1f s, %.1f ms/outer-iter\n", total_sec,
                1000.0 * total_sec / res.trace.rows.size());
    const int stride = std::max(1, static_cast<int>(res.trace.rows.size()) / 20);
    for (std::size_t i = 0; i < res.trace.rows.size(); i += stride) {
        const auto& r = res.trace.rows[i];
        std::printf("  it %4d Q %.4f ipsnr %6.3f issim %.4f lmin %.2e lmax %.2e dbeta %.2e\n",
                    r.iter, r.q, r.ipsnr, r.issim, r.lambda_min, r.lambda_max, r.delta_beta);
    }
    return 0;
}
