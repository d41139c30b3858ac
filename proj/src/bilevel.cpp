#include "wtv/bilevel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "wtv/metrics.hpp"

namespace wtv {

void BilevelTrace::write_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open trace file: " + path);
    std::fprintf(f, "iter,Q,delta_beta,lambda_min,lambda_max,lambda_mean,ipsnr,issim,seconds\n");
    for (const TraceRow& r : rows) {
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.q,
                     r.delta_beta, r.lambda_min, r.lambda_max, r.lambda_mean, r.ipsnr, r.issim,
                     r.seconds);
    }
    std::fclose(f);
}

bool early_stop_check(double delta_beta_norm, double q_white, const BilevelConfig& cfg) {
    if (!cfg.stop_threshold)
        throw std::invalid_argument("early_stop_check: stop threshold not set");
    return delta_beta_norm > cfg.eps_outer && q_white >= *cfg.stop_threshold;
}

namespace {

double nan_value() { return std::nan(""); }

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

BilevelResult gd_bil(const Image& y, const ParamMap& beta0, const BilevelConfig& cfg,
                     const Image* x_ref,
                     const std::function<void(int, const ParamMap&, const Image&)>& on_iteration) {
    if (!(cfg.eta > 0.0) || !(cfg.eps_outer > 0.0) || !(cfg.lambda_cap > 0.0))
        throw std::invalid_argument("gd_bil: eta, eps_outer and lambda_cap must be positive");
    if (cfg.max_outer_iters < 1)
        throw std::invalid_argument("gd_bil: max_outer_iters must be >= 1");
    if (beta0.mode != cfg.mode) throw std::invalid_argument("gd_bil: beta0 mode mismatch");
    if (cfg.mode == ParamMap::Mode::PerPixel && beta0.beta.size() != y.size())
        throw std::invalid_argument("gd_bil: beta0 size mismatch");
    if (cfg.loss == LossKind::Mse && !x_ref)
        throw std::invalid_argument("gd_bil: MSE loss requires a reference image");
    if (x_ref && !x_ref->same_shape(y)) throw std::invalid_argument("gd_bil: reference shape mismatch");

    const double beta_cap = std::log(cfg.lambda_cap);
    const std::size_t n = y.size();
    const bool monitor = x_ref != nullptr;
    const double psnr_y = monitor ? psnr(y, *x_ref) : 0.0;
    const double ssim_y = monitor ? ssim(y, *x_ref) : 0.0;

    BilevelResult res;
    res.params = beta0;
    res.status = BilevelResult::Status::MaxIters;

    ParamMap current = beta0;
    Image x_warm = y;  // x*(exp(beta^{-1})) = y

    // Last iterate seen with Q >= threshold, for the whiteness-floor return.
    bool have_prev = false;
    ParamMap prev_params;
    Image prev_x;
    double prev_q = 0.0;

    for (int i = 0; i < cfg.max_outer_iters; ++i) {
        const auto t0 = std::chrono::steady_clock::now();

        LowerSolveResult lower = sc_agd(cfg.warm_start ? x_warm : y, y, current,
                                        cfg.epsilon_smoothing, cfg.tol_lower,
                                        cfg.lower_max_iters);
        if (lower.status == LowerSolveResult::Status::NonFinite) {
            res.status = BilevelResult::Status::NonFinite;
            res.params = current;
            res.x = std::move(lower.x_star);
            res.outer_iterations = i;
            return res;
        }

        LossEval loss = cfg.loss == LossKind::Whiteness ? whiteness_eval(lower.x_star, y)
                                                        : mse_eval(lower.x_star, *x_ref);
        if (!std::isfinite(loss.value)) {
            res.status = BilevelResult::Status::NonFinite;
            res.params = current;
            res.x = std::move(lower.x_star);
            res.outer_iterations = i;
            return res;
        }

        // Eq. (10) floor check on the iterate just evaluated; return the last
        // iterate that still satisfied Q >= threshold.
        if (cfg.loss == LossKind::Whiteness && cfg.stop_threshold &&
            loss.value < *cfg.stop_threshold) {
            res.status = BilevelResult::Status::WhitenessFloor;
            if (have_prev) {
                res.params = std::move(prev_params);
                res.x = std::move(prev_x);
                res.q = prev_q;
            } else {
                res.params = current;
                res.x = std::move(lower.x_star);
                res.q = loss.value;
            }
            res.outer_iterations = i;
            return res;
        }

        HypergradResult hg =
            hypergrad_from_loss_grad(lower.x_star, current, cfg.epsilon_smoothing, loss.grad_x,
                                     cfg.cg);
        if (!hg.cg_converged) {
            res.status = BilevelResult::Status::HypergradFailed;
            res.params = current;
            res.x = std::move(lower.x_star);
            res.q = loss.value;
            res.outer_iterations = i;
            return res;
        }

        ParamMap next = current;
        double delta_sq = 0.0;
        for (std::size_t j = 0; j < next.beta.size(); ++j) {
            double b = current.beta[j] - cfg.eta * hg.grad_beta[j];
            double lam;
            if (b >= beta_cap) {  // projection hits the cap exactly
                b = beta_cap;
                lam = cfg.lambda_cap;
            } else {
                lam = std::exp(b);
            }
            next.beta[j] = b;
            next.lambda[j] = lam;
            const double d = b - current.beta[j];
            delta_sq += d * d;
        }
        const double delta = std::sqrt(delta_sq);
        if (!all_finite(next.beta)) {
            res.status = BilevelResult::Status::NonFinite;
            res.params = current;
            res.x = std::move(lower.x_star);
            res.q = loss.value;
            res.outer_iterations = i + 1;
            return res;
        }

        TraceRow row;
        row.iter = i;
        row.q = loss.value;
        row.delta_beta = delta;
        row.lambda_min = current.lambda_min();
        row.lambda_max = current.lambda_max();
        row.lambda_mean = current.lambda_mean(n);
        row.lower_iterations = lower.iterations;
        row.ipsnr = monitor ? psnr(lower.x_star, *x_ref) - psnr_y : nan_value();
        row.issim = monitor ? ssim(lower.x_star, *x_ref) - ssim_y : nan_value();
        row.seconds =
            cfg.record_timing
                ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                : 0.0;
        res.trace.rows.push_back(row);

        have_prev = true;
        prev_params = current;
        prev_q = loss.value;
        if (cfg.warm_start) {
            prev_x = lower.x_star;       // keep a copy for the floor return
            x_warm = std::move(lower.x_star);
        } else {
            prev_x = std::move(lower.x_star);
        }

        current = std::move(next);
        if (on_iteration) on_iteration(i, current, prev_x);

        if (delta <= cfg.eps_outer) {
            // Converged in beta; one more lower solve so x matches beta-hat.
            LowerSolveResult fin = sc_agd(cfg.warm_start ? x_warm : y, y, current,
                                          cfg.epsilon_smoothing, cfg.tol_lower,
                                          cfg.lower_max_iters);
            res.status = BilevelResult::Status::ConvergedDelta;
            res.params = current;
            res.q = cfg.loss == LossKind::Whiteness ? whiteness_eval(fin.x_star, y).value
                                                    : mse_eval(fin.x_star, *x_ref).value;
            res.x = std::move(fin.x_star);
            res.outer_iterations = i + 1;
            return res;
        }
    }

    // Budget exhausted: return the last evaluated pair (beta^i, x*(beta^i)).
    res.status = BilevelResult::Status::MaxIters;
    res.params = std::move(prev_params);
    res.x = std::move(prev_x);
    res.q = prev_q;
    res.outer_iterations = cfg.max_outer_iters;
    return res;
}

}  // namespace wtv
