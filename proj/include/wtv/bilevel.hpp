#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wtv/energy.hpp"
#include "wtv/hypergradient.hpp"
#include "wtv/image.hpp"
#include "wtv/losses.hpp"
#include "wtv/lower_solver.hpp"

namespace wtv {

struct BilevelConfig {
    LossKind loss = LossKind::Whiteness;
    ParamMap::Mode mode = ParamMap::Mode::PerPixel;
    double eta = 1000.0;          // outer step size (1000 whiteness, 100 MSE)
    double eps_outer = 1e-6;      // outer tolerance on ||beta_{i+1} - beta_i||
    double tol_lower = 1e-6;
    int lower_max_iters = 50000;
    int max_outer_iters = 3000;
    double lambda_cap = 5.0;      // beta projected onto beta <= ln(lambda_cap)
    std::optional<double> stop_threshold;  // Q_bar; whiteness-loss early stop
    double epsilon_smoothing = 0.1;        // 0.1 for per-pixel WTV, 0.01 for scalar TV
    bool warm_start = true;
    CgSettings cg;
    bool record_timing = true;    // false zeroes the seconds column (reproducible output)
};

struct TraceRow {
    int iter = 0;
    double q = 0.0;
    double delta_beta = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double lambda_mean = 0.0;
    int lower_iterations = 0;
    double ipsnr = 0.0;   // NaN when no reference was provided
    double issim = 0.0;   // NaN when no reference was provided
    double seconds = 0.0;
};

struct BilevelTrace {
    std::vector<TraceRow> rows;
    void write_csv(const std::string& path) const;
};

struct BilevelResult {
    enum class Status { ConvergedDelta, WhitenessFloor, MaxIters, NonFinite, HypergradFailed };

    ParamMap params;   // beta-hat with lambda = exp(beta-hat)
    Image x;           // lower-level minimizer matching params
    double q = 0.0;    // upper loss at the returned iterate
    BilevelTrace trace;
    Status status = Status::MaxIters;
    int outer_iterations = 0;
};

// Eq.-(10)-style continuation predicate: keep iterating while the beta step
// is above tolerance AND the whiteness loss sits at or above the threshold.
bool early_stop_check(double delta_beta_norm, double q_white, const BilevelConfig& cfg);

// Outer gradient descent on beta with warm-started lower solves and box
// projection lambda <= lambda_cap. x_ref is required for the MSE loss and
// enables IPSNR/ISSIM monitoring in the trace (never used for stopping).
// When the whiteness floor triggers, the returned iterate is the last one
// with Q >= stop_threshold.
BilevelResult gd_bil(const Image& y, const ParamMap& beta0, const BilevelConfig& cfg,
                     const Image* x_ref = nullptr,
                     const std::function<void(int, const ParamMap&, const Image&)>&
                         on_iteration = nullptr);

}  // namespace wtv
