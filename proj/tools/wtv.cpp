// Command-line front end: noise synthesis, single-image denoising, stopping
// threshold calibration, and benchmark-table generation.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wtv/bilevel.hpp"
#include "wtv/calibration.hpp"
#include "wtv/image.hpp"
#include "wtv/image_io.hpp"
#include "wtv/metrics.hpp"

namespace fs = std::filesystem;
using namespace wtv;

namespace {

int default_jobs() {
    if (const char* env = std::getenv("WTV_JOBS")) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    return 1;
}

// Noisy inputs are stored unclipped in the raw field format; plain images
// load through the codec path.
Image load_input(const std::string& path) {
    if (fs::exists(path + ".json")) return load_field_image(path);
    return load_image(path);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_beta_preview(const ParamMap& p, int n1, int n2, const std::string& path) {
    // log-scale view of the map, clipped below at -10 for rendering
    const double lo = -10.0;
    const double hi = std::log(5.0);
    Image view(n1, n2);
    for (std::size_t i = 0; i < view.size(); ++i) {
        const double b = std::max(p.beta[p.mode == ParamMap::Mode::Scalar ? 0 : i], lo);
        view.data[i] = (b - lo) / (hi - lo);
    }
    save_image(view, path);
}

struct DenoiseOutcome {
    BilevelResult result;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------- add-noise

struct AddNoiseArgs {
    std::string input, output, preview;
    std::string kind = "gaussian";
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

int run_add_noise(const AddNoiseArgs& a) {
    Image clean = load_image(a.input);
    NoiseSpec spec;
    spec.kind = a.kind == "uniform" ? NoiseSpec::Kind::Uniform : NoiseSpec::Kind::Gaussian;
    spec.sigma = a.sigma;
    spec.seed = a.seed;
    Image noisy = add_noise(clean, spec);

    double max_abs_noise = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i)
        max_abs_noise = std::max(max_abs_noise, std::abs(noisy.data[i] - clean.data[i]));

    std::ostringstream notes;
    notes << "kind=" << a.kind << " sigma=" << format_double(a.sigma) << " seed=" << a.seed
          << " rng=" << rng_algorithm_name() << " max_abs_noise=" << format_double(max_abs_noise);
    save_field(a.output, noisy, "noisy-image", notes.str());

    const std::string preview = a.preview.empty() ? a.output + ".png" : a.preview;
    save_image(noisy, preview);
    std::printf("wrote %s (+sidecar, preview %s), max|e| = %.6g\n", a.output.c_str(),
                preview.c_str(), max_abs_noise);
    return 0;
}

// ------------------------------------------------------------------ denoise

struct DenoiseArgs {
    std::string input;
    std::string loss = "white";
    std::string reg = "wtv";
    double epsilon = -1.0;  // default depends on --reg
    double eta = -1.0;      // default depends on --loss
    double beta0 = 1.0;
    double lambda_cap = 5.0;
    double tol = 1e-6;
    double outer_eps = 1e-6;
    int max_iters = 3000;
    std::string threshold_file;
    bool no_early_stop = false;
    std::string reference;
    std::string out_image, out_lambda, out_trace, out_beta_preview;
    std::string snapshot_dir;
    int snapshot_stride = 0;
    bool sequential = false;
};

BilevelConfig denoise_config(const DenoiseArgs& a, std::optional<double> threshold) {
    BilevelConfig cfg;
    cfg.loss = a.loss == "mse" ? LossKind::Mse : LossKind::Whiteness;
    cfg.mode = a.reg == "tv" ? ParamMap::Mode::Scalar : ParamMap::Mode::PerPixel;
    cfg.epsilon_smoothing = a.epsilon > 0 ? a.epsilon : (a.reg == "tv" ? 0.01 : 0.1);
    cfg.eta = a.eta > 0 ? a.eta : (cfg.loss == LossKind::Whiteness ? 1000.0 : 100.0);
    cfg.eps_outer = a.outer_eps;
    cfg.tol_lower = a.tol;
    cfg.max_outer_iters = a.max_iters;
    cfg.lambda_cap = a.lambda_cap;
    cfg.stop_threshold = threshold;
    cfg.record_timing = !a.sequential;
    return cfg;
}

const char* stop_reason_name(BilevelResult::Status s) {
    switch (s) {
        case BilevelResult::Status::ConvergedDelta: return "converged";
        case BilevelResult::Status::WhitenessFloor: return "whiteness-floor";
        case BilevelResult::Status::MaxIters: return "max-iters";
        case BilevelResult::Status::NonFinite: return "non-finite";
        case BilevelResult::Status::HypergradFailed: return "hypergrad-failed";
    }
    return "unknown";
}

int run_denoise(const DenoiseArgs& a) {
    Image y = load_input(a.input);

    std::optional<double> threshold;
    if (a.loss == "white" && !a.no_early_stop) {
        if (a.threshold_file.empty())
            throw CLI::ValidationError(
                "--threshold-file is required for --loss white (or pass --no-early-stop)");
        threshold = Threshold::load_json(a.threshold_file).q_bar;
    }

    std::optional<Image> reference;
    if (!a.reference.empty()) reference = load_image(a.reference);
    if (a.loss == "mse" && !reference)
        throw CLI::ValidationError("--reference is required for --loss mse");
    if (reference && !reference->same_shape(y))
        throw CLI::ValidationError("reference shape does not match input");

    BilevelConfig cfg = denoise_config(a, threshold);
    ParamMap beta0 = ParamMap::constant(cfg.mode, a.beta0, y.size());

    std::function<void(int, const ParamMap&, const Image&)> on_iter;
    if (!a.snapshot_dir.empty() && a.snapshot_stride > 0) {
        fs::create_directories(a.snapshot_dir);
        on_iter = [&](int iter, const ParamMap& p, const Image&) {
            if (iter % a.snapshot_stride != 0) return;
            char name[64];
            std::snprintf(name, sizeof name, "beta_iter%06d.f64", iter);
            Image bmap(y.n1, y.n2);
            for (std::size_t i = 0; i < bmap.size(); ++i)
                bmap.data[i] = p.beta[p.mode == ParamMap::Mode::Scalar ? 0 : i];
            save_field((fs::path(a.snapshot_dir) / name).string(), bmap, "beta-map",
                       "iter=" + std::to_string(iter));
        };
    }

    BilevelResult res = gd_bil(y, beta0, cfg, reference ? &*reference : nullptr, on_iter);

    if (res.status == BilevelResult::Status::NonFinite ||
        res.status == BilevelResult::Status::HypergradFailed) {
        std::fprintf(stderr, "denoise aborted: %s (after %d outer iterations)\n",
                     stop_reason_name(res.status), res.outer_iterations);
        if (!a.out_trace.empty()) res.trace.write_csv(a.out_trace);
        return 2;
    }

    if (!a.out_image.empty()) save_image(res.x, a.out_image);
    if (!a.out_lambda.empty()) {
        Image lmap(y.n1, y.n2);
        for (std::size_t i = 0; i < lmap.size(); ++i)
            lmap.data[i] = res.params.lambda_at(i);
        save_field(a.out_lambda, lmap, "lambda-map",
                   "loss=" + a.loss + " reg=" + a.reg + " stop=" + stop_reason_name(res.status));
    }
    if (!a.out_beta_preview.empty())
        write_beta_preview(res.params, y.n1, y.n2, a.out_beta_preview);
    if (!a.out_trace.empty()) res.trace.write_csv(a.out_trace);

    std::printf("stop=%s outer_iters=%d Q=%.6g lambda=[%.4g, %.4g]\n",
                stop_reason_name(res.status), res.outer_iterations, res.q,
                res.params.lambda_min(), res.params.lambda_max());
    return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    std::string dataset_dir;
    std::vector<double> sigmas = {0.01, 0.05, 0.1};
    std::uint64_t seed_base = 1234;
    std::vector<std::uint64_t> seeds;
    int budget = 3000;
    int crop = 180;
    double eta = 1000.0;
    std::string out = "threshold.json";
    int jobs = default_jobs();
    bool sequential = false;
};

std::vector<std::string> list_dataset(const std::string& dir) {
    std::vector<std::string> files;
    const fs::path manifest = fs::path(dir) / "manifest.txt";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
                line.pop_back();
            if (!line.empty()) files.push_back((fs::path(dir) / line).string());
        }
        return files;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".pgm" || ext == ".png") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

int run_calibrate(const CalibrateArgs& a) {
    const std::vector<std::string> files = list_dataset(a.dataset_dir);
    if (files.empty()) throw CLI::ValidationError("no images found in " + a.dataset_dir);

    std::vector<Image> images;
    std::vector<std::string> ids;
    for (const auto& f : files) {
        images.push_back(load_image(f));
        ids.push_back(fs::path(f).filename().string());
    }

    CalibrationConfig cfg;
    cfg.budget = a.budget;
    cfg.crop = a.crop;
    cfg.seed_base = a.seed_base;
    cfg.explicit_seeds = a.seeds;
    cfg.run.mode = ParamMap::Mode::PerPixel;
    cfg.run.eta = a.eta;
    cfg.run.record_timing = !a.sequential;

    const int jobs = a.sequential ? 1 : a.jobs;
    Threshold th = calibrate_threshold(images, ids, a.sigmas, cfg, a.dataset_dir, jobs);
    th.save_json(a.out);

    std::printf("%-24s %-8s %-12s %-12s %-10s\n", "image", "sigma", "peak_ipsnr", "q_at_peak",
                "argmax");
    for (const auto& r : th.records)
        std::printf("%-24s %-8.3g %-12.4f %-12.6f %-10d\n", r.image_id.c_str(), r.sigma,
                    r.peak_ipsnr, r.q_at_peak, r.argmax_iter);
    if (!th.failed_runs.empty())
        std::printf("excluded %zu failed run(s)\n", th.failed_runs.size());
    std::printf("q_bar = %.6f (%zu records) -> %s\n", th.q_bar, th.records.size(),
                a.out.c_str());
    return 0;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::vector<std::string> images;
    std::vector<double> sigmas = {0.03, 0.06, 0.09};
    std::vector<std::string> methods = {"tv-mse", "wtv-mse", "tv-white", "wtv-white"};
    std::string threshold_file;
    std::string out = "table.csv";
    std::string plots_dir;
    std::uint64_t seed_base = 1234;
    int crop = 180;
    int max_iters = 3000;
    double tol = 1e-6;
    int jobs = default_jobs();
    bool sequential = false;
};

struct CellResult {
    double ipsnr = std::nan("");
    double issim = std::nan("");
    double q = std::nan("");
    int outer_iters = 0;
    std::string stop = "failed";
    std::string error;
    double seconds = 0.0;
    BilevelTrace trace;
    bool ok = false;
};

DenoiseArgs method_args(const std::string& method) {
    DenoiseArgs d;
    d.reg = method.rfind("wtv", 0) == 0 ? "wtv" : "tv";
    d.loss = method.find("white") != std::string::npos ? "white" : "mse";
    return d;
}

int run_benchmark(const BenchmarkArgs& a) {
    std::optional<double> threshold;
    const bool any_white = std::any_of(a.methods.begin(), a.methods.end(), [](const auto& m) {
        return m.find("white") != std::string::npos;
    });
    if (any_white) {
        if (a.threshold_file.empty())
            throw CLI::ValidationError("--threshold-file is required for whiteness methods");
        threshold = Threshold::load_json(a.threshold_file).q_bar;
    }

    struct Cell {
        std::size_t image_idx, sigma_idx, method_idx;
    };
    std::vector<Image> cleans;
    for (const auto& path : a.images)
        cleans.push_back(center_crop(load_image(path), a.crop, a.crop));

    // One noisy realization per (image, sigma), shared by all methods.
    std::vector<std::vector<Image>> noisy(cleans.size());
    for (std::size_t i = 0; i < cleans.size(); ++i)
        for (std::size_t s = 0; s < a.sigmas.size(); ++s) {
            NoiseSpec spec{NoiseSpec::Kind::Gaussian, a.sigmas[s],
                           derive_seed(a.seed_base, i, s)};
            noisy[i].push_back(add_noise(cleans[i], spec));
        }

    std::vector<Cell> cells;
    for (std::size_t i = 0; i < cleans.size(); ++i)
        for (std::size_t s = 0; s < a.sigmas.size(); ++s)
            for (std::size_t m = 0; m < a.methods.size(); ++m) cells.push_back({i, s, m});

    std::vector<CellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells.size()) return;
            const Cell& cell = cells[k];
            const std::string& method = a.methods[cell.method_idx];
            CellResult& out = results[k];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                DenoiseArgs d = method_args(method);
                d.tol = a.tol;
                d.max_iters = a.max_iters;
                d.sequential = a.sequential;
                BilevelConfig cfg = denoise_config(
                    d, d.loss == "white" ? threshold : std::nullopt);
                const Image& y = noisy[cell.image_idx][cell.sigma_idx];
                const Image& ref = cleans[cell.image_idx];
                ParamMap beta0 = ParamMap::constant(cfg.mode, 1.0, y.size());
                BilevelResult res = gd_bil(y, beta0, cfg, &ref);
                if (res.status == BilevelResult::Status::NonFinite ||
                    res.status == BilevelResult::Status::HypergradFailed)
                    throw std::runtime_error(stop_reason_name(res.status));
                out.ipsnr = ipsnr(res.x, y, ref);
                out.issim = issim(res.x, y, ref);
                out.q = res.q;
                out.outer_iters = res.outer_iterations;
                out.stop = stop_reason_name(res.status);
                out.trace = std::move(res.trace);
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
            out.seconds = a.sequential ? 0.0
                                       : std::chrono::duration<double>(
                                             std::chrono::steady_clock::now() - t0)
                                             .count();
            std::lock_guard<std::mutex> lock(log_mutex);
            std::printf("[%zu/%zu] %s sigma=%g %s: %s\n", k + 1, cells.size(),
                        fs::path(a.images[cell.image_idx]).filename().string().c_str(),
                        a.sigmas[cell.sigma_idx], method.c_str(),
                        out.ok ? "ok" : out.error.c_str());
        }
    };

    const int width = a.sequential ? 1 : std::max(1, a.jobs);
    if (width == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < width; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    auto cell_at = [&](std::size_t i, std::size_t s, std::size_t m) -> const CellResult& {
        return results[(i * a.sigmas.size() + s) * a.methods.size() + m];
    };

    // Table-1-shaped summary: one row per (image, sigma), method column pairs.
    {
        std::FILE* f = std::fopen(a.out.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot write " + a.out);
        std::fprintf(f, "image,sigma");
        for (const auto& m : a.methods) {
            std::string key = m;
            std::replace(key.begin(), key.end(), '-', '_');
            std::fprintf(f, ",%s_ipsnr,%s_issim", key.c_str(), key.c_str());
        }
        std::fprintf(f, ",status\n");
        for (std::size_t i = 0; i < cleans.size(); ++i)
            for (std::size_t s = 0; s < a.sigmas.size(); ++s) {
                std::fprintf(f, "%s,%.17g",
                             fs::path(a.images[i]).filename().string().c_str(), a.sigmas[s]);
                std::string status = "ok";
                for (std::size_t m = 0; m < a.methods.size(); ++m) {
                    const CellResult& r = cell_at(i, s, m);
                    std::fprintf(f, ",%.17g,%.17g", r.ipsnr, r.issim);
                    if (!r.ok) status = "partial-failure";
                }
                std::fprintf(f, ",%s\n", status.c_str());
            }
        std::fclose(f);
    }

    // Per-run metadata.
    {
        const std::string runs_path = a.out + ".runs.csv";
        std::FILE* f = std::fopen(runs_path.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot write " + runs_path);
        std::fprintf(f, "image,sigma,method,seed,ipsnr,issim,Q,outer_iters,stop,seconds,status,"
                        "rng\n");
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const Cell& c = cells[k];
            const CellResult& r = results[k];
            std::fprintf(f, "%s,%.17g,%s,%llu,%.17g,%.17g,%.17g,%d,%s,%.17g,%s,%s\n",
                         fs::path(a.images[c.image_idx]).filename().string().c_str(),
                         a.sigmas[c.sigma_idx], a.methods[c.method_idx].c_str(),
                         static_cast<unsigned long long>(
                             derive_seed(a.seed_base, c.image_idx, c.sigma_idx)),
                         r.ipsnr, r.issim, r.q, r.outer_iters, r.stop.c_str(), r.seconds,
                         r.ok ? "ok" : ("failed: " + r.error).c_str(), rng_algorithm_name());
        }
        std::fclose(f);
    }

    if (!a.plots_dir.empty()) {
        fs::create_directories(a.plots_dir);
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const Cell& c = cells[k];
            if (!results[k].ok) continue;
            char stem[160];
            std::snprintf(stem, sizeof stem, "%s_s%03d_%s",
                          fs::path(a.images[c.image_idx]).stem().string().c_str(),
                          static_cast<int>(std::lround(a.sigmas[c.sigma_idx] * 1000)),
                          a.methods[c.method_idx].c_str());
            const std::string dat = (fs::path(a.plots_dir) / (std::string(stem) + ".dat")).string();
            std::FILE* f = std::fopen(dat.c_str(), "wb");
            if (!f) continue;
            std::fprintf(f, "# iter Q ipsnr issim\n");
            for (const auto& row : results[k].trace.rows)
                std::fprintf(f, "%d %.17g %.17g %.17g\n", row.iter, row.q, row.ipsnr, row.issim);
            std::fclose(f);

            const std::string gp = (fs::path(a.plots_dir) / (std::string(stem) + ".gp")).string();
            std::FILE* g = std::fopen(gp.c_str(), "wb");
            if (!g) continue;
            std::fprintf(g,
                         "set terminal pngcairo size 1200,400\n"
                         "set output '%s.png'\n"
                         "set multiplot layout 1,3\n"
                         "set xlabel 'outer iteration'\n"
                         "set title 'Q'\nplot '%s.dat' using 1:2 with lines notitle\n"
                         "set title 'IPSNR'\nplot '%s.dat' using 1:3 with lines notitle\n"
                         "set title 'ISSIM'\nplot '%s.dat' using 1:4 with lines notitle\n"
                         "unset multiplot\n",
                         stem, stem, stem, stem);
            std::fclose(g);
        }
    }

    const bool all_ok =
        std::all_of(results.begin(), results.end(), [](const CellResult& r) { return r.ok; });
    std::printf("benchmark complete: %s -> %s\n", all_ok ? "all cells ok" : "FAILURES present",
                a.out.c_str());
    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised bilevel estimation of weighted-TV parameter maps for denoising"};
    app.set_config("--config", "", "TOML-like key=value config file; flags take precedence");
    app.require_subcommand(1);

    AddNoiseArgs na;
    CLI::App* noise = app.add_subcommand("add-noise", "Corrupt an image with seeded noise");
    noise->add_option("input", na.input, "clean input image (pgm/png)")->required();
    noise->add_option("output", na.output, "output raw-field path (unclipped)")->required();
    noise->add_option("--kind", na.kind, "gaussian|uniform")
        ->check(CLI::IsMember({"gaussian", "uniform"}));
    noise->add_option("--sigma", na.sigma, "noise standard deviation")
        ->required()
        ->check(CLI::PositiveNumber);
    noise->add_option("--seed", na.seed, "rng seed")->required();
    noise->add_option("--preview", na.preview, "8-bit preview path (default <output>.png)");

    DenoiseArgs da;
    CLI::App* den = app.add_subcommand("denoise", "Bilevel denoising of one image");
    den->add_option("input", da.input, "noisy input (raw field or image)")->required();
    den->add_option("--loss", da.loss, "white|mse")->check(CLI::IsMember({"white", "mse"}));
    den->add_option("--reg", da.reg, "wtv (per-pixel map) | tv (single scalar)")
        ->check(CLI::IsMember({"wtv", "tv"}));
    den->add_option("--epsilon", da.epsilon, "huber smoothing (default 0.1 wtv, 0.01 tv)");
    den->add_option("--eta", da.eta, "outer step size (default 1000 white, 100 mse)");
    den->add_option("--beta0", da.beta0, "initial beta (default 1)");
    den->add_option("--lambda-cap", da.lambda_cap, "upper bound on lambda (default 5)");
    den->add_option("--tol", da.tol, "lower-solver tolerance (default 1e-6)");
    den->add_option("--outer-eps", da.outer_eps, "outer tolerance (default 1e-6)");
    den->add_option("--max-iters", da.max_iters, "outer iteration cap (default 3000)");
    den->add_option("--threshold-file", da.threshold_file, "Threshold JSON for early stopping");
    den->add_flag("--no-early-stop", da.no_early_stop, "disable the whiteness floor");
    den->add_option("--reference", da.reference, "clean reference (required for mse)");
    den->add_option("--out-image", da.out_image, "denoised image output");
    den->add_option("--out-lambda", da.out_lambda, "lambda-map raw-field output");
    den->add_option("--out-beta-preview", da.out_beta_preview,
                    "log-scale beta-map preview (clipped below at -10)");
    den->add_option("--out-trace", da.out_trace, "per-iteration trace CSV");
    den->add_option("--snapshot-dir", da.snapshot_dir, "directory for beta-map snapshots");
    den->add_option("--snapshot-stride", da.snapshot_stride, "snapshot every k iterations");
    den->add_flag("--sequential", da.sequential,
                  "bit-reproducible mode: no timing in outputs");

    CalibrateArgs ca;
    CLI::App* cal = app.add_subcommand("calibrate", "Estimate the stopping threshold Q-bar");
    cal->add_option("dataset-dir", ca.dataset_dir, "directory of clean images (+manifest.txt)")
        ->required();
    cal->add_option("--sigmas", ca.sigmas, "noise levels (default 0.01,0.05,0.1)")->delimiter(',');
    cal->add_option("--seed-base", ca.seed_base, "base seed for per-run derivation");
    cal->add_option("--seeds", ca.seeds, "explicit per-run seed list (image-major)")
        ->delimiter(',');
    cal->add_option("--budget", ca.budget, "outer iterations per run (default 3000)");
    cal->add_option("--crop", ca.crop, "center-crop size (default 180)");
    cal->add_option("--eta", ca.eta, "outer step size (default 1000)");
    cal->add_option("--out", ca.out, "threshold JSON output");
    cal->add_option("--jobs", ca.jobs, "worker pool width (default $WTV_JOBS or 1)");
    cal->add_flag("--sequential", ca.sequential, "single worker, no timing in outputs");

    BenchmarkArgs ba;
    CLI::App* ben = app.add_subcommand("benchmark", "Method-by-sigma grid on a set of images");
    ben->add_option("images", ba.images, "clean images")->required();
    ben->add_option("--sigmas", ba.sigmas, "noise levels (default 0.03,0.06,0.09)")
        ->delimiter(',');
    ben->add_option("--methods", ba.methods,
                    "subset of tv-mse,wtv-mse,tv-white,wtv-white")
        ->delimiter(',')
        ->check(CLI::IsMember({"tv-mse", "wtv-mse", "tv-white", "wtv-white"}));
    ben->add_option("--threshold-file", ba.threshold_file, "Threshold JSON (whiteness methods)");
    ben->add_option("--out", ba.out, "summary CSV (runs metadata in <out>.runs.csv)");
    ben->add_option("--plots-dir", ba.plots_dir, "emit trace .dat + gnuplot scripts here");
    ben->add_option("--seed-base", ba.seed_base, "base seed for per-(image,sigma) noise");
    ben->add_option("--crop", ba.crop, "center-crop size (default 180)");
    ben->add_option("--max-iters", ba.max_iters, "outer iteration cap per run");
    ben->add_option("--tol", ba.tol, "lower-solver tolerance");
    ben->add_option("--jobs", ba.jobs, "worker pool width (default $WTV_JOBS or 1)");
    ben->add_flag("--sequential", ba.sequential, "single worker, no timing in outputs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (noise->parsed()) return run_add_noise(na);
        if (den->parsed()) return run_denoise(da);
        if (cal->parsed()) return run_calibrate(ca);
        if (ben->parsed()) return run_benchmark(ba);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
