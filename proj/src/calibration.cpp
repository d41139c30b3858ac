#include "wtv/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace wtv {

namespace {

std::string format_run_key(const std::string& image_id, double sigma) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ":%g", sigma);
    return image_id + buf;
}

}  // namespace

CalibrationRecord calibrate_run(const Image& clean, const std::string& image_id, double sigma,
                                std::uint64_t seed, const CalibrationConfig& cfg) {
    Image ref = center_crop(clean, cfg.crop, cfg.crop);

    NoiseSpec spec;
    spec.kind = NoiseSpec::Kind::Gaussian;
    spec.sigma = sigma;
    spec.seed = seed;
    Image noisy = add_noise(ref, spec);

    BilevelConfig run = cfg.run;
    run.loss = LossKind::Whiteness;
    run.stop_threshold.reset();  // calibration never stops on Q
    run.max_outer_iters = cfg.budget;

    ParamMap beta0 = ParamMap::constant(run.mode, 1.0, ref.size());
    BilevelResult res = gd_bil(noisy, beta0, run, &ref);
    if (res.status == BilevelResult::Status::NonFinite ||
        res.status == BilevelResult::Status::HypergradFailed || res.trace.rows.empty())
        throw std::runtime_error("calibration run failed on " + image_id);

    const auto& rows = res.trace.rows;
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].ipsnr > rows[best].ipsnr) best = i;

    CalibrationRecord rec;
    rec.image_id = image_id;
    rec.sigma = sigma;
    rec.seed = seed;
    rec.argmax_iter = rows[best].iter;
    rec.peak_ipsnr = rows[best].ipsnr;
    rec.q_at_peak = rows[best].q;
    rec.total_iters = static_cast<int>(rows.size());
    return rec;
}

Threshold aggregate_records(std::vector<CalibrationRecord> records,
                            std::vector<std::string> failed_runs, const std::string& dataset,
                            const std::vector<double>& sigmas,
                            const std::vector<std::uint64_t>& seeds,
                            const std::string& config_hash) {
    const std::size_t total = records.size() + failed_runs.size();
    if (records.empty()) throw std::runtime_error("calibration: no successful runs");
    if (failed_runs.size() * 10 > total)
        throw std::runtime_error("calibration: more than 10% of runs failed; threshold refused");

    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.image_id != b.image_id ? a.image_id < b.image_id : a.sigma < b.sigma;
    });
    std::sort(failed_runs.begin(), failed_runs.end());

    double sum = 0.0;
    for (const auto& r : records) sum += r.q_at_peak;

    Threshold th;
    th.q_bar = sum / static_cast<double>(records.size());
    th.dataset = dataset;
    th.sigmas = sigmas;
    th.seeds = seeds;
    th.records = std::move(records);
    th.failed_runs = std::move(failed_runs);
    th.config_hash = config_hash;
    return th;
}

Threshold calibrate_threshold(const std::vector<Image>& dataset,
                              const std::vector<std::string>& image_ids,
                              const std::vector<double>& sigmas, const CalibrationConfig& cfg,
                              const std::string& dataset_name, int jobs) {
    if (dataset.empty()) throw std::invalid_argument("calibrate_threshold: empty dataset");
    if (dataset.size() != image_ids.size())
        throw std::invalid_argument("calibrate_threshold: ids/images size mismatch");
    if (sigmas.empty()) throw std::invalid_argument("calibrate_threshold: no sigmas");

    const std::size_t n_runs = dataset.size() * sigmas.size();
    if (!cfg.explicit_seeds.empty() && cfg.explicit_seeds.size() != n_runs)
        throw std::invalid_argument("calibrate_threshold: explicit seed list size mismatch");

    struct RunSpec {
        std::size_t image_idx;
        std::size_t sigma_idx;
        std::uint64_t seed;
    };
    std::vector<RunSpec> runs;
    std::vector<std::uint64_t> seeds;
    runs.reserve(n_runs);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t s = 0; s < sigmas.size(); ++s) {
            const std::size_t k = i * sigmas.size() + s;
            const std::uint64_t seed = cfg.explicit_seeds.empty()
                                           ? derive_seed(cfg.seed_base, i, s)
                                           : cfg.explicit_seeds[k];
            runs.push_back({i, s, seed});
            seeds.push_back(seed);
        }
    }

    std::vector<CalibrationRecord> records;
    std::vector<std::string> failures;
    std::mutex collect_mutex;
    std::size_t next_run = 0;

    auto worker = [&]() {
        while (true) {
            std::size_t k;
            {
                std::lock_guard<std::mutex> lock(collect_mutex);
                if (next_run >= runs.size()) return;
                k = next_run++;
            }
            const RunSpec& r = runs[k];
            try {
                CalibrationRecord rec = calibrate_run(dataset[r.image_idx],
                                                      image_ids[r.image_idx],
                                                      sigmas[r.sigma_idx], r.seed, cfg);
                std::lock_guard<std::mutex> lock(collect_mutex);
                records.push_back(std::move(rec));
            } catch (const std::exception&) {
                std::lock_guard<std::mutex> lock(collect_mutex);
                failures.push_back(
                    format_run_key(image_ids[r.image_idx], sigmas[r.sigma_idx]));
            }
        }
    };

    const int width = std::max(1, jobs);
    if (width == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < width; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    return aggregate_records(std::move(records), std::move(failures), dataset_name, sigmas,
                             seeds, calibration_config_hash(cfg));
}

std::string calibration_config_hash(const CalibrationConfig& cfg) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "budget=%d;crop=%d;eta=%.17g;eps=%.17g;tol=%.17g;cap=%.17g;"
                                   "smooth=%.17g;mode=%d;warm=%d;base=%llu",
                  cfg.budget, cfg.crop, cfg.run.eta, cfg.run.eps_outer, cfg.run.tol_lower,
                  cfg.run.lambda_cap, cfg.run.epsilon_smoothing, static_cast<int>(cfg.run.mode),
                  cfg.run.warm_start ? 1 : 0,
                  static_cast<unsigned long long>(cfg.seed_base));
    // FNV-1a 64
    std::uint64_t h = 1469598103934665603ULL;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 1099511628211ULL;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void Threshold::save_json(const std::string& path) const {
    nlohmann::json j;
    j["q_bar"] = q_bar;
    j["dataset"] = dataset;
    j["sigmas"] = sigmas;
    j["seeds"] = seeds;
    j["config_hash"] = config_hash;
    j["failed_runs"] = failed_runs;
    j["rng"] = rng_algorithm_name();
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        recs.push_back({{"image_id", r.image_id},
                        {"sigma", r.sigma},
                        {"seed", r.seed},
                        {"argmax_iter", r.argmax_iter},
                        {"peak_ipsnr", r.peak_ipsnr},
                        {"q_at_peak", r.q_at_peak},
                        {"total_iters", r.total_iters}});
    }
    j["records"] = recs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write threshold file: " + path);
    out << j.dump(2) << "\n";
}

Threshold Threshold::load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open threshold file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad threshold file: " + std::string(e.what()));
    }
    Threshold th;
    th.q_bar = j.at("q_bar").get<double>();
    th.dataset = j.value("dataset", "");
    th.sigmas = j.value("sigmas", std::vector<double>{});
    th.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    th.config_hash = j.value("config_hash", "");
    th.failed_runs = j.value("failed_runs", std::vector<std::string>{});
    if (j.contains("records")) {
        for (const auto& r : j["records"]) {
            CalibrationRecord rec;
            rec.image_id = r.value("image_id", "");
            rec.sigma = r.value("sigma", 0.0);
            rec.seed = r.value("seed", 0ULL);
            rec.argmax_iter = r.value("argmax_iter", 0);
            rec.peak_ipsnr = r.value("peak_ipsnr", 0.0);
            rec.q_at_peak = r.value("q_at_peak", 0.0);
            rec.total_iters = r.value("total_iters", 0);
            th.records.push_back(std::move(rec));
        }
    }
    return th;
}

}  // namespace wtv
