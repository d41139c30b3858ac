#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wtv/bilevel.hpp"
#include "wtv/image.hpp"

namespace wtv {

struct CalibrationRecord {
    std::string image_id;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int argmax_iter = 0;      // iteration of peak IPSNR
    double peak_ipsnr = 0.0;
    double q_at_peak = 0.0;   // whiteness loss at that iteration
    int total_iters = 0;
};

struct Threshold {
    double q_bar = 0.0;       // arithmetic mean of the records' q_at_peak
    std::string dataset;
    std::vector<double> sigmas;
    std::vector<std::uint64_t> seeds;       // one per (image, sigma) run, run order
    std::vector<CalibrationRecord> records;
    std::vector<std::string> failed_runs;   // "<image_id>:<sigma>" of excluded runs
    std::string config_hash;

    void save_json(const std::string& path) const;
    static Threshold load_json(const std::string& path);
};

struct CalibrationConfig {
    int budget = 3000;             // outer iterations per run
    int crop = 180;                // center-crop larger images to crop x crop
    BilevelConfig run;             // whiteness loss, no stop threshold (enforced)
    std::uint64_t seed_base = 1234;
    std::vector<std::uint64_t> explicit_seeds;  // overrides derivation when
                                                // sized images*sigmas
};

// One calibration unit: run the unsupervised procedure on (clean, sigma,
// seed) for a fixed budget, locate the peak-IPSNR iteration, report the
// whiteness value there.
CalibrationRecord calibrate_run(const Image& clean, const std::string& image_id, double sigma,
                                std::uint64_t seed, const CalibrationConfig& cfg);

// Deterministic mean over records sorted by (image_id, sigma); refuses to
// produce a threshold when more than 10% of the runs failed.
Threshold aggregate_records(std::vector<CalibrationRecord> records,
                            std::vector<std::string> failed_runs, const std::string& dataset,
                            const std::vector<double>& sigmas,
                            const std::vector<std::uint64_t>& seeds,
                            const std::string& config_hash);

// Full offline protocol over a clean-image set; embarrassingly parallel
// across runs (jobs > 1), aggregation always sequential and sorted.
Threshold calibrate_threshold(const std::vector<Image>& dataset,
                              const std::vector<std::string>& image_ids,
                              const std::vector<double>& sigmas, const CalibrationConfig& cfg,
                              const std::string& dataset_name, int jobs = 1);

std::string calibration_config_hash(const CalibrationConfig& cfg);

}  // namespace wtv
