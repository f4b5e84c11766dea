#pragma once
//
// The `cirdiff` command line: bootstrap -> calibrate -> simulate -> price.
//
// Configuration is a JSON file; relative paths inside it are resolved against
// the file's directory. Command-line flags override the file.
//
//   {
//     "valuation_date": "2019-12-30",
//     "quotes": "quotes.csv",            // or "curve": "curve.csv" (exactly one)
//     "output_dir": "out",
//     "model": {...},                    // optional; skips calibration downstream
//     "calibration": {"guess": [8 numbers], "multistart": 0, "seed": 0,
//                     "method": "projected-lm" | "penalty", "max_iterations": 500,
//                     "gradient_tol": 1e-10, "step_tol": 1e-12, "maturities": [...]},
//     "simulation": {"horizon": 30, "delta": 0.00390625, "paths": 10000, "seed": 0,
//                    "record_stride": 16, "trajectory_paths": 5,
//                    "distribution_time": 30, "bins": 50, "df_level": 0.999},
//     "pricing": {"forward_times": [1, 3, 5], "swaptions": "swaptions.csv", "level": 0.99}
//   }
//
// Exit codes: 0 success, 1 numeric failure, 2 input or configuration error.
//

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cirdiff/calibration.hpp"
#include "cirdiff/core_model.hpp"
#include "cirdiff/simulation.hpp"

namespace cirdiff::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitInput = 2;

struct RunConfig {
    std::string valuation_date;
    std::optional<std::filesystem::path> quotes;
    std::optional<std::filesystem::path> curve;
    std::filesystem::path output_dir = "out";
    std::optional<DiffModel> model;

    PhiVector guess = kDefaultGuess;
    CalibrationOptions calibration;
    std::vector<double> calibration_maturities;  // empty = curve pillars

    SimConfig simulation{30.0, 1.0 / 256.0, 10000, 0, 16, {}};
    std::size_t trajectory_paths = 5;
    std::optional<double> distribution_time;  // default: horizon
    std::size_t bins = 50;
    double df_level = 0.999;

    std::vector<double> forward_times{1.0, 3.0, 5.0};
    std::optional<std::filesystem::path> swaptions;
    double pricing_level = 0.99;
};

/// Parses a config file; throws Error (parse/validation/io).
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Checks exactly one of quotes/curve and that referenced files exist.
void validate(const RunConfig& c);

/// Parses "a,b,c,..." with exactly 8 numbers.
PhiVector parse_guess(const std::string& text);

/// Runs the command line. Never throws; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cirdiff::app
