#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slts/inverse.hpp"

namespace slts {

/// Spectral-parameter grid as written in a problem file.
struct GridSpec {
    /// "list": explicit points; "linear": n points from `from` to `to`;
    /// "negative_log": -lambda log-spaced on [lambda_min, lambda_max];
    /// "ray": lambda = (r e^{i angle})^2, r log-spaced on [r_min, r_max].
    std::string kind = "list";
    std::vector<Complex> points;
    Complex from = 0.0;
    Complex to = 0.0;
    double lambda_min = 1.0;
    double lambda_max = 100.0;
    double angle = 0.1;
    double r_min = 1.0;
    double r_max = 10.0;
    std::size_t n = 0;

    std::vector<Complex> resolve() const;
};

struct Problem {
    static constexpr int kSchemaVersion = 1;

    std::vector<Segment> timescale;
    /// "zero", "coefficients" (Chebyshev, per segment) or "samples".
    std::string potential_kind = "zero";
    std::vector<std::vector<Complex>> coefficients;
    GridFunction samples;  // original coordinates
    std::size_t sample_degree = 8;

    unsigned threads = 0;  // 0: machine parallelism
    std::uint64_t seed = 1;

    double rtol = 1e-14;
    std::size_t max_steps = 1'000'000;
    double pole_threshold = 1e-12;

    struct Forward {
        GridSpec grid;
        /// "both", "0", "1" or "weyl".
        std::string output = "both";
    } forward;

    struct Spectrum {
        /// 0, 1, or -1 for both.
        int j = -1;
        std::size_t count = 10;
        std::optional<double> lambda_max;
        double scan_fraction = 1.0 / 16.0;
        double root_tol = 1e-14;
        double double_root_tol = 1e-9;
    } spectrum;

    struct Inverse {
        /// "weyl" or "two-spectra".
        std::string mode = "weyl";
        std::string weyl_data;    // CSV path, relative to the problem file
        std::string spectra;      // CSV path holding both spectra
        std::optional<double> noise;
        std::size_t degree = 2;
        std::size_t max_iterations = 100;
        double step_tol = 1e-10;
        double reduction_tol = 1e-14;
        double weight_eps = 1e-8;
        double fd_step = 1e-6;
        double rank_tol = 1e-10;
        double trust_factor = 1.0;
        double coeff_bound = 1e4;
        double misfit_tol = 1e-6;
        double trailing_condition_min = 1e3;
        std::size_t sweeps = 6;
        double sweep_tol = 1e-8;
        bool polish = true;
        // two-spectra mode
        std::size_t K = 0;
        double two_spectra_misfit_tol = 5e-3;
        double ray_angle = 0.1;
        std::optional<GridSpec> grid;  // empty: mode default
        double q_bound = 1.0;
        double max_spread = 0.05;
        bool shift_tail = true;
        double consistency_tol = 0.25;
        std::size_t samples_per_segment = 101;
    } inverse;

    struct Verify {
        std::vector<int> criteria;  // empty: all
    } verify;

    /// Directory that relative data paths are resolved against.
    std::filesystem::path base_dir;

    /// Parses YAML text; throws Errc::kInvalidInput with line and column on
    /// schema violations, including unknown keys.
    static Problem parse(const std::string& text, std::filesystem::path base_dir = {});
    static Problem load(const std::filesystem::path& path);

    /// Fully resolved configuration as YAML, every default spelled out.
    std::string to_yaml() const;

    TimeScale make_timescale() const;
    Potential make_potential(const TimeScale& ts) const;
    ForwardOptions forward_options() const;
    SpectrumOptions spectrum_options() const;
    InverseOptions inverse_options() const;
    TwoSpectraOptions two_spectra_options() const;
    std::filesystem::path resolve(const std::string& relative) const;
};

}  // namespace slts
