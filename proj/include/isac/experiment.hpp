#pragma once

#include "isac/benchmarks.hpp"
#include "isac/estimation.hpp"
#include "isac/solver_optimal.hpp"
#include "isac/solver_suboptimal.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace isac {

inline constexpr const char* kToolVersion = "0.1.0";

/// Configuration file is malformed; message carries field diagnostics.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ChannelConfig {
    UserGeometry geometry;
    std::uint64_t seed = 1;
};

struct MonteCarloConfig {
    int trials = 500;
    std::uint64_t seed = 7;
    Estimator estimator = Estimator::map;
};

struct SweepConfig {
    std::string variable = "rate_target";
    std::vector<double> grid;
};

struct BenchmarkConfig {
    double perturb_variance = 0.0316227766016838;  // 10^-1.5
    int draws = 6;          // perturbed designs averaged per quadrature node
    std::uint64_t seed = 99;
    int quad_panels = 32;   // averaging quadrature (8 nodes per panel)
};

struct OutputConfig {
    enum class Format { csv, json };
    std::string path;  // empty selects "<command>.csv"/".json"
    Format format = Format::csv;
};

struct ExperimentConfig {
    SystemConfig system;
    GaussianMixture prior;
    ChannelConfig channel;
    double snr_linear = 1.0;   // P |alpha|^2 L / sigma_s^2
    double alpha_phase = 0.0;
    double rate_target = 0.0;
    std::optional<SweepConfig> sweep;
    MonteCarloConfig montecarlo;
    BenchmarkConfig benchmark;
    OutputConfig output;

    void validate() const;
    TargetEnvironment environment() const;
};

/// Section VI defaults: Nt=10, Nr=12, Nu=8, L=25, P=30 dBm, -90 dBm noise,
/// half-wavelength spacing, the four-component angle prior, theta_U = 0.36,
/// rate target 6.5, receive SNR -5 dB.
ExperimentConfig default_scenario();

/// JSON text -> config. Power-like fields accept linear numbers or strings
/// with a dB/dBm suffix. Throws ConfigError with field diagnostics.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Serializes with full double precision; parse(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& cfg);

/// "30 dBm" -> watts, "-8 dB" -> linear ratio, plain number -> itself.
double parse_level(const std::string& text);

struct RunOverrides {
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed;     // replaces the relevant command seed
    std::optional<int> trials;
    std::optional<std::string> design;     // beampattern/montecarlo design choice
};

/// Executes one CLI command (feasibility, bounds, beampattern, solve-optimal,
/// solve-suboptimal, benchmark, montecarlo, sweep), writes one output table,
/// prints a one-line summary. Returns the path written. Throws ConfigError /
/// InfeasibleError / SolverError for exit codes 2 / 3 / 4.
std::string run_command(const std::string& command, const ExperimentConfig& cfg,
                        const RunOverrides& overrides, std::ostream& summary);

}  // namespace isac
