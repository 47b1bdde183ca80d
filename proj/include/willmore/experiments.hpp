#pragma once

#include "willmore/bounds.hpp"
#include "willmore/flow.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace willmore {

/// Bad config file, grid or command input (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Real number, optionally written as a multiple of pi: "3.5", "40pi", "pi".
double parse_real(const std::string& text);

struct ExperimentConfig {
    FlowConfig flow;
    std::optional<double> target_iso;  // flow command: pin this iso (area kept)
    int seeds = 3;                     // flows per R in a sweep
    double perturbation = 0.005;       // seed noise amplitude, fraction of bbox diagonal
    int sphere_subdivisions = 4;       // schygulla seeds
    int torus_resolution = 48;         // ig_probe warm starts (n x n grid)
    int genus = 1;
    std::string curve_path;            // ig_probe: Schygulla curve CSV
    std::string beta_path;             // optional beta table CSV
    bool anchor_round_sphere = true;   // add (36 pi, 4 pi) to the curve
    int threads = 0;                   // sweep workers, 0 = OpenMP default

    /// Every effective setting as "key = value" lines in a fixed order.
    std::string canonical() const;
    /// FNV-1a of canonical(), 16 hex digits.
    std::string hash() const;
};

/// Flat "key = value" lines, '#' comments. Unknown keys, malformed values
/// and out-of-range settings throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

/// R values separated by commas, whitespace or newlines; '#' comments; an
/// optional leading "R" header. Must be strictly increasing and >= 36 pi (1 - 0.02).
std::vector<double> parse_grid(const std::string& text);

std::string read_text_file(const std::string& path);

/// Prolate start for the Schygulla sweep: icosphere stretched along z to
/// iso R (no stretch if the sphere is already above R), then perturbed.
/// Targets are exactly iso R at the stretched mesh's area.
struct SweepStart {
    Mesh mesh;
    ConstraintTargets targets;
};

SweepStart schygulla_start(double r, int subdivisions, double perturbation, std::uint64_t seed);

/// Clifford torus inverted in the unit sphere centred at distance d outside
/// its outer equator point. The parameter grid is pre-warped so the image
/// triangles stay roughly uniform. d = +inf returns the torus itself.
Mesh inverted_clifford(double distance, int resolution);

/// Distance whose inverted torus has iso nearest R (bisection on log d);
/// +inf when R is at or above the Clifford value.
double inversion_distance_for_iso(double r, int resolution);

enum class SweepMode { schygulla, ig_probe };

std::string to_string(SweepMode mode);
SweepMode sweep_mode_from_string(const std::string& text);

struct SweepRow {
    double r_target = 0;
    double r_achieved = 0;
    double w_min = 0;
    double threshold = 0;
    bool admissible = false;
    std::uint64_t seed = 0;  // seed of the minimising run
    int iterations = 0;      // approach + flow iterations of that run
    FlowStatus status = FlowStatus::max_iters;
};

struct SweepResult {
    SweepMode mode = SweepMode::schygulla;
    std::vector<SweepRow> rows;
    std::string config_hash;
    std::string timestamp;
    std::vector<std::string> log;  // excluded rows, curve adjustments

    static std::string csv_header();
    /// Header and rows, no metadata. Deterministic for a fixed config.
    std::string csv_body() const;
    /// "# mode=... config_hash=... timestamp=..." line, then csv_body().
    std::string to_csv() const;
};

struct SweepOutput {
    SweepResult result;
    std::optional<SchygullaCurve> curve;  // schygulla mode
};

/// schygulla: per R, min final W over `seeds` flows from perturbed prolate
/// starts at iso R; threshold 8 pi. ig_probe: per R, flows from the inverted
/// Clifford torus (seed index 0 unperturbed, the rest perturbed) at iso R,
/// compared with ig_threshold. Runs with status self_intersection or
/// approach_failed do not enter the minimum. Jobs run concurrently; rows come
/// back in grid order.
SweepOutput run_sweep(SweepMode mode, const std::vector<double>& grid, const ExperimentConfig& config,
                      const std::optional<SchygullaCurve>& curve = std::nullopt,
                      const BetaTable& betas = BetaTable());

std::string utc_timestamp();

}  // namespace willmore
