#pragma once

#include <optional>
#include <string>

#include "radialns/diagnostics.hpp"
#include "radialns/families.hpp"
#include "radialns/residual.hpp"

namespace rns {

// =============================================================================
// Run configuration (one JSON document per run) and JSON reports.
// Unknown keys are rejected everywhere; every number is validated before any
// computation starts.
// =============================================================================

struct IntegrateConfig {
    double t_end = 10.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

struct GridConfig {
    bool auto_grid = true;  // build via make_verification_grid
    int n_t = 16, n_r = 16;
    double fd_step_t = 1e-4, fd_step_r = 1e-4;
    double t_cap = 1.0;  // auto mode: horizon passed to the grid builder
    // Explicit bounds, required when auto_grid is false.
    double t_min = 0.0, t_max = 0.0, r_min = 0.0, r_max = 0.0;
};

enum class NegativeControl { None, DensityExponent, ProfileExponential };

struct VerifyConfig {
    double max_mass_residual = 1e-6;
    double max_momentum_residual = 1e-6;
    NegativeControl control = NegativeControl::None;
    SolidCoreSource solid_core_source = SolidCoreSource::DensityWeighted;
    std::optional<std::string> fields_file;   // re-verify a written fields table
    std::optional<std::string> per_node_csv;  // dump per-node residuals
};

struct MassConfig {
    double t = 0.0;
    double quad_tol = 1e-8;
    std::optional<double> r_max;
    SurfaceMode mode = SurfaceMode::Standard;
};

struct BlowupConfig {
    double time_cap = 50.0;
    double tol = 1e-8;
    std::optional<double> exponent;  // default: dim_n - 0.5
    int n_samples = 28;
    std::optional<std::string> products_csv;
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
    OutputFormat format = OutputFormat::Csv;
    std::string data_path;    // trajectory/fields table ("" = command default)
    std::string report_path;  // JSON report ("" = command default)
};

struct RunConfig {
    FamilyParams family;
    IntegrateConfig integrate;
    GridConfig grid;
    VerifyConfig verify;
    MassConfig mass;
    BlowupConfig blowup;
    OutputConfig output;
};

/// Parses and validates a configuration document.  Throws DomainError on
/// malformed JSON, unknown keys, wrong types, or family-invariant violations.
RunConfig parse_config(const std::string& json_text);
RunConfig parse_config_file(const std::string& path);

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

// ---- JSON reports -----------------------------------------------------------

std::string solve_report_json(const Trajectory& trajectory,
                              const BlowupReport& blowup);
std::string verify_report_json(const ResidualReport& report,
                               double max_mass_residual,
                               double max_momentum_residual, bool pass);
std::string mass_report_json(const MassResult& result, int dim_n,
                             SurfaceMode mode);
std::string blowup_rate_report_json(const BlowupRateEstimate& estimate);

const char* to_string(BlowupStatus status);
const char* to_string(TrajectoryStatus status);
const char* to_string(RateVerdict verdict);
const char* to_string(MassResult::Kind kind);

}  // namespace rns
