#include "radialns/json_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rns {

using nlohmann::json;

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw DomainError("config: " + what); }

void expect_object(const json& j, const char* ctx) {
    if (!j.is_object()) bad(std::string(ctx) + " must be a JSON object");
}

void check_keys(const json& j, const char* ctx,
                const std::set<std::string>& allowed) {
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            bad("unknown key \"" + item.key() + "\" in " + ctx);
        }
    }
}

double get_number(const json& j, const char* ctx, const char* key, double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) bad(std::string(ctx) + "." + key + " must be a number");
    return v.get<double>();
}

double require_number(const json& j, const char* ctx, const char* key) {
    if (!j.contains(key)) bad(std::string(ctx) + "." + key + " is required");
    return get_number(j, ctx, key, 0.0);
}

int get_int(const json& j, const char* ctx, const char* key, int def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number_integer()) {
        bad(std::string(ctx) + "." + key + " must be an integer");
    }
    return v.get<int>();
}

bool get_bool(const json& j, const char* ctx, const char* key, bool def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) bad(std::string(ctx) + "." + key + " must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* ctx, const char* key,
                       const std::string& def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) bad(std::string(ctx) + "." + key + " must be a string");
    return v.get<std::string>();
}

FamilyParams parse_family(const json& j) {
    expect_object(j, "family");
    const std::string variant = get_string(j, "family", "variant", "");
    if (variant.empty()) bad("family.variant is required");

    FamilyParams p;
    std::set<std::string> allowed = {"variant", "dim_n", "lambda", "alpha",
                                     "a0", "a1"};
    if (variant == "isothermal") {
        p.variant = FamilyVariant::IsothermalNS;
        allowed.insert({"k", "nu"});
    } else if (variant == "damped") {
        p.variant = FamilyVariant::IsothermalDamped;
        allowed.insert({"k", "nu", "beta"});
    } else if (variant == "solid_core") {
        p.variant = FamilyVariant::SolidCore2D;
        p.dim_n = 2;
        allowed.insert({"k", "nu", "beta", "m0", "r0"});
    } else if (variant == "pressureless_theta1") {
        p.variant = FamilyVariant::PressurelessTheta1;
        p.theta = 1.0;
        allowed.insert({"kappa"});
    } else if (variant == "pressureless") {
        p.variant = FamilyVariant::PressurelessThetaNe1;
        allowed.insert({"kappa", "theta", "beta"});
    } else {
        bad("family.variant \"" + variant +
            "\" is not one of isothermal, damped, solid_core, "
            "pressureless_theta1, pressureless");
    }
    check_keys(j, "family", allowed);

    p.dim_n = get_int(j, "family", "dim_n", p.dim_n);
    p.lambda = require_number(j, "family", "lambda");
    p.alpha = get_number(j, "family", "alpha", 0.0);
    p.a0 = get_number(j, "family", "a0", 1.0);
    p.a1 = get_number(j, "family", "a1", 0.0);
    p.pressure_k = get_number(j, "family", "k", 1.0);
    p.nu = get_number(j, "family", "nu", 0.0);
    p.beta = get_number(j, "family", "beta", 0.0);
    p.kappa = get_number(j, "family", "kappa", 1.0);
    if (p.variant == FamilyVariant::PressurelessThetaNe1) {
        p.theta = require_number(j, "family", "theta");
    }
    if (p.variant == FamilyVariant::SolidCore2D) {
        p.core_mass = require_number(j, "family", "m0");
        p.core_radius = require_number(j, "family", "r0");
    }
    validate(p);
    return p;
}

IntegrateConfig parse_integrate(const json& j) {
    expect_object(j, "integrate");
    check_keys(j, "integrate", {"t_end", "rel_tol", "abs_tol"});
    IntegrateConfig c;
    c.t_end = get_number(j, "integrate", "t_end", c.t_end);
    c.rel_tol = get_number(j, "integrate", "rel_tol", c.rel_tol);
    c.abs_tol = get_number(j, "integrate", "abs_tol", c.abs_tol);
    return c;
}

GridConfig parse_grid(const json& j) {
    expect_object(j, "grid");
    check_keys(j, "grid",
               {"auto", "n_t", "n_r", "fd_step", "fd_step_t", "fd_step_r",
                "t_cap", "t_min", "t_max", "r_min", "r_max"});
    GridConfig c;
    c.auto_grid = get_bool(j, "grid", "auto", true);
    c.n_t = get_int(j, "grid", "n_t", c.n_t);
    c.n_r = get_int(j, "grid", "n_r", c.n_r);
    const double fd = get_number(j, "grid", "fd_step", 1e-4);
    c.fd_step_t = get_number(j, "grid", "fd_step_t", fd);
    c.fd_step_r = get_number(j, "grid", "fd_step_r", fd);
    c.t_cap = get_number(j, "grid", "t_cap", c.t_cap);
    if (!c.auto_grid) {
        c.t_min = require_number(j, "grid", "t_min");
        c.t_max = require_number(j, "grid", "t_max");
        c.r_min = require_number(j, "grid", "r_min");
        c.r_max = require_number(j, "grid", "r_max");
    }
    return c;
}

VerifyConfig parse_verify(const json& j) {
    expect_object(j, "verify");
    check_keys(j, "verify",
               {"max_mass_residual", "max_momentum_residual", "negative_control",
                "solid_core_source", "fields_file", "per_node_csv"});
    VerifyConfig c;
    c.max_mass_residual =
        get_number(j, "verify", "max_mass_residual", c.max_mass_residual);
    c.max_momentum_residual =
        get_number(j, "verify", "max_momentum_residual", c.max_momentum_residual);
    const std::string control = get_string(j, "verify", "negative_control", "none");
    if (control == "none") c.control = NegativeControl::None;
    else if (control == "density_exponent") c.control = NegativeControl::DensityExponent;
    else if (control == "profile_exponential") c.control = NegativeControl::ProfileExponential;
    else bad("verify.negative_control must be none, density_exponent, or profile_exponential");
    const std::string source =
        get_string(j, "verify", "solid_core_source", "density_weighted");
    if (source == "density_weighted") c.solid_core_source = SolidCoreSource::DensityWeighted;
    else if (source == "as_printed") c.solid_core_source = SolidCoreSource::AsPrinted;
    else bad("verify.solid_core_source must be density_weighted or as_printed");
    if (j.contains("fields_file")) c.fields_file = get_string(j, "verify", "fields_file", "");
    if (j.contains("per_node_csv")) c.per_node_csv = get_string(j, "verify", "per_node_csv", "");
    return c;
}

MassConfig parse_mass(const json& j) {
    expect_object(j, "mass");
    check_keys(j, "mass", {"t", "quad_tol", "r_max", "coefficient_mode"});
    MassConfig c;
    c.t = get_number(j, "mass", "t", c.t);
    c.quad_tol = get_number(j, "mass", "quad_tol", c.quad_tol);
    if (j.contains("r_max")) c.r_max = require_number(j, "mass", "r_max");
    const std::string mode = get_string(j, "mass", "coefficient_mode", "standard");
    if (mode == "standard") c.mode = SurfaceMode::Standard;
    else if (mode == "alternate") c.mode = SurfaceMode::Alternate;
    else bad("mass.coefficient_mode must be standard or alternate");
    return c;
}

BlowupConfig parse_blowup(const json& j) {
    expect_object(j, "blowup");
    check_keys(j, "blowup", {"time_cap", "tol", "exponent", "n_samples", "products_csv"});
    BlowupConfig c;
    c.time_cap = get_number(j, "blowup", "time_cap", c.time_cap);
    c.tol = get_number(j, "blowup", "tol", c.tol);
    if (j.contains("exponent")) c.exponent = require_number(j, "blowup", "exponent");
    c.n_samples = get_int(j, "blowup", "n_samples", c.n_samples);
    if (j.contains("products_csv")) c.products_csv = get_string(j, "blowup", "products_csv", "");
    return c;
}

OutputConfig parse_output(const json& j) {
    expect_object(j, "output");
    check_keys(j, "output", {"format", "data_path", "report_path"});
    OutputConfig c;
    const std::string format = get_string(j, "output", "format", "csv");
    if (format == "csv") c.format = OutputFormat::Csv;
    else if (format == "json") c.format = OutputFormat::Json;
    else bad("output.format must be csv or json");
    c.data_path = get_string(j, "output", "data_path", "");
    c.report_path = get_string(j, "output", "report_path", "");
    return c;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    expect_object(j, "top level");
    check_keys(j, "top level",
               {"family", "integrate", "grid", "verify", "mass", "blowup", "output"});
    if (!j.contains("family")) bad("a \"family\" block is required");

    RunConfig c;
    c.family = parse_family(j.at("family"));
    if (j.contains("integrate")) c.integrate = parse_integrate(j.at("integrate"));
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    if (j.contains("verify")) c.verify = parse_verify(j.at("verify"));
    if (j.contains("mass")) c.mass = parse_mass(j.at("mass"));
    if (j.contains("blowup")) c.blowup = parse_blowup(j.at("blowup"));
    if (j.contains("output")) c.output = parse_output(j.at("output"));

    if (!(c.integrate.t_end > 0.0)) bad("integrate.t_end must be positive");
    if (c.grid.n_t < 2 || c.grid.n_r < 2) bad("grid.n_t and grid.n_r must be >= 2");
    if (!(c.grid.fd_step_t > 0.0) || !(c.grid.fd_step_r > 0.0)) {
        bad("grid fd steps must be positive");
    }
    if (c.blowup.n_samples < 4) bad("blowup.n_samples must be >= 4");
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("config: cannot open \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// =============================================================================
// Reports
// =============================================================================

const char* to_string(BlowupStatus status) {
    switch (status) {
        case BlowupStatus::FiniteTimeVanish: return "finite_time_vanish";
        case BlowupStatus::GlobalExistenceWitnessed: return "global_existence_witnessed";
        case BlowupStatus::Undetermined: return "undetermined";
    }
    return "?";
}

const char* to_string(TrajectoryStatus status) {
    switch (status) {
        case TrajectoryStatus::ReachedTEnd: return "reached_t_end";
        case TrajectoryStatus::VanishDetected: return "vanish_detected";
        case TrajectoryStatus::StepFailure: return "step_failure";
    }
    return "?";
}

const char* to_string(RateVerdict verdict) {
    switch (verdict) {
        case RateVerdict::BoundedBelow: return "bounded_below";
        case RateVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(MassResult::Kind kind) {
    switch (kind) {
        case MassResult::Kind::Finite: return "finite";
        case MassResult::Kind::Divergent: return "divergent";
        case MassResult::Kind::Truncated: return "truncated";
    }
    return "?";
}

std::string solve_report_json(const Trajectory& trajectory,
                              const BlowupReport& blowup) {
    json j;
    j["trajectory"]["status"] = to_string(trajectory.status());
    j["trajectory"]["t_reach"] = trajectory.t_reach();
    j["trajectory"]["samples"] = trajectory.samples().size();
    if (trajectory.vanished()) {
        j["trajectory"]["vanish"] = {
            {"t_lower", trajectory.vanish_t_lower()},
            {"t_upper", trajectory.vanish_t_upper()},
            {"level", trajectory.vanish_level()},
        };
    }
    j["blowup"]["status"] = to_string(blowup.status);
    if (blowup.status == BlowupStatus::FiniteTimeVanish) {
        j["blowup"]["t_lower"] = blowup.t_lower;
        j["blowup"]["t_upper"] = blowup.t_upper;
    }
    if (blowup.bound_e_theta_lambda) {
        j["blowup"]["bound_e_theta_lambda"] = *blowup.bound_e_theta_lambda;
    }
    if (!blowup.diagnostic.empty()) j["blowup"]["diagnostic"] = blowup.diagnostic;
    return j.dump(2) + "\n";
}

std::string verify_report_json(const ResidualReport& report,
                               double max_mass_residual,
                               double max_momentum_residual, bool pass) {
    json j;
    j["grid"] = {
        {"t_min", report.grid.t_min},   {"t_max", report.grid.t_max},
        {"r_min", report.grid.r_min},   {"r_max", report.grid.r_max},
        {"n_t", report.grid.n_t},       {"n_r", report.grid.n_r},
        {"fd_step_t", report.grid.fd_step_t},
        {"fd_step_r", report.grid.fd_step_r},
    };
    j["max_abs_mass"] = report.max_abs_mass;
    j["mean_abs_mass"] = report.mean_abs_mass;
    j["max_abs_momentum"] = report.max_abs_momentum;
    j["mean_abs_momentum"] = report.mean_abs_momentum;
    j["worst_point"] = {{"t", report.worst_t}, {"r", report.worst_r}};
    j["thresholds"] = {{"max_mass_residual", max_mass_residual},
                       {"max_momentum_residual", max_momentum_residual}};
    j["pass"] = pass;
    return j.dump(2) + "\n";
}

std::string mass_report_json(const MassResult& result, int dim_n,
                             SurfaceMode mode) {
    json j;
    j["kind"] = to_string(result.kind);
    if (result.kind != MassResult::Kind::Divergent) {
        j["value"] = result.value;
        j["quad_error"] = result.quad_error;
    }
    if (result.kind == MassResult::Kind::Truncated) j["r_max"] = result.r_max;
    j["coefficient_mode"] = mode == SurfaceMode::Standard ? "standard" : "alternate";
    // Both coefficient conventions, so the N >= 4 disagreement stays visible.
    j["surface_coefficient"] = {
        {"dim_n", dim_n},
        {"standard", surface_coefficient(dim_n, SurfaceMode::Standard)},
        {"alternate", surface_coefficient(dim_n, SurfaceMode::Alternate)},
    };
    return j.dump(2) + "\n";
}

std::string blowup_rate_report_json(const BlowupRateEstimate& estimate) {
    json j;
    j["t_star"] = estimate.t_star;
    j["exponent"] = estimate.exponent;
    j["verdict"] = to_string(estimate.verdict);
    j["verdict_at_t_lower"] = to_string(estimate.verdict_at_t_lower);
    j["verdict_at_t_upper"] = to_string(estimate.verdict_at_t_upper);
    json products = json::array();
    for (const auto& s : estimate.products) {
        products.push_back({{"t", s.t}, {"product", s.product}});
    }
    j["products"] = products;
    return j.dump(2) + "\n";
}

}  // namespace rns
