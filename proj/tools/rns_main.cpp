// rns: construct the closed-form radial flow families, integrate their
// scale-factor ODEs, and verify them numerically.
//
// Subcommands (each takes one JSON config file):
//   solve   integrate the scale-factor ODE, write (t, a, adot) + blowup report
//   fields  sample (rho, u) on a grid
//   verify  finite-difference residual sweep of the governing equations
//   mass    total-mass quadrature with divergence classification
//   blowup  center-density blowup-rate products
//
// Exit codes: 0 success, 1 verification failure, 2 config/domain error,
// 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "radialns/diagnostics.hpp"
#include "radialns/families.hpp"
#include "radialns/json_io.hpp"
#include "radialns/residual.hpp"
#include "radialns/scaling_ode.hpp"

namespace {

using namespace rns;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open output file \"" + path + "\"");
    out << content;
    if (!out) throw NumericError("failed writing \"" + path + "\"");
}

std::string pick(const std::string& flag_value, const std::string& config_value,
                 const std::string& fallback) {
    if (!flag_value.empty()) return flag_value;
    if (!config_value.empty()) return config_value;
    return fallback;
}

SolutionFamily make_family(const RunConfig& c) {
    return SolutionFamily::create(c.family, c.integrate.t_end,
                                  c.integrate.rel_tol, c.integrate.abs_tol);
}

Grid resolve_grid(const RunConfig& c, const SolutionFamily& family) {
    const GridConfig& g = c.grid;
    if (g.auto_grid) {
        return make_verification_grid(family, g.n_t, g.n_r, g.fd_step_t,
                                      g.fd_step_r, g.t_cap);
    }
    Grid grid;
    grid.t_min = g.t_min;
    grid.t_max = g.t_max;
    grid.r_min = g.r_min;
    grid.r_max = g.r_max;
    grid.n_t = g.n_t;
    grid.n_r = g.n_r;
    grid.fd_step_t = g.fd_step_t;
    grid.fd_step_r = g.fd_step_r;
    return grid;
}

// ---- solve ------------------------------------------------------------------

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,a,adot\n";
    for (const auto& s : traj.samples()) {
        out += format_double(s.t);
        out += ',';
        out += format_double(s.a);
        out += ',';
        out += format_double(s.adot);
        out += '\n';
    }
    return out;
}

std::string trajectory_json(const Trajectory& traj) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : traj.samples()) {
        rows.push_back({{"t", s.t}, {"a", s.a}, {"adot", s.adot}});
    }
    return rows.dump(2) + "\n";
}

int cmd_solve(const RunConfig& c, const std::string& data_flag,
              const std::string& report_flag) {
    validate(c.family);
    const ScalingOde ode = ode_for(c.family);
    const Trajectory traj =
        integrate(ode, c.integrate.t_end, c.integrate.rel_tol, c.integrate.abs_tol);
    if (traj.status() == TrajectoryStatus::StepFailure) {
        std::cerr << "rns solve: integration failed: " << traj.diagnostic()
                  << "\n";
        return kExitNumeric;
    }
    const BlowupReport rep = detect_blowup(ode, c.blowup.time_cap, c.blowup.tol);

    const std::string data_path = pick(data_flag, c.output.data_path, "trajectory.csv");
    const std::string report_path =
        pick(report_flag, c.output.report_path, "solve_report.json");
    write_file(data_path, c.output.format == OutputFormat::Csv
                              ? trajectory_csv(traj)
                              : trajectory_json(traj));
    write_file(report_path, solve_report_json(traj, rep));
    return kExitOk;
}

// ---- fields -----------------------------------------------------------------

std::string fields_table_csv(const SolutionFamily& family, const Grid& grid) {
    const bool support_col =
        family.params().variant == FamilyVariant::PressurelessThetaNe1;
    std::string out = support_col ? "t,r,rho,u,support\n" : "t,r,rho,u\n";
    const double dt = (grid.t_max - grid.t_min) / (grid.n_t - 1);
    const double dr = (grid.r_max - grid.r_min) / (grid.n_r - 1);
    for (int i = 0; i < grid.n_t; ++i) {
        const double t = grid.t_min + i * dt;
        for (int j = 0; j < grid.n_r; ++j) {
            const double r = grid.r_min + j * dr;
            const FieldSample s = family.eval_fields(t, r);
            out += format_double(t);
            out += ',';
            out += format_double(r);
            out += ',';
            out += format_double(s.rho);
            out += ',';
            out += format_double(s.u);
            if (support_col) out += s.in_support ? ",1" : ",0";
            out += '\n';
        }
    }
    return out;
}

std::string fields_table_json(const SolutionFamily& family, const Grid& grid) {
    const bool support_col =
        family.params().variant == FamilyVariant::PressurelessThetaNe1;
    nlohmann::json rows = nlohmann::json::array();
    const double dt = (grid.t_max - grid.t_min) / (grid.n_t - 1);
    const double dr = (grid.r_max - grid.r_min) / (grid.n_r - 1);
    for (int i = 0; i < grid.n_t; ++i) {
        for (int j = 0; j < grid.n_r; ++j) {
            const double t = grid.t_min + i * dt;
            const double r = grid.r_min + j * dr;
            const FieldSample s = family.eval_fields(t, r);
            nlohmann::json row = {{"t", t}, {"r", r}, {"rho", s.rho}, {"u", s.u}};
            if (support_col) row["support"] = s.in_support ? 1 : 0;
            rows.push_back(row);
        }
    }
    return rows.dump(2) + "\n";
}

int cmd_fields(const RunConfig& c, const std::string& data_flag) {
    const SolutionFamily family = make_family(c);
    const Grid grid = resolve_grid(c, family);
    validate_grid_domain(family, grid);
    const std::string data_path = pick(data_flag, c.output.data_path, "fields.csv");
    write_file(data_path, c.output.format == OutputFormat::Csv
                              ? fields_table_csv(family, grid)
                              : fields_table_json(family, grid));
    return kExitOk;
}

// ---- verify -----------------------------------------------------------------

std::string per_node_csv(const FieldSampler& fields, const EquationSpec& eq,
                         const Grid& grid) {
    std::string out = "t,r,mass_residual,momentum_residual\n";
    const double dt = (grid.t_max - grid.t_min) / (grid.n_t - 1);
    const double dr = (grid.r_max - grid.r_min) / (grid.n_r - 1);
    for (int i = 0; i < grid.n_t; ++i) {
        for (int j = 0; j < grid.n_r; ++j) {
            const NodeResidual node = sweep_node_residuals(fields, eq, grid, i, j);
            out += format_double(grid.t_min + i * dt);
            out += ',';
            out += format_double(grid.r_min + j * dr);
            out += ',';
            out += format_double(node.mass);
            out += ',';
            out += format_double(node.momentum);
            out += '\n';
        }
    }
    return out;
}

// Re-verifies a fields table written by cmd_fields: the sampler answers only
// at the table's own nodes and the fd steps equal the table spacings, so the
// stencil reads back exactly the tabulated values.
struct FieldsTable {
    std::vector<double> ts, rs;
    std::vector<std::vector<RhoU>> values;  // [i_t][j_r]
    bool has_support = false;
};

FieldsTable read_fields_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("verify: cannot open fields file \"" + path + "\"");
    std::string line;
    if (!std::getline(in, line)) throw DomainError("verify: empty fields file");
    FieldsTable table;
    if (line == "t,r,rho,u,support") table.has_support = true;
    else if (line != "t,r,rho,u") {
        throw DomainError("verify: unexpected fields header \"" + line + "\"");
    }

    std::vector<double> ts_seen, rs_seen;
    std::vector<std::tuple<double, double, RhoU>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
        if (cells.size() != (table.has_support ? 5u : 4u)) {
            throw DomainError("verify: malformed fields row \"" + line + "\"");
        }
        rows.emplace_back(cells[0], cells[1], RhoU{cells[2], cells[3]});
    }
    if (rows.empty()) throw DomainError("verify: fields file has no rows");

    for (const auto& [t, r, v] : rows) {
        if (ts_seen.empty() || t != ts_seen.back()) ts_seen.push_back(t);
        if (ts_seen.size() == 1) rs_seen.push_back(r);
    }
    table.ts = ts_seen;
    table.rs = rs_seen;
    if (rows.size() != table.ts.size() * table.rs.size()) {
        throw DomainError("verify: fields table is not a full grid");
    }
    table.values.assign(table.ts.size(), std::vector<RhoU>(table.rs.size()));
    std::size_t k = 0;
    for (std::size_t i = 0; i < table.ts.size(); ++i) {
        for (std::size_t j = 0; j < table.rs.size(); ++j, ++k) {
            table.values[i][j] = std::get<2>(rows[k]);
        }
    }
    return table;
}

int verify_from_file(const RunConfig& c, const std::string& report_flag) {
    validate(c.family);
    const FieldsTable table = read_fields_table(*c.verify.fields_file);
    const std::size_t nt = table.ts.size(), nr = table.rs.size();
    if (nt < 3 || nr < 5) {
        throw DomainError("verify: fields table too small for the stencil");
    }
    const double dt = table.ts[1] - table.ts[0];
    const double dr = table.rs[1] - table.rs[0];

    const FieldSampler fields = [&table, dt, dr](double t, double r) {
        const double fi = (t - table.ts.front()) / dt;
        const double fj = (r - table.rs.front()) / dr;
        const long i = std::lround(fi), j = std::lround(fj);
        if (i < 0 || j < 0 || i >= static_cast<long>(table.ts.size()) ||
            j >= static_cast<long>(table.rs.size()) ||
            std::fabs(fi - i) > 1e-6 || std::fabs(fj - j) > 1e-6) {
            throw DomainError("verify: off-node sample requested from fields table");
        }
        return table.values[i][j];
    };

    const EquationSpec eq = equation_for(c.family, c.verify.solid_core_source);
    ResidualReport rep;
    rep.grid = Grid{table.ts.front(), table.ts.back(), table.rs.front(),
                    table.rs.back(), static_cast<int>(nt), static_cast<int>(nr),
                    dt, dr};
    double sum_m = 0.0, sum_q = 0.0, worst = -1.0;
    std::size_t evaluated = 0;
    for (std::size_t i = 1; i + 1 < nt; ++i) {
        for (std::size_t j = 2; j + 2 < nr; ++j) {
            const double t = table.ts[i], r = table.rs[j];
            double m, q;
            try {
                m = mass_residual(fields, eq.dim_n, t, r, dt, dr);
                q = eq.kind == EquationSpec::Kind::Pressureless
                        ? momentum_residual_pressureless(fields, eq.dim_n, eq.kappa,
                                                         eq.theta, t, r, dt, dr)
                    : eq.kind == EquationSpec::Kind::SolidCore
                        ? momentum_residual_solid_core(fields, eq.pressure_k, eq.nu,
                                                       eq.beta, eq.core_mass, t, r,
                                                       dt, dr, eq.source)
                        : momentum_residual_isothermal(fields, eq.dim_n,
                                                       eq.pressure_k, eq.nu,
                                                       eq.beta, t, r, dt, dr);
            } catch (const DomainError&) {
                continue;  // support boundary inside the stencil
            }
            ++evaluated;
            sum_m += std::fabs(m);
            sum_q += std::fabs(q);
            rep.max_abs_mass = std::max(rep.max_abs_mass, std::fabs(m));
            rep.max_abs_momentum = std::max(rep.max_abs_momentum, std::fabs(q));
            if (std::max(std::fabs(m), std::fabs(q)) > worst) {
                worst = std::max(std::fabs(m), std::fabs(q));
                rep.worst_t = t;
                rep.worst_r = r;
            }
        }
    }
    if (evaluated == 0) {
        throw DomainError("verify: no interior nodes could be evaluated");
    }
    rep.mean_abs_mass = sum_m / evaluated;
    rep.mean_abs_momentum = sum_q / evaluated;

    const bool pass = rep.max_abs_mass <= c.verify.max_mass_residual &&
                      rep.max_abs_momentum <= c.verify.max_momentum_residual;
    const std::string report_path =
        pick(report_flag, c.output.report_path, "verify_report.json");
    write_file(report_path, verify_report_json(rep, c.verify.max_mass_residual,
                                               c.verify.max_momentum_residual, pass));
    if (!pass) {
        std::cerr << "rns verify: residuals exceed thresholds (max mass "
                  << format_double(rep.max_abs_mass) << ", max momentum "
                  << format_double(rep.max_abs_momentum) << ")\n";
    }
    return pass ? kExitOk : kExitVerifyFail;
}

int cmd_verify(const RunConfig& c, const std::string& report_flag) {
    if (c.verify.fields_file) return verify_from_file(c, report_flag);

    const SolutionFamily family = make_family(c);
    const Grid grid = resolve_grid(c, family);
    validate_grid_domain(family, grid);

    const EquationSpec eq = equation_for(c.family, c.verify.solid_core_source);
    FieldSampler fields;
    switch (c.verify.control) {
        case NegativeControl::None:
            fields = family_sampler(family);
            break;
        case NegativeControl::DensityExponent:
            fields = corrupted_sampler(family, Corruption::DensityExponent);
            break;
        case NegativeControl::ProfileExponential:
            fields = corrupted_sampler(family, Corruption::ProfileExponential);
            break;
    }

    const ResidualReport rep = residual_sweep(fields, eq, grid);
    if (c.verify.per_node_csv) {
        write_file(*c.verify.per_node_csv, per_node_csv(fields, eq, grid));
    }

    const bool pass = rep.max_abs_mass <= c.verify.max_mass_residual &&
                      rep.max_abs_momentum <= c.verify.max_momentum_residual;
    const std::string report_path =
        pick(report_flag, c.output.report_path, "verify_report.json");
    write_file(report_path, verify_report_json(rep, c.verify.max_mass_residual,
                                               c.verify.max_momentum_residual, pass));
    if (!pass) {
        std::cerr << "rns verify: residuals exceed thresholds (max mass "
                  << format_double(rep.max_abs_mass) << ", max momentum "
                  << format_double(rep.max_abs_momentum) << ")\n";
    }
    return pass ? kExitOk : kExitVerifyFail;
}

// ---- mass / blowup ----------------------------------------------------------

int cmd_mass(const RunConfig& c, const std::string& report_flag) {
    const SolutionFamily family = make_family(c);
    const MassResult result =
        total_mass(family, c.mass.t, c.mass.quad_tol, c.mass.r_max, c.mass.mode);
    const std::string report_path =
        pick(report_flag, c.output.report_path, "mass_report.json");
    write_file(report_path,
               mass_report_json(result, c.family.dim_n, c.mass.mode));
    return kExitOk;
}

int cmd_blowup(const RunConfig& c, const std::string& report_flag) {
    const SolutionFamily family = make_family(c);
    const double exponent = c.blowup.exponent.value_or(c.family.dim_n - 0.5);
    const BlowupRateEstimate est =
        blowup_rate_estimate(family, exponent, c.blowup.n_samples);
    if (c.blowup.products_csv) {
        std::string csv = "t,product\n";
        for (const auto& s : est.products) {
            csv += format_double(s.t);
            csv += ',';
            csv += format_double(s.product);
            csv += '\n';
        }
        write_file(*c.blowup.products_csv, csv);
    }
    const std::string report_path =
        pick(report_flag, c.output.report_path, "blowup_report.json");
    write_file(report_path, blowup_rate_report_json(est));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-form radial Navier-Stokes families: solve, sample, verify"};
    app.require_subcommand(1);

    std::string config_path, data_flag, report_flag;
    std::optional<double> max_mass_flag, max_momentum_flag;

    auto add_common = [&](CLI::App* sub, bool with_data) {
        sub->add_option("config", config_path, "JSON run configuration")
            ->required();
        if (with_data) {
            sub->add_option("--output", data_flag, "data file path override");
        }
        sub->add_option("--report", report_flag, "report file path override");
    };

    CLI::App* solve = app.add_subcommand("solve", "integrate the scale-factor ODE");
    add_common(solve, true);
    CLI::App* fields = app.add_subcommand("fields", "sample rho and u on a grid");
    add_common(fields, true);
    CLI::App* verify = app.add_subcommand("verify", "residual sweep of the governing equations");
    add_common(verify, false);
    verify->add_option("--max-mass", max_mass_flag, "mass residual threshold override");
    verify->add_option("--max-momentum", max_momentum_flag,
                       "momentum residual threshold override");
    CLI::App* mass = app.add_subcommand("mass", "total mass with divergence detection");
    add_common(mass, false);
    CLI::App* blowup = app.add_subcommand("blowup", "blowup-rate product table");
    add_common(blowup, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig config = parse_config_file(config_path);
        if (max_mass_flag) config.verify.max_mass_residual = *max_mass_flag;
        if (max_momentum_flag) config.verify.max_momentum_residual = *max_momentum_flag;

        if (solve->parsed()) return cmd_solve(config, data_flag, report_flag);
        if (fields->parsed()) return cmd_fields(config, data_flag);
        if (verify->parsed()) return cmd_verify(config, report_flag);
        if (mass->parsed()) return cmd_mass(config, report_flag);
        if (blowup->parsed()) return cmd_blowup(config, report_flag);
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "rns: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "rns: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "rns: unexpected error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
