#include "vaxdyn/cli.hpp"

#include "vaxdyn/basins.hpp"
#include "vaxdyn/control.hpp"
#include "vaxdyn/equilibria.hpp"
#include "vaxdyn/errors.hpp"
#include "vaxdyn/export.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace vaxdyn {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void emit(std::ostream& out, const fs::path& path, const std::string& content,
          const std::string& summary)
{
    write_file_atomic(path, content);
    out << path.string() << ": " << summary << '\n';
}

std::string join_ids(const std::vector<int>& ids)
{
    std::string s = "{";
    for (std::size_t k = 0; k < ids.size(); ++k) {
        s += (k ? "," : "") + std::to_string(ids[k]);
    }
    return s + "}";
}

/// Fixed points for annotating a portrait; empty if the regime is degenerate.
std::vector<FixedPoint> portrait_points(const ModelParams& p)
{
    try {
        return enumerate_fixed_points(p);
    }
    catch (const std::exception&) {
        return {};
    }
}

struct Run {
    std::string csv;
    Json summary;
    std::vector<StateVec<2>> path;
    StateVec<2> final_xn{};
    std::string reason;
    std::size_t samples = 0;
};

template <std::size_t N>
Run package(const Trajectory<N>& traj)
{
    Run r;
    r.csv      = trajectory_csv(traj);
    r.summary  = trajectory_summary_json(traj);
    r.path     = project_xn(traj);
    r.final_xn = {traj.final_state()[N - 2], traj.final_state()[N - 1]};
    r.reason   = to_string(traj.terminal_reason);
    r.samples  = traj.times.size();
    return r;
}

Run run_one(const ScenarioConfig& c, std::size_t k, const ControlPolicy& policy,
            const IntegrationConfig& ic)
{
    const double theta = c.params.theta;
    if (c.model == ModelKind::full) {
        const FullState s0 = epidemic_initial_state(c.x0[k], c.n0[k], c.i0);
        return package(integrate<5>(full_field(c.params), s0.as_array(), ic, theta,
                                    make_full_hook(policy, theta)));
    }
    return package(integrate<2>(slow_reduced_field(c.params), {c.x0[k], c.n0[k]}, ic, theta,
                                make_reduced_hook(policy, theta)));
}

std::string run_line(const Run& r)
{
    return std::to_string(r.samples) + " samples, final x=" + fixed(r.final_xn[0]) +
           " n=" + fixed(r.final_xn[1]) + " (" + r.reason + ")";
}

void do_simulate(const ScenarioConfig& c, const fs::path& dir, bool svg, std::ostream& out)
{
    Json doc;
    doc["scenario"]    = c.name;
    doc["params"]      = params_json(c.params, c.model);
    doc["integration"] = integration_json(c.integration);
    doc["policy"]      = policy_json(c.policy);
    doc["runs"]        = Json::array();

    PhasePortrait fig;
    fig.title = c.name;
    for (std::size_t k = 0; k < c.x0.size(); ++k) {
        const Run r          = run_one(c, k, c.policy, c.integration);
        const std::string fn = "trajectory_" + std::to_string(k) + ".csv";
        emit(out, dir / fn, r.csv, run_line(r));
        Json entry       = r.summary;
        entry["x0"]      = c.x0[k];
        entry["n0"]      = c.n0[k];
        entry["file"]    = fn;
        doc["runs"].push_back(entry);
        fig.paths.push_back(r.path);
    }
    emit(out, dir / "simulate.json", dump(doc),
         std::to_string(c.x0.size()) + " run summaries");
    if (svg) {
        fig.points = portrait_points(c.params);
        emit(out, dir / "phase.svg", phase_portrait_svg(fig), "phase portrait");
    }
}

void do_equilibria(const ScenarioConfig& c, const fs::path& dir, std::ostream& out)
{
    const auto fps          = enumerate_fixed_points(c.params);
    const RegimeReport reg  = classify_regime(c.params);
    Json doc                = equilibria_json(c.params, fps, reg);
    doc["scenario"]         = c.name;
    emit(out, dir / "equilibria.json", dump(doc),
         "case " + std::to_string(reg.case_id) + " subcase " + std::to_string(reg.subcase) +
             ", stable points " + join_ids(reg.stable_points));
}

void do_basin(const ScenarioConfig& c, int grid_n, unsigned threads, const fs::path& dir,
              bool svg, std::ostream& out)
{
    BasinOptions bo;
    bo.classify_tol = c.classify_tol;
    bo.threads      = threads;
    const BasinReport rep = basin_area_grid(c.params, grid_n, c.integration, bo);
    emit(out, dir / "basin.csv", basin_csv(rep),
         std::to_string(grid_n) + "x" + std::to_string(grid_n) + " cell labels");
    Json doc        = basin_json(c.params, rep);
    doc["scenario"] = c.name;
    emit(out, dir / "basin.json", dump(doc),
         "area fp1=" + fixed(rep.area_fp1, 4) + " (linear " + fixed(rep.area_fp1_linear, 4) +
             "), fp2=" + fixed(rep.area_fp2, 4) + ", unresolved=" + fixed(rep.area_unresolved, 4));
    for (const auto& w : rep.warnings) {
        out << "warning: " << w << '\n';
    }
    if (svg) {
        PhasePortrait fig;
        fig.title      = c.name;
        fig.basin      = &rep;
        fig.separatrix = &rep.separatrix;
        fig.points     = enumerate_fixed_points(c.params);
        emit(out, dir / "basin.svg", phase_portrait_svg(fig), "basin map");
    }
}

void do_sweep(const ScenarioConfig& c, int grid_n, unsigned threads, const fs::path& dir,
              std::ostream& out)
{
    BasinOptions bo;
    bo.classify_tol = c.classify_tol;
    bo.threads      = threads;
    const auto pts  = basin_area_sweep(c.params, c.sweep_parameter, c.sweep_values, grid_n,
                                       c.integration, bo);
    std::string line;
    std::size_t failed = 0;
    for (const auto& pt : pts) {
        if (!line.empty()) {
            line += ", ";
        }
        line += to_string(c.sweep_parameter) + "=" + format_double(pt.value) + " -> ";
        if (pt.area_fp1) {
            line += fixed(*pt.area_fp1, 4);
        }
        else {
            line += "error";
            ++failed;
        }
    }
    emit(out, dir / "sweep.csv", sweep_csv(c.sweep_parameter, pts), "area_fp1: " + line);
    for (const auto& pt : pts) {
        if (!pt.error.empty()) {
            out << "warning: " << to_string(c.sweep_parameter) << '=' << format_double(pt.value)
                << ": " << pt.error << '\n';
        }
    }
    if (failed == pts.size()) {
        throw std::runtime_error("every sweep value failed");
    }
}

void do_control(const ScenarioConfig& c, const fs::path& dir, bool svg, std::ostream& out)
{
    // Both runs must cover the whole horizon on the same grid, so early
    // stopping at convergence is switched off here.
    IntegrationConfig ic    = c.integration;
    ic.convergence_window   = 2.0 * ic.t_max;

    Json doc;
    doc["scenario"]    = c.name;
    doc["params"]      = params_json(c.params, c.model);
    doc["integration"] = integration_json(ic);
    doc["policy"]      = policy_json(c.policy);
    doc["comparisons"] = Json::array();

    PhasePortrait fig;
    fig.title = c.name;
    for (std::size_t k = 0; k < c.x0.size(); ++k) {
        const std::size_t N = c.model == ModelKind::full ? 5 : 2;
        ControlReport rep;
        Run ctl;
        Run unc;
        if (N == 5) {
            const FullState s0 = epidemic_initial_state(c.x0[k], c.n0[k], c.i0);
            const auto field   = full_field(c.params);
            const auto a = integrate<5>(field, s0.as_array(), ic, c.params.theta,
                                        make_full_hook(c.policy, c.params.theta));
            const auto b = integrate<5>(field, s0.as_array(), ic, c.params.theta);
            rep          = compare_runs(a, b, c.tail_fraction);
            ctl          = package(a);
            unc          = package(b);
        }
        else {
            const StateVec<2> s0{c.x0[k], c.n0[k]};
            const auto field = slow_reduced_field(c.params);
            const auto a     = integrate<2>(field, s0, ic, c.params.theta,
                                            make_reduced_hook(c.policy, c.params.theta));
            const auto b     = integrate<2>(field, s0, ic, c.params.theta);
            rep              = compare_runs(a, b, c.tail_fraction);
            ctl              = package(a);
            unc              = package(b);
        }
        const std::string suffix = "_" + std::to_string(k) + ".csv";
        emit(out, dir / ("controlled" + suffix), ctl.csv, run_line(ctl));
        emit(out, dir / ("uncontrolled" + suffix), unc.csv, run_line(unc));
        Json entry                = control_report_json(rep);
        entry["x0"]               = c.x0[k];
        entry["n0"]               = c.n0[k];
        entry["controlled_run"]   = ctl.summary;
        entry["uncontrolled_run"] = unc.summary;
        doc["comparisons"].push_back(entry);
        fig.paths.push_back(ctl.path);
        fig.paths.push_back(unc.path);
    }

    std::string line;
    for (const auto& cmp : doc["comparisons"]) {
        if (!line.empty()) {
            line += "; ";
        }
        line += "mean_x_tail_delta=" + fixed(cmp["mean_x_tail_delta"].get<double>()) +
                " n_end_delta=" + fixed(cmp["n_end_delta"].get<double>());
    }
    emit(out, dir / "control_report.json", dump(doc), line);
    if (svg) {
        fig.points = portrait_points(c.params);
        emit(out, dir / "phase.svg", phase_portrait_svg(fig), "controlled / uncontrolled paths");
    }
}

} // namespace

unsigned threads_from_env()
{
    const char* raw = std::getenv("VAXDYN_THREADS");
    if (raw == nullptr || *raw == '\0') {
        return 0;
    }
    const std::string s = raw;
    unsigned v          = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("VAXDYN_THREADS", "VAXDYN_THREADS must be a non-negative integer");
    }
    return v;
}

void run_scenario(const ScenarioConfig& cfg, Analysis analysis, const RunOptions& opt,
                  std::ostream& out)
{
    validate_for(cfg, analysis);
    fs::path dir = opt.out_dir;
    if (dir.empty()) {
        dir = cfg.out_dir.empty() ? fs::path("out") / cfg.name : fs::path(cfg.out_dir);
    }
    const bool svg   = opt.svg || cfg.svg;
    const int grid_n = opt.grid_n.value_or(cfg.grid_n);
    if (grid_n < 2) {
        throw ConfigError("--grid", "grid must be >= 2");
    }

    switch (analysis) {
    case Analysis::simulate:
        do_simulate(cfg, dir, svg, out);
        break;
    case Analysis::equilibria:
        do_equilibria(cfg, dir, out);
        break;
    case Analysis::basin:
        do_basin(cfg, grid_n, opt.threads, dir, svg, out);
        break;
    case Analysis::sweep:
        do_sweep(cfg, grid_n, opt.threads, dir, out);
        break;
    case Analysis::control_compare:
        do_control(cfg, dir, svg, out);
        break;
    }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Vaccination behavior / perceived risk / SIR dynamics"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int grid = 0;
    bool svg = false;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "integrate trajectories from the configured initial conditions"},
        {"equilibria", "enumerate and classify fixed points, report the regime"},
        {"basin", "measure basins of attraction on a grid"},
        {"sweep", "basin areas over a list of parameter values"},
        {"control-compare", "controlled vs uncontrolled runs"},
        {"run", "run the analysis named in the config"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "scenario config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--grid", grid, "basin grid size (overrides basin.grid_n)")
            ->check(CLI::Range(2, 100000));
        sub->add_flag("--svg", svg, "also write SVG phase portraits");
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const ScenarioConfig cfg = load_scenario(config);
        const Analysis analysis  = command == "run" ? cfg.analysis : parse_analysis(command);
        RunOptions opt;
        opt.out_dir = out_dir;
        if (grid != 0) {
            opt.grid_n = grid;
        }
        opt.svg     = svg;
        opt.threads = threads_from_env();
        run_scenario(cfg, analysis, opt, out);
    }
    catch (const ConfigError& e) {
        err << "config error [" << e.key() << "]: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e) {
        err << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace vaxdyn
