#include "vaxdyn/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace vaxdyn {

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// JSON has no spelling for inf/nan; emit null rather than an invalid document.
Json num(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json complex_pair(const std::complex<double>& z)
{
    return Json{{"re", num(z.real())}, {"im", num(z.imag())}};
}

Json matrix_json(const Eigen::Matrix2d& m)
{
    return Json::array({Json::array({num(m(0, 0)), num(m(0, 1))}),
                        Json::array({num(m(1, 0)), num(m(1, 1))})});
}

template <std::size_t N>
std::string csv_rows(const Trajectory<N>& traj, const char* header, bool with_theta)
{
    std::string out = header;
    out += '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out += format_double(traj.times[k]);
        for (double c : traj.states[k]) {
            out += ',';
            out += format_double(c);
        }
        if (with_theta) {
            out += ',';
            out += format_double(traj.thetas[k]);
        }
        out += '\n';
    }
    return out;
}

} // namespace

std::string trajectory_csv(const Trajectory<5>& traj)
{
    return csv_rows(traj, "t,S,I,R,x,n,theta", true);
}

std::string trajectory_csv(const Trajectory<2>& traj)
{
    return csv_rows(traj, "t,x,n", false);
}

Json params_json(const ModelParams& p, ModelKind kind)
{
    Json j;
    j["model"] = kind == ModelKind::full ? "full" : "reduced";
    if (kind == ModelKind::full) {
        j["mu"]     = p.mu;
        j["beta_t"] = p.beta_t;
        j["gamma"]  = p.gamma;
    }
    j["r0"]             = p.r0;
    j["cost_infection"] = p.cost_infection;
    j["cost_vacc_high"] = p.cost_vacc_high;
    j["cost_vacc_low"]  = p.cost_vacc_low;
    j["theta"]          = p.theta;
    j["eps1"]           = p.eps1;
    j["eps2"]           = p.eps2;
    if (p.sel_strength != 0.0) {
        j["sel_strength"] = p.sel_strength;
    }
    return j;
}

Json integration_json(const IntegrationConfig& cfg)
{
    return Json{{"dt", cfg.dt},
                {"t_max", cfg.t_max},
                {"record_every", cfg.record_every},
                {"clamp_eps", cfg.clamp_eps},
                {"convergence_tol", cfg.convergence_tol},
                {"convergence_window", cfg.convergence_window}};
}

Json fixed_point_json(const FixedPoint& fp)
{
    Json j;
    j["id"]       = fp.id;
    j["x"]        = num(fp.location.x);
    j["n"]        = num(fp.location.n);
    j["exists"]   = fp.exists;
    if (!fp.exists) {
        j["requires"] = fp.violated_condition;
        return j;
    }
    j["classification"] = to_string(*fp.classification);
    j["eigenvalues"] = Json::array({complex_pair(fp.eigenvalues[0]), complex_pair(fp.eigenvalues[1])});
    j["jacobian"]    = matrix_json(fp.jacobian);
    if (!fp.note.empty()) {
        j["note"] = fp.note;
    }
    return j;
}

Json regime_json(const RegimeReport& r)
{
    return Json{{"case", r.case_id},
                {"subcase", r.subcase},
                {"stable_points", r.stable_points},
                {"bistable", r.bistable},
                {"thresholds",
                 {{"fp1_exists", num(r.thresholds.fp1_exists)},
                  {"fp2_exists", num(r.thresholds.fp2_exists)},
                  {"saddle_lo", num(r.thresholds.saddle_lo)},
                  {"saddle_hi", num(r.thresholds.saddle_hi)}}}};
}

Json equilibria_json(const ModelParams& p, const std::vector<FixedPoint>& fps,
                     const RegimeReport& regime)
{
    Json j;
    j["params"] = params_json(p, ModelKind::reduced);
    j["fixed_points"] = Json::array();
    for (const auto& fp : fps) {
        j["fixed_points"].push_back(fixed_point_json(fp));
    }
    j["regime"] = regime_json(regime);
    j["eigen_stable_points"] = eigen_stable_ids(fps);
    return j;
}

template <std::size_t N>
Json trajectory_summary_json(const Trajectory<N>& traj)
{
    Json j;
    j["samples"]         = traj.times.size();
    j["steps"]           = traj.steps;
    j["final_time"]      = traj.final_time();
    j["terminal_reason"] = to_string(traj.terminal_reason);
    Json fin             = Json::array();
    for (double c : traj.final_state()) {
        fin.push_back(num(c));
    }
    j["final_state"]   = fin;
    j["policy_events"] = Json::array();
    for (const auto& e : traj.policy_events) {
        j["policy_events"].push_back(
            {{"t", e.time}, {"old_theta", e.old_theta}, {"new_theta", e.new_theta}});
    }
    j["clamp_warning_count"] = traj.clamp_warning_count;
    return j;
}

template Json trajectory_summary_json<2>(const Trajectory<2>&);
template Json trajectory_summary_json<5>(const Trajectory<5>&);

std::string basin_csv(const BasinReport& rep)
{
    std::string out = "x_center,n_center,label\n";
    for (int row = 0; row < rep.grid_n; ++row) {
        for (int col = 0; col < rep.grid_n; ++col) {
            out += format_double(rep.cell_center(col));
            out += ',';
            out += format_double(rep.cell_center(row));
            out += ',';
            out += to_string(rep.labels[static_cast<std::size_t>(row) * rep.grid_n + col]);
            out += '\n';
        }
    }
    return out;
}

Json separatrix_json(const Separatrix& s)
{
    Json j;
    j["saddle"]     = {{"x", s.saddle.x}, {"n", s.saddle.n}};
    j["lambda_pos"] = num(s.lambda_pos);
    j["lambda_neg"] = num(s.lambda_neg);
    j["eigvec_pos"] = {num(s.eigvec_pos[0]), num(s.eigvec_pos[1])};
    j["eigvec_neg"] = {num(s.eigvec_neg[0]), num(s.eigvec_neg[1])};
    j["slope"]      = num(s.slope);
    j["intercept"]  = num(s.intercept);
    j["closed_form"] = {{"lambda_minus_branch", num(s.closed_form.lambda_minus_branch)},
                        {"lambda_plus_branch", num(s.closed_form.lambda_plus_branch)},
                        {"eta1", num(s.closed_form.eta1)},
                        {"slope", num(s.closed_form.slope)},
                        {"intercept", num(s.closed_form.intercept)}};
    j["closed_form_max_rel_diff"] = num(s.agreement.max());
    return j;
}

Json basin_json(const ModelParams& p, const BasinReport& rep)
{
    Json j;
    j["params"]       = params_json(p, ModelKind::reduced);
    j["integration"]  = integration_json(rep.integration);
    j["grid_n"]       = rep.grid_n;
    j["classify_tol"] = rep.classify_tol;
    j["regime"]       = regime_json(rep.regime);
    j["attractors"]   = Json::array();
    for (const auto& fp : rep.attractors) {
        j["attractors"].push_back({{"id", fp.id}, {"x", fp.location.x}, {"n", fp.location.n}});
    }
    j["area"] = {{"fp1", rep.area_fp1},
                 {"fp2", rep.area_fp2},
                 {"other", rep.area_other},
                 {"unresolved", rep.area_unresolved},
                 {"fp1_linear", rep.area_fp1_linear}};
    j["separatrix"] = separatrix_json(rep.separatrix);
    j["warnings"]   = rep.warnings;
    return j;
}

std::string sweep_csv(SweepParameter which, const std::vector<SweepPoint>& points)
{
    std::string out = to_string(which) + ",area_fp1,area_fp1_linear,area_unresolved,error\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& pt : points) {
        std::string err = pt.error;
        // Keep one record per line and the field count fixed.
        for (char& ch : err) {
            if (ch == ',' || ch == '\n' || ch == '"') {
                ch = ';';
            }
        }
        out += format_double(pt.value) + ',' + opt(pt.area_fp1) + ',' + opt(pt.area_fp1_linear) +
               ',' + opt(pt.area_unresolved) + ',' + err + '\n';
    }
    return out;
}

Json policy_json(const ControlPolicy& policy)
{
    Json j;
    j["kind"] = to_string(policy.kind);
    switch (policy.kind) {
    case PolicyKind::none:
        break;
    case PolicyKind::threshold:
        j["i_threshold"]      = policy.i_threshold;
        j["theta_controlled"] = policy.theta_controlled;
        j["latching"]         = policy.latching;
        break;
    case PolicyKind::window:
        j["t_start"]          = policy.t_start;
        j["t_end"]            = policy.t_end;
        j["theta_controlled"] = policy.theta_controlled;
        break;
    }
    return j;
}

Json control_report_json(const ControlReport& r)
{
    return Json{{"tail_fraction", r.tail_fraction},
                {"tail_samples", r.tail_samples},
                {"tail_start_time", r.tail_start_time},
                {"mean_x_tail_controlled", num(r.mean_x_tail_controlled)},
                {"mean_x_tail_uncontrolled", num(r.mean_x_tail_uncontrolled)},
                {"mean_x_tail_delta", num(r.mean_x_tail_delta)},
                {"n_end_controlled", num(r.n_end_controlled)},
                {"n_end_uncontrolled", num(r.n_end_uncontrolled)},
                {"n_end_delta", num(r.n_end_delta)},
                {"oscillation_amplitude_x",
                 {{"controlled", num(r.amplitude_x_controlled)},
                  {"uncontrolled", num(r.amplitude_x_uncontrolled)}}}};
}

std::string dump(const Json& j)
{
    return j.dump(2) + "\n";
}

namespace {

constexpr double kSize   = 480.0;
constexpr double kMargin = 48.0;

double px(double x) { return kMargin + x * kSize; }
double py(double n) { return kMargin + (1.0 - n) * kSize; }

std::string f3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape_xml(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char* basin_color(BasinLabel l)
{
    switch (l) {
    case BasinLabel::fp1: return "#cfe3f5";
    case BasinLabel::fp2: return "#f6d6c8";
    case BasinLabel::other: return "#e4e4e4";
    case BasinLabel::unresolved: return "#888888";
    }
    return "#ffffff";
}

// Clip n = k x + b to the unit square; false if the line misses it.
bool clip_line(double k, double b, double& x0, double& n0, double& x1, double& n1)
{
    double lo = 0.0;
    double hi = 1.0;
    if (k != 0.0) {
        double xa = (0.0 - b) / k;
        double xb = (1.0 - b) / k;
        if (xa > xb) {
            std::swap(xa, xb);
        }
        lo = std::max(lo, xa);
        hi = std::min(hi, xb);
    }
    else if (b < 0.0 || b > 1.0) {
        return false;
    }
    if (lo >= hi) {
        return false;
    }
    x0 = lo;
    x1 = hi;
    n0 = k * lo + b;
    n1 = k * hi + b;
    return true;
}

} // namespace

std::string phase_portrait_svg(const PhasePortrait& fig)
{
    const double w = kSize + 2 * kMargin;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << w
       << "\" viewBox=\"0 0 " << w << ' ' << w << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (fig.basin != nullptr) {
        // One rectangle per horizontal run of equal labels keeps the file small.
        const BasinReport& b = *fig.basin;
        const double cell    = kSize / b.grid_n;
        for (int row = 0; row < b.grid_n; ++row) {
            int col = 0;
            while (col < b.grid_n) {
                const BasinLabel l = b.labels[static_cast<std::size_t>(row) * b.grid_n + col];
                int end            = col + 1;
                while (end < b.grid_n &&
                       b.labels[static_cast<std::size_t>(row) * b.grid_n + end] == l) {
                    ++end;
                }
                os << "<rect x=\"" << f3(kMargin + col * cell) << "\" y=\""
                   << f3(kMargin + (b.grid_n - 1 - row) * cell) << "\" width=\""
                   << f3((end - col) * cell) << "\" height=\"" << f3(cell) << "\" fill=\""
                   << basin_color(l) << "\"/>\n";
                col = end;
            }
        }
    }

    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize
       << "\" height=\"" << kSize << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = t / 4.0;
        os << "<text x=\"" << f3(px(v)) << "\" y=\"" << f3(py(0) + 16)
           << "\" font-size=\"11\" text-anchor=\"middle\">" << f3(v).substr(0, 4) << "</text>\n";
        os << "<text x=\"" << f3(kMargin - 6) << "\" y=\"" << f3(py(v) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << f3(v).substr(0, 4) << "</text>\n";
    }
    os << "<text x=\"" << f3(px(0.5)) << "\" y=\"" << f3(w - 10)
       << "\" font-size=\"13\" text-anchor=\"middle\">x (vaccination level)</text>\n";
    os << "<text x=\"14\" y=\"" << f3(py(0.5)) << "\" font-size=\"13\" text-anchor=\"middle\" "
       << "transform=\"rotate(-90 14 " << f3(py(0.5)) << ")\">n (perceived risk)</text>\n";
    if (!fig.title.empty()) {
        os << "<text x=\"" << f3(px(0.5)) << "\" y=\"28\" font-size=\"14\" text-anchor=\"middle\">"
           << escape_xml(fig.title) << "</text>\n";
    }

    if (fig.separatrix != nullptr) {
        double x0, n0, x1, n1;
        if (clip_line(fig.separatrix->slope, fig.separatrix->intercept, x0, n0, x1, n1)) {
            os << "<line x1=\"" << f3(px(x0)) << "\" y1=\"" << f3(py(n0)) << "\" x2=\""
               << f3(px(x1)) << "\" y2=\"" << f3(py(n1))
               << "\" stroke=\"black\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n";
        }
    }

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t k = 0; k < fig.paths.size(); ++k) {
        const auto& path = fig.paths[k];
        if (path.empty()) {
            continue;
        }
        os << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << palette[k % 6]
           << "\" points=\"";
        for (const auto& s : path) {
            os << f3(px(s[0])) << ',' << f3(py(s[1])) << ' ';
        }
        os << "\"/>\n";
        os << "<circle cx=\"" << f3(px(path.front()[0])) << "\" cy=\"" << f3(py(path.front()[1]))
           << "\" r=\"3\" fill=\"" << palette[k % 6] << "\"/>\n";
    }

    for (const auto& fp : fig.points) {
        if (!fp.exists) {
            continue;
        }
        const bool stable = fp.classification == Stability::stable;
        os << "<circle cx=\"" << f3(px(fp.location.x)) << "\" cy=\"" << f3(py(fp.location.n))
           << "\" r=\"5\" stroke=\"black\" fill=\"" << (stable ? "black" : "white") << "\"/>\n";
        os << "<text x=\"" << f3(px(fp.location.x) + 7) << "\" y=\"" << f3(py(fp.location.n) - 7)
           << "\" font-size=\"11\">" << fp.id << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace vaxdyn
