#include "vaxdyn/scenario.hpp"

#include "vaxdyn/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vaxdyn {

namespace pt = boost::property_tree;

std::string to_string(Analysis a)
{
    switch (a) {
    case Analysis::simulate:
        return "simulate";
    case Analysis::equilibria:
        return "equilibria";
    case Analysis::basin:
        return "basin";
    case Analysis::sweep:
        return "sweep";
    case Analysis::control_compare:
        return "control-compare";
    }
    return "unknown";
}

Analysis parse_analysis(const std::string& name)
{
    for (Analysis a : {Analysis::simulate, Analysis::equilibria, Analysis::basin, Analysis::sweep,
                       Analysis::control_compare}) {
        if (to_string(a) == name) {
            return a;
        }
    }
    throw std::invalid_argument("unknown analysis '" + name + "'");
}

namespace {

const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> s = {
        {"scenario", {"name", "model", "analysis"}},
        {"params",
         {"mu", "beta_t", "gamma", "r0", "cost_infection", "cost_vacc_high", "cost_vacc_low",
          "theta", "eps1", "eps2", "sel_strength"}},
        {"initial", {"x0", "n0", "i0"}},
        {"integration",
         {"dt", "t_max", "record_every", "clamp_eps", "convergence_tol", "convergence_window"}},
        {"policy", {"kind", "i_threshold", "theta_controlled", "t_start", "t_end", "latching"}},
        {"compare", {"tail_fraction"}},
        {"basin", {"grid_n", "classify_tol"}},
        {"sweep", {"parameter", "values"}},
        {"output", {"dir", "svg"}},
    };
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& raw)
{
    const std::string v = trim(raw);
    double out          = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key, "'" + raw + "' is not a number");
    }
    return out;
}

std::vector<double> to_list(const std::string& key, const std::string& raw)
{
    std::string s = raw;
    for (char& c : s) {
        if (c == ',') {
            c = ' ';
        }
    }
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        out.push_back(to_number(key, tok));
    }
    if (out.empty()) {
        throw ConfigError(key, "expected at least one number");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& raw)
{
    const std::string v = trim(raw);
    if (v == "true" || v == "yes" || v == "1") {
        return true;
    }
    if (v == "false" || v == "no" || v == "0") {
        return false;
    }
    throw ConfigError(key, "'" + raw + "' is not a boolean (true/false)");
}

// Flattened view of the file: "section.key" -> raw value.
using Entries = std::map<std::string, std::string>;

Entries flatten(const pt::ptree& tree)
{
    Entries out;
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (body.empty()) {
            // A key outside any section, or an empty section header.
            if (it == schema().end() || !body.data().empty()) {
                throw ConfigError(section, "unexpected top-level entry '" + section + "'");
            }
            continue;
        }
        if (it == schema().end()) {
            throw ConfigError(section, "unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (!it->second.contains(key)) {
                throw ConfigError(full, "unknown key '" + full + "'");
            }
            out[full] = value.data();
        }
    }
    return out;
}

bool has(const Entries& e, const std::string& key)
{
    return e.contains(key);
}

bool has_section(const Entries& e, const std::string& section)
{
    const std::string prefix = section + ".";
    const auto it            = e.lower_bound(prefix);
    return it != e.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

double number(const Entries& e, const std::string& key, double fallback)
{
    const auto it = e.find(key);
    return it == e.end() ? fallback : to_number(key, it->second);
}

double required_number(const Entries& e, const std::string& key)
{
    const auto it = e.find(key);
    if (it == e.end()) {
        throw ConfigError(key, "missing required key '" + key + "'");
    }
    return to_number(key, it->second);
}

std::size_t count(const Entries& e, const std::string& key, std::size_t fallback)
{
    const auto it = e.find(key);
    if (it == e.end()) {
        return fallback;
    }
    const double v = to_number(key, it->second);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
        throw ConfigError(key, "expected a positive integer, got '" + it->second + "'");
    }
    return static_cast<std::size_t>(v);
}

std::string text(const Entries& e, const std::string& key, const std::string& fallback)
{
    const auto it = e.find(key);
    return it == e.end() ? fallback : trim(it->second);
}

} // namespace

ScenarioConfig parse_scenario(const std::string& body, const std::string& origin)
{
    pt::ptree tree;
    try {
        std::istringstream is(body);
        pt::read_ini(is, tree);
    }
    catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()), e.message());
    }
    const Entries e = flatten(tree);

    ScenarioConfig c;
    c.name = text(e, "scenario.name", "");

    const std::string model = text(e, "scenario.model", "");
    if (model == "full") {
        c.model = ModelKind::full;
    }
    else if (model == "reduced") {
        c.model = ModelKind::reduced;
    }
    else {
        throw ConfigError("scenario.model", "model must be 'full' or 'reduced', got '" + model + "'");
    }

    if (has(e, "scenario.analysis")) {
        try {
            c.analysis = parse_analysis(text(e, "scenario.analysis", ""));
        }
        catch (const std::invalid_argument& ex) {
            throw ConfigError("scenario.analysis", ex.what());
        }
    }

    const double costs_c  = required_number(e, "params.cost_infection");
    const double costs_vh = required_number(e, "params.cost_vacc_high");
    const double costs_vl = required_number(e, "params.cost_vacc_low");
    const double theta    = required_number(e, "params.theta");
    const double eps1     = number(e, "params.eps1", 1.0);
    const double eps2     = number(e, "params.eps2", 1.0);
    try {
        if (c.model == ModelKind::full) {
            if (has(e, "params.r0")) {
                throw ConfigError("params.r0",
                                  "r0 is derived as beta_t / (gamma + mu) in the full model");
            }
            c.params = ModelParams::full(required_number(e, "params.mu"),
                                         required_number(e, "params.beta_t"),
                                         required_number(e, "params.gamma"), costs_c, costs_vh,
                                         costs_vl, theta, eps1, eps2,
                                         number(e, "params.sel_strength", 0.0));
        }
        else {
            for (const char* k : {"params.mu", "params.beta_t", "params.gamma"}) {
                if (has(e, k)) {
                    throw ConfigError(k, std::string(k) + " is not used by the reduced model");
                }
            }
            c.params = ModelParams::reduced(required_number(e, "params.r0"), costs_c, costs_vh,
                                            costs_vl, theta, eps1, eps2);
            c.params.sel_strength = number(e, "params.sel_strength", 0.0);
            c.params.validate(ModelKind::reduced);
        }
    }
    catch (const InvalidParameterError& ex) {
        throw ConfigError("params", ex.what());
    }
    catch (const DegenerateParameterError& ex) {
        throw ConfigError("params", ex.what());
    }

    if (has(e, "initial.x0")) {
        c.x0 = to_list("initial.x0", e.at("initial.x0"));
    }
    if (has(e, "initial.n0")) {
        c.n0 = to_list("initial.n0", e.at("initial.n0"));
    }
    c.i0 = number(e, "initial.i0", 0.1);

    IntegrationConfig& ic  = c.integration;
    ic.dt                  = number(e, "integration.dt", ic.dt);
    ic.t_max               = number(e, "integration.t_max", ic.t_max);
    ic.record_every        = count(e, "integration.record_every", ic.record_every);
    ic.clamp_eps           = number(e, "integration.clamp_eps", ic.clamp_eps);
    ic.convergence_tol     = number(e, "integration.convergence_tol", ic.convergence_tol);
    ic.convergence_window  = number(e, "integration.convergence_window", ic.convergence_window);
    try {
        ic.validate();
    }
    catch (const InvalidParameterError& ex) {
        throw ConfigError("integration", ex.what());
    }

    if (has_section(e, "policy")) {
        try {
            c.policy.kind = parse_policy_kind(text(e, "policy.kind", ""));
        }
        catch (const std::invalid_argument& ex) {
            throw ConfigError("policy.kind", ex.what());
        }
        c.policy.i_threshold      = number(e, "policy.i_threshold", 0.0);
        c.policy.theta_controlled = number(e, "policy.theta_controlled", 0.0);
        c.policy.t_start          = number(e, "policy.t_start", 0.0);
        c.policy.t_end            = number(e, "policy.t_end", 0.0);
        if (has(e, "policy.latching")) {
            c.policy.latching = to_bool("policy.latching", e.at("policy.latching"));
        }
        try {
            c.policy.validate();
        }
        catch (const InvalidParameterError& ex) {
            throw ConfigError("policy", ex.what());
        }
    }
    c.tail_fraction = number(e, "compare.tail_fraction", c.tail_fraction);
    if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0)) {
        throw ConfigError("compare.tail_fraction", "tail_fraction must lie in (0, 1]");
    }

    c.grid_n       = static_cast<int>(count(e, "basin.grid_n", static_cast<std::size_t>(c.grid_n)));
    c.classify_tol = number(e, "basin.classify_tol", c.classify_tol);
    if (!(c.classify_tol > 0.0)) {
        throw ConfigError("basin.classify_tol", "classify_tol must be > 0");
    }

    if (has(e, "sweep.parameter")) {
        try {
            c.sweep_parameter = parse_sweep_parameter(text(e, "sweep.parameter", ""));
        }
        catch (const std::invalid_argument& ex) {
            throw ConfigError("sweep.parameter", ex.what());
        }
    }
    if (has(e, "sweep.values")) {
        c.sweep_values = to_list("sweep.values", e.at("sweep.values"));
    }

    c.out_dir = text(e, "output.dir", "");
    if (has(e, "output.svg")) {
        c.svg = to_bool("output.svg", e.at("output.svg"));
    }
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path.string(), "cannot read config file '" + path.string() + "'");
    }
    std::ostringstream os;
    os << in.rdbuf();
    ScenarioConfig c = parse_scenario(os.str(), path.string());
    if (c.name.empty()) {
        c.name = path.stem().string();
    }
    return c;
}

void validate_for(const ScenarioConfig& c, Analysis a)
{
    const bool needs_initial = a == Analysis::simulate || a == Analysis::control_compare;
    if (needs_initial) {
        if (c.x0.empty()) {
            throw ConfigError("initial.x0", "analysis " + to_string(a) + " needs initial.x0");
        }
        if (c.n0.empty()) {
            throw ConfigError("initial.n0", "analysis " + to_string(a) + " needs initial.n0");
        }
        if (c.x0.size() != c.n0.size()) {
            throw ConfigError("initial.n0", "initial.x0 and initial.n0 must have the same length");
        }
        for (std::size_t k = 0; k < c.x0.size(); ++k) {
            if (!(c.x0[k] >= 0.0 && c.x0[k] <= 1.0)) {
                throw ConfigError("initial.x0", "x0 values must lie in [0, 1]");
            }
            if (!(c.n0[k] >= 0.0 && c.n0[k] <= 1.0)) {
                throw ConfigError("initial.n0", "n0 values must lie in [0, 1]");
            }
            if (c.model == ModelKind::full && c.x0[k] + c.i0 > 1.0) {
                throw ConfigError("initial.i0", "x0 + i0 must not exceed 1 (S0 = 1 - i0 - x0)");
            }
        }
        if (c.model == ModelKind::full && !(c.i0 > 0.0 && c.i0 < 1.0)) {
            throw ConfigError("initial.i0", "i0 must lie in (0, 1)");
        }
    }

    if (a == Analysis::basin || a == Analysis::sweep) {
        if (c.model != ModelKind::reduced) {
            throw ConfigError("scenario.model", "basin analyses run on the reduced model");
        }
        if (c.params.eps1 != 1.0 || c.params.eps2 != 1.0) {
            throw ConfigError("params.eps1", "basin analyses use the unscaled reduced field; "
                                             "remove eps1/eps2");
        }
        if (c.grid_n < 2) {
            throw ConfigError("basin.grid_n", "grid_n must be >= 2");
        }
    }
    if (a == Analysis::sweep && c.sweep_values.empty()) {
        throw ConfigError("sweep.values", "sweep analysis needs sweep.values");
    }

    if (a == Analysis::control_compare) {
        if (c.policy.kind == PolicyKind::none) {
            throw ConfigError("policy.kind", "control-compare needs a threshold or window policy");
        }
    }
    if (c.policy.kind == PolicyKind::threshold && c.model != ModelKind::full) {
        throw ConfigError("policy.kind",
                          "threshold policies read the infected fraction; use model = full");
    }
}

} // namespace vaxdyn
