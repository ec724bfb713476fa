#include "vaxdyn/basins.hpp"

#include "vaxdyn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace vaxdyn {

namespace {

double rel_err(double a, double b)
{
    const double scale = std::fmax(std::fabs(a), std::fabs(b));
    return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

} // namespace

SaddleClosedForms saddle_closed_forms(const ModelParams& p)
{
    const double c  = p.cost_infection;
    const double vh = p.cost_vacc_high;
    const double vl = p.cost_vacc_low;
    const double th = p.theta;
    const double r  = p.r0;

    const double c2 = c * c;
    const double r2 = r * r;
    const double t2 = th * th;

    // Discriminant polynomial shared by both eigenvalues and eta1.
    const double q = 4 * c2 * r2 - 8 * c2 * r * th - 16 * c2 * r - c2 * vh * t2 -
                     3 * c2 * vh * th - 2 * c2 * vh + c2 * vl * t2 + 3 * c2 * vl * th +
                     2 * c2 * vl + 4 * c2 * t2 + 16 * c2 * th + 16 * c2 - 4 * c * r2 * vh -
                     4 * c * r2 * vl + 4 * c * r * vh * th + 8 * c * r * vh +
                     4 * c * r * vl * th + 8 * c * r * vl + 4 * r2 * vh * vl;
    const double w    = vh * th + 2 * vh - vl * th - 2 * vl;
    const double root = std::sqrt(-(vh - vl) * (th + 1) * (th + 2) * q);

    SaddleClosedForms out{};
    out.lambda_minus_branch = (-c * (th + 1) * w - root) / (2 * r * w);
    out.lambda_plus_branch  = (-c * (th + 1) * w + root) / (2 * r * w);

    const double eta_den =
        c2 * r2 * th + 2 * c2 * r2 - 2 * c2 * r * t2 - 8 * c2 * r * th - 8 * c2 * r +
        c2 * t2 * th + 6 * c2 * t2 + 12 * c2 * th + 8 * c2 - c * r2 * vh * th - 2 * c * r2 * vh -
        c * r2 * vl * th - 2 * c * r2 * vl + c * r * vh * t2 + 4 * c * r * vh * th +
        4 * c * r * vh + c * r * vl * t2 + 4 * c * r * vl * th + 4 * c * r * vl +
        r2 * vh * vl * th + 2 * r2 * vh * vl;
    out.eta1 = -r * (c * (th + 1) * w - root) * (vh * vh - 2 * vh * vl + vl * vl) / (2 * w * eta_den);

    const double g  = 2 + 3 * th + t2;
    const double pk = c * (2 + th - r) + r * vh;
    const double pl = c * (2 + th - r) + r * vl;
    const double inner_k =
        -4 * r2 * vh * vl - 4 * c * (2 + th - r) * r * (vh + vl) +
        c2 * (th * (-16 + 8 * r + 3 * vh - 3 * vl) + t2 * (-4 + vh - vl) -
              2 * (8 - 8 * r + 2 * r2 - vh + vl));
    const double den =
        r * (vh - vl) * (g * c * (vh - vl) + std::sqrt(g * (vh - vl)) * std::sqrt(inner_k));
    out.slope = -(2 * (2 + th) * (2 + th) * pk * pl) / den;

    const double inner_b =
        -g * (vh - vl) *
        (4 * r2 * vh * vl + 4 * c * (2 + th - r) * r * (vh + vl) +
         c2 * (t2 * (4 - vh + vl) + 2 * (8 - 8 * r + 2 * r2 - vh + vl) +
               th * (16 - 8 * r - 3 * vh + 3 * vl)));
    out.intercept = (pl * (4 * r * vh + 6 * th * r * vh + 2 * t2 * r * vh +
                           g * c * (4 + 2 * th - 2 * r - vh + vl) - std::sqrt(inner_b))) /
                    den;
    return out;
}

double ClosedFormAgreement::max() const
{
    return std::max({lambda_neg, lambda_pos, eta1, slope, intercept});
}

Separatrix separatrix_linear(const ModelParams& p)
{
    const std::vector<FixedPoint> fps = enumerate_fixed_points(p);
    const FixedPoint& fp3             = fps[2];
    if (!fp3.exists) {
        throw NoSaddleError("no interior saddle: requires " + fp3.violated_condition);
    }

    Separatrix sep;
    sep.saddle   = fp3.location;
    sep.jacobian = fp3.jacobian;

    Eigen::EigenSolver<Eigen::Matrix2d> es(sep.jacobian);
    const auto ev = es.eigenvalues();
    if (std::fabs(ev(0).imag()) > 0.0 || std::fabs(ev(1).imag()) > 0.0) {
        throw DegenerateSaddleError("saddle eigenvalues are not real");
    }
    const double l0 = ev(0).real();
    const double l1 = ev(1).real();
    if (rel_err(l0, l1) < 1e-12) {
        throw DegenerateSaddleError("saddle has repeated eigenvalues");
    }
    const int ineg = l0 < l1 ? 0 : 1;
    const int ipos = 1 - ineg;
    sep.lambda_neg = ev(ineg).real();
    sep.lambda_pos = ev(ipos).real();
    if (!(sep.lambda_pos > 0.0 && sep.lambda_neg < 0.0)) {
        throw DegenerateSaddleError("interior point is not a saddle");
    }

    auto normalized = [&](int idx) {
        const Eigen::Vector2d v = es.eigenvectors().col(idx).real();
        if (std::fabs(v(1)) < 1e-14 * v.norm()) {
            throw DegenerateSaddleError("eigenvector parallel to the x axis");
        }
        return StateVec<2>{v(0) / v(1), 1.0};
    };
    sep.eigvec_neg = normalized(ineg);
    sep.eigvec_pos = normalized(ipos);
    sep.slope      = 1.0 / sep.eigvec_neg[0];
    sep.intercept  = sep.saddle.n - sep.slope * sep.saddle.x;

    sep.closed_form = saddle_closed_forms(p);
    sep.agreement   = {rel_err(sep.closed_form.lambda_minus_branch, sep.lambda_neg),
                       rel_err(sep.closed_form.lambda_plus_branch, sep.lambda_pos),
                       rel_err(sep.closed_form.eta1, sep.eigvec_pos[0]),
                       rel_err(sep.closed_form.slope, sep.slope),
                       rel_err(sep.closed_form.intercept, sep.intercept)};
    return sep;
}

double area_below_line(double slope, double intercept)
{
    std::vector<double> cuts{0.0, 1.0};
    if (slope != 0.0) {
        for (double level : {0.0, 1.0}) {
            const double x = (level - intercept) / slope;
            if (x > 0.0 && x < 1.0) {
                cuts.push_back(x);
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    // The clipped line is affine on each piece, so the midpoint rule is exact.
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        area += (cuts[k + 1] - cuts[k]) * std::clamp(slope * mid + intercept, 0.0, 1.0);
    }
    return area;
}

std::string to_string(BasinLabel l)
{
    switch (l) {
    case BasinLabel::fp1:
        return "fp1";
    case BasinLabel::fp2:
        return "fp2";
    case BasinLabel::other:
        return "other";
    case BasinLabel::unresolved:
        return "unresolved";
    }
    return "unknown";
}

BasinReport basin_area_grid(const ModelParams& p, int grid_n, const IntegrationConfig& cfg,
                            const BasinOptions& opt)
{
    if (grid_n < 2) {
        throw std::invalid_argument("grid_n must be >= 2");
    }
    cfg.validate();

    BasinReport rep;
    rep.grid_n       = grid_n;
    rep.integration  = cfg;
    rep.classify_tol = opt.classify_tol;
    rep.regime       = classify_regime(p);
    if (!rep.regime.bistable) {
        throw std::invalid_argument("basin analysis requires a bistable regime (case " +
                                    std::to_string(rep.regime.case_id) + ", subcase " +
                                    std::to_string(rep.regime.subcase) + ")");
    }
    rep.separatrix      = separatrix_linear(p);
    rep.area_fp1_linear = area_below_line(rep.separatrix.slope, rep.separatrix.intercept);

    const std::vector<FixedPoint> fps = enumerate_fixed_points(p);
    for (int id : rep.regime.stable_points) {
        rep.attractors.push_back(fps[id - 1]);
    }

    const std::size_t cells = static_cast<std::size_t>(grid_n) * grid_n;
    std::vector<StateVec<2>> starts(cells);
    for (int row = 0; row < grid_n; ++row) {
        for (int col = 0; col < grid_n; ++col) {
            starts[static_cast<std::size_t>(row) * grid_n + col] = {rep.cell_center(col),
                                                                    rep.cell_center(row)};
        }
    }

    unsigned threads = opt.threads != 0 ? opt.threads : std::thread::hardware_concurrency();
    threads          = std::max(1u, threads);
    const std::size_t chunk =
        std::max<std::size_t>(64, cells / (static_cast<std::size_t>(threads) * 8) + 1);

    std::vector<ReducedEndpoint> ends(cells);
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        try {
            for (;;) {
                const std::size_t begin = cursor.fetch_add(chunk);
                if (begin >= cells) {
                    return;
                }
                const std::size_t end = std::min(cells, begin + chunk);
                const auto part = integrate_reduced_endpoints(
                    p, std::span<const StateVec<2>>(starts).subspan(begin, end - begin), cfg);
                std::copy(part.begin(), part.end(), ends.begin() + static_cast<long>(begin));
            }
        }
        catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
            cursor.store(cells);
        }
    };

    if (threads == 1) {
        worker();
    }
    else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    rep.labels.resize(cells);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (std::size_t k = 0; k < cells; ++k) {
        std::optional<std::size_t> hit;
        try {
            hit = classify_endpoint(ends[k].state[0], ends[k].state[1], ends[k].terminal_reason,
                                    rep.attractors, opt.classify_tol);
        }
        catch (const AmbiguousEndpointError& e) {
            throw BasinConfigurationError(std::string("basin classification: ") + e.what());
        }
        BasinLabel label = BasinLabel::unresolved;
        if (hit) {
            const int id = rep.attractors[*hit].id;
            label        = id == 1 ? BasinLabel::fp1 : id == 2 ? BasinLabel::fp2 : BasinLabel::other;
        }
        rep.labels[k] = label;
        ++counts[static_cast<int>(label)];
    }

    const double total = static_cast<double>(cells);
    rep.area_fp1        = static_cast<double>(counts[0]) / total;
    rep.area_fp2        = static_cast<double>(counts[1]) / total;
    rep.area_other      = static_cast<double>(counts[2]) / total;
    rep.area_unresolved = static_cast<double>(counts[3]) / total;

    if (rep.area_unresolved > 1e-3) {
        std::ostringstream os;
        os << counts[3] << " of " << cells << " cells unresolved at t_max = " << cfg.t_max
           << "; increase t_max";
        rep.warnings.push_back(os.str());
    }
    if (rep.separatrix.agreement.max() > 1e-8) {
        std::ostringstream os;
        os << "closed-form saddle quantities disagree with the eigendecomposition (max rel "
           << rep.separatrix.agreement.max() << ")";
        rep.warnings.push_back(os.str());
    }
    return rep;
}

SweepParameter parse_sweep_parameter(const std::string& name)
{
    if (name == "theta") {
        return SweepParameter::theta;
    }
    if (name == "cost_vacc_low") {
        return SweepParameter::cost_vacc_low;
    }
    if (name == "r0") {
        return SweepParameter::r0;
    }
    throw std::invalid_argument("unknown sweep parameter '" + name +
                                "' (expected theta, cost_vacc_low or r0)");
}

std::string to_string(SweepParameter s)
{
    switch (s) {
    case SweepParameter::theta:
        return "theta";
    case SweepParameter::cost_vacc_low:
        return "cost_vacc_low";
    case SweepParameter::r0:
        return "r0";
    }
    return "unknown";
}

ModelParams with_parameter(const ModelParams& p, SweepParameter which, double value)
{
    ModelParams q = p;
    switch (which) {
    case SweepParameter::theta:
        q.theta = value;
        break;
    case SweepParameter::cost_vacc_low:
        q.cost_vacc_low = value;
        break;
    case SweepParameter::r0:
        q.r0 = value;
        break;
    }
    q.validate(ModelKind::reduced);
    return q;
}

std::vector<SweepPoint> basin_area_sweep(const ModelParams& p, SweepParameter which,
                                         const std::vector<double>& values, int grid_n,
                                         const IntegrationConfig& cfg, const BasinOptions& opt)
{
    std::vector<SweepPoint> out;
    out.reserve(values.size());
    for (double v : values) {
        SweepPoint pt;
        pt.value = v;
        try {
            const BasinReport rep = basin_area_grid(with_parameter(p, which, v), grid_n, cfg, opt);
            pt.area_fp1           = rep.area_fp1;
            pt.area_fp1_linear    = rep.area_fp1_linear;
            pt.area_unresolved    = rep.area_unresolved;
        }
        catch (const std::exception& e) {
            pt.error = e.what();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace vaxdyn
