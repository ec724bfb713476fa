#include "vaxdyn/equilibria.hpp"

#include "vaxdyn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vaxdyn {

std::string to_string(Stability s)
{
    switch (s) {
    case Stability::stable:
        return "stable";
    case Stability::unstable:
        return "unstable";
    case Stability::saddle:
        return "saddle";
    case Stability::nonhyperbolic:
        return "nonhyperbolic";
    }
    return "unknown";
}

namespace {

bool near(double a, double b)
{
    return std::fabs(a - b) <= 1e-12 * std::fmax(1.0, std::fmax(std::fabs(a), std::fabs(b)));
}

void reject_boundary(double r0, double threshold, const char* name)
{
    if (near(r0, threshold)) {
        std::ostringstream os;
        os.precision(17);
        os << "R0 = " << r0 << " lies on the regime boundary " << name << " = " << threshold
           << "; perturb R0";
        throw BoundaryRegimeError(os.str());
    }
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace

RegimeThresholds regime_thresholds(const ModelParams& p)
{
    const double c = p.cost_infection;
    return {c / (c - p.cost_vacc_low), c / (c - p.cost_vacc_high),
            (2.0 + p.theta) * c / (c - p.cost_vacc_low),
            (2.0 + p.theta) * c / (c - p.cost_vacc_high)};
}

Eigen::Matrix2d jacobian_reduced(const ReducedState& point, const ModelParams& p)
{
    const double x  = point.x;
    const double n  = point.n;
    const double c  = p.cost_infection;
    const double vh = p.cost_vacc_high;
    const double vl = p.cost_vacc_low;
    const double th = p.theta;

    Eigen::Matrix2d j;
    if (x < 1.0 - 1.0 / p.r0) {
        j(0, 0) = c * (1.0 - 1.0 / p.r0 - 2.0 * x) + (n * (vh - vl) + vl) * (-1.0 + 2.0 * x);
    }
    else {
        j(0, 0) = (n * (vh - vl) + vl) * (-1.0 + 2.0 * x);
    }
    j(0, 1) = x * (vh - vl) * (x - 1.0);
    j(1, 0) = n * (th + 2.0) * (n - 1.0);
    j(1, 1) = (-1.0 + 2.0 * n) * (-1.0 - th + 2.0 * x + th * x);
    return j;
}

std::array<std::complex<double>, 2> eigenvalues_2x2(const Eigen::Matrix2d& j)
{
    Eigen::EigenSolver<Eigen::Matrix2d> es(j, false);
    std::array<std::complex<double>, 2> ev{es.eigenvalues()(0), es.eigenvalues()(1)};
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    return ev;
}

Stability classify_eigenvalues(const std::array<std::complex<double>, 2>& ev,
                               const Eigen::Matrix2d& j)
{
    const double scale = std::fmax(1.0, j.cwiseAbs().maxCoeff());
    const double zero  = 1e-12 * scale;
    int neg = 0;
    int pos = 0;
    for (const auto& e : ev) {
        if (std::fabs(e.real()) <= zero) {
            return Stability::nonhyperbolic;
        }
        (e.real() < 0.0 ? neg : pos)++;
    }
    if (neg == 2) {
        return Stability::stable;
    }
    if (pos == 2) {
        return Stability::unstable;
    }
    return Stability::saddle;
}

Stability classify_fixed_point(const FixedPoint& fp)
{
    if (!fp.exists) {
        throw std::invalid_argument("cannot classify nonexistent fixed point " +
                                    std::to_string(fp.id) + ": " + fp.violated_condition);
    }
    return classify_eigenvalues(fp.eigenvalues, fp.jacobian);
}

std::vector<FixedPoint> enumerate_fixed_points(const ModelParams& p)
{
    const double c  = p.cost_infection;
    const double vh = p.cost_vacc_high;
    const double vl = p.cost_vacc_low;
    const double th = p.theta;
    const double r0 = p.r0;
    if (vh == vl) {
        throw DegenerateParameterError("V_H == V_L: interior fixed point undefined");
    }
    const RegimeThresholds t = regime_thresholds(p);
    reject_boundary(r0, t.fp1_exists, "C/(C-V_L)");
    reject_boundary(r0, t.fp2_exists, "C/(C-V_H)");
    reject_boundary(r0, t.saddle_lo, "(2+theta)C/(C-V_L)");
    reject_boundary(r0, t.saddle_hi, "(2+theta)C/(C-V_H)");

    std::vector<FixedPoint> fps(7);
    for (int k = 0; k < 7; ++k) {
        fps[k].id = k + 1;
    }

    fps[0].location = {1.0 - c / (r0 * (c - vl)), 0.0};
    fps[0].exists   = r0 > t.fp1_exists;
    if (!fps[0].exists) {
        fps[0].violated_condition = "R0 > C/(C-V_L) = " + fmt(t.fp1_exists);
    }

    fps[1].location = {1.0 - c / (r0 * (c - vh)), 1.0};
    fps[1].exists   = r0 > t.fp2_exists;
    if (!fps[1].exists) {
        fps[1].violated_condition = "R0 > C/(C-V_H) = " + fmt(t.fp2_exists);
    }

    fps[2].location = {(th + 1.0) / (th + 2.0), -(c * (2.0 - r0 + th) + r0 * vl) / (r0 * (vh - vl))};
    fps[2].exists   = t.saddle_lo < r0 && r0 < t.saddle_hi;
    if (!fps[2].exists) {
        fps[2].violated_condition = fmt(t.saddle_lo) + " < R0 < " + fmt(t.saddle_hi);
    }

    fps[3].location = {0.0, 0.0};
    fps[4].location = {0.0, 1.0};
    fps[5].location = {1.0, 0.0};
    fps[6].location = {1.0, 1.0};
    for (int k = 3; k < 7; ++k) {
        fps[k].exists = true;
    }

    for (auto& fp : fps) {
        if (!fp.exists) {
            continue;
        }
        fp.jacobian       = jacobian_reduced(fp.location, p);
        fp.eigenvalues    = eigenvalues_2x2(fp.jacobian);
        fp.classification = classify_eigenvalues(fp.eigenvalues, fp.jacobian);
    }

    // The closed-form taxonomy calls every corner except (0,1) unstable. Where
    // the eigenvalues say saddle, keep the eigen label and say so.
    for (int k : {3, 5, 6}) {
        if (fps[k].classification == Stability::saddle) {
            fps[k].note = "closed-form taxonomy lists this corner as unstable; "
                          "eigenvalues have opposite signs (saddle)";
        }
    }
    if (fps[2].exists && fps[2].classification != Stability::saddle) {
        fps[2].note = "interior point expected to be a saddle";
    }
    return fps;
}

RegimeReport classify_regime(const ModelParams& p)
{
    const RegimeThresholds t = regime_thresholds(p);
    const double r0          = p.r0;
    if (near(t.saddle_lo, t.fp2_exists)) {
        throw BoundaryRegimeError("(2+theta)C/(C-V_L) equals C/(C-V_H): case undetermined");
    }
    reject_boundary(r0, t.fp1_exists, "C/(C-V_L)");
    reject_boundary(r0, t.fp2_exists, "C/(C-V_H)");
    reject_boundary(r0, t.saddle_lo, "(2+theta)C/(C-V_L)");
    reject_boundary(r0, t.saddle_hi, "(2+theta)C/(C-V_H)");

    RegimeReport rep;
    rep.thresholds = t;
    rep.case_id    = t.saddle_lo > t.fp2_exists ? 1 : 2;

    // Ladders of increasing R0 thresholds and the stable set of each interval.
    std::array<double, 4> ladder;
    std::array<std::vector<int>, 5> stable;
    if (rep.case_id == 1) {
        ladder = {t.fp1_exists, t.fp2_exists, t.saddle_lo, t.saddle_hi};
        stable = {std::vector<int>{5}, {5}, {2}, {1, 2}, {1}};
    }
    else {
        ladder = {t.fp1_exists, t.saddle_lo, t.fp2_exists, t.saddle_hi};
        stable = {std::vector<int>{5}, {5}, {1, 5}, {1, 2}, {1}};
    }
    int sub = 1;
    for (double edge : ladder) {
        if (r0 > edge) {
            ++sub;
        }
    }
    rep.subcase       = sub;
    rep.stable_points = stable[sub - 1];
    rep.bistable      = rep.stable_points.size() == 2;
    return rep;
}

std::vector<int> eigen_stable_ids(const std::vector<FixedPoint>& fps)
{
    std::vector<int> ids;
    for (const auto& fp : fps) {
        if (fp.exists && fp.classification == Stability::stable) {
            ids.push_back(fp.id);
        }
    }
    return ids;
}

} // namespace vaxdyn
