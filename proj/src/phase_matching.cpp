#include "pdcadd/phase_matching.hpp"

#include "pdcadd/errors.hpp"
#include "pdcadd/units.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdcadd {

namespace {

constexpr double theta_step = 0.05 * pi / 180.0;
constexpr int theta_steps = 1800;  // 0 .. 90 deg

template <class F>
double refine(F f, double a, double b, double fa, double fb, double tol) {
    boost::uintmax_t iters = 200;
    auto stop = [tol](double x, double y) { return std::abs(y - x) <= tol; };
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, iters);
    return 0.5 * (r.first + r.second);
}

struct Samples {
    DispersionSample pump, daughter;
};

Samples samples_at(const CrystalModel& c, double pump_nm) {
    return {sample_dispersion(c, pump_nm), sample_dispersion(c, 2.0 * pump_nm)};
}

std::optional<double> pm_residual_at(const Samples& s, PdcType type, const PolarizationRoles& r, double theta_s,
                                     double theta, double* theta_i_out) {
    const double np = s.pump.index(r.pump, theta);
    if (type == PdcType::type_i || theta_s == 0.0) {
        const double ns = s.daughter.index(r.signal, theta);
        const double ni = s.daughter.index(r.idler, theta);
        if (theta_i_out) *theta_i_out = theta_s;
        return 2.0 * np - (ns + ni) * std::cos(theta_s);
    }
    const double ns = s.daughter.index(r.signal, daughter_axis_angle(type, theta, theta_s));
    const double lhs = ns * std::sin(theta_s);
    auto g = [&](double ti) { return lhs - s.daughter.index(r.idler, daughter_axis_angle(type, theta, ti)) * std::sin(ti); };
    const double hi = 0.5 * pi - 1e-9;
    const double g0 = lhs, g1 = g(hi);
    if (!(g0 > 0.0) || !(g1 < 0.0)) return std::nullopt;
    const double ti = refine(g, 0.0, hi, g0, g1, 1e-15);
    if (theta_i_out) *theta_i_out = ti;
    const double ni = s.daughter.index(r.idler, daughter_axis_angle(type, theta, ti));
    return 2.0 * np - ns * std::cos(theta_s) - ni * std::cos(ti);
}

double gvm_residual_at(const Samples& s, PdcType type, const PolarizationRoles& r, double theta_s, double theta) {
    const double kp = s.pump.inverse_group_velocity(r.pump, theta);
    const double ks = s.daughter.inverse_group_velocity(r.signal, daughter_axis_angle(type, theta, theta_s));
    return kp * std::cos(theta_s) - ks;
}

// Bracket on the 0.05 deg grid and refine every sign change.
template <class F>
std::vector<double> grid_roots(F f) {
    std::vector<double> roots;
    std::optional<double> prev;
    for (int k = 0; k <= theta_steps; ++k) {
        const double th = k * theta_step;
        const std::optional<double> v = f(th);
        if (v && *v == 0.0 && k > 0) {
            roots.push_back(th);
        } else if (v && prev && *prev != 0.0 && (*prev < 0.0) != (*v < 0.0)) {
            const double a = (k - 1) * theta_step;
            auto fx = [&](double x) { return f(x).value_or(std::numeric_limits<double>::quiet_NaN()); };
            roots.push_back(refine(fx, a, th, *prev, *v, 1e-13));
        }
        prev = v;
    }
    return roots;
}

std::vector<double> gvm_roots(const Samples& s, PdcType type, const PolarizationRoles& r, double theta_s) {
    return grid_roots([&](double th) -> std::optional<double> { return gvm_residual_at(s, type, r, theta_s, th); });
}

std::vector<PmRoot> pm_roots(const Samples& s, PdcType type, const PolarizationRoles& r, double theta_s) {
    std::vector<PmRoot> out;
    for (double th : grid_roots([&](double t) { return pm_residual_at(s, type, r, theta_s, t, nullptr); })) {
        double ti = 0.0;
        pm_residual_at(s, type, r, theta_s, th, &ti);
        out.push_back({th, ti});
    }
    return out;
}

std::string list_roots(const std::vector<PmRoot>& roots) {
    std::ostringstream os;
    for (size_t j = 0; j < roots.size(); ++j) os << (j ? ", " : "") << rad_to_deg(roots[j].theta) << " deg";
    return os.str();
}

// theta_GVM at lambda, following the branch nearest `guess`
std::optional<double> gvm_angle_near(const CrystalModel& c, PdcType type, const PolarizationRoles& r, double theta_s,
                                     double pump_nm, double guess) {
    const Samples s = samples_at(c, pump_nm);
    auto g = [&](double th) { return gvm_residual_at(s, type, r, theta_s, th); };
    for (double w : {0.2, 1.0, 5.0}) {
        const double a = std::max(0.0, guess - deg_to_rad(w)), b = std::min(0.5 * pi, guess + deg_to_rad(w));
        const double ga = g(a), gb = g(b);
        if (ga == 0.0) return a;
        if (gb == 0.0) return b;
        if ((ga < 0.0) != (gb < 0.0)) return refine(g, a, b, ga, gb, 1e-14);
    }
    const auto roots = gvm_roots(s, type, r, theta_s);
    if (roots.empty()) return std::nullopt;
    return *std::min_element(roots.begin(), roots.end(),
                             [&](double x, double y) { return std::abs(x - guess) < std::abs(y - guess); });
}

}  // namespace

std::string_view to_string(PdcType t) { return t == PdcType::type_i ? "type-I" : "type-II"; }

PdcType parse_pdc_type(std::string_view s) {
    if (s == "I" || s == "type-I" || s == "type_i" || s == "TypeI") return PdcType::type_i;
    if (s == "II" || s == "type-II" || s == "type_ii" || s == "TypeII") return PdcType::type_ii;
    throw Error(Stage::config, ErrorCode::invalid_config, "pdc type must be I or II, got '" + std::string(s) + "'");
}

PolarizationRoles default_roles(const CrystalModel& c, PdcType type) {
    using P = Polarization;
    if (c.sign == OpticalSign::negative)
        return type == PdcType::type_ii ? PolarizationRoles{P::extraordinary, P::ordinary, P::extraordinary}
                                        : PolarizationRoles{P::extraordinary, P::ordinary, P::ordinary};
    return type == PdcType::type_ii ? PolarizationRoles{P::ordinary, P::extraordinary, P::ordinary}
                                    : PolarizationRoles{P::ordinary, P::extraordinary, P::extraordinary};
}

double PdcConfig::omega_p0() const { return omega_from_nm(pump_wavelength_nm); }
double PdcConfig::omega_s0() const { return omega_from_nm(signal_wavelength_nm()); }
double PdcConfig::omega_i0() const { return omega_from_nm(idler_wavelength_nm()); }

void PdcConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(Stage::pm, ErrorCode::invalid_config, what); };
    crystal.validate();
    if (!(pump_wavelength_nm > 0.0) || !crystal.in_range(pump_wavelength_nm) ||
        !crystal.in_range(signal_wavelength_nm())) {
        std::ostringstream os;
        os << "pump " << pump_wavelength_nm << " nm and its degenerate daughters must lie in " << crystal.name
           << "'s validity range";
        throw Error(Stage::pm, ErrorCode::out_of_validity_range, os.str());
    }
    if (!std::isfinite(geometry.theta_s) || geometry.theta_s < 0.0 || geometry.theta_s >= 0.5 * pi)
        fail("signal angle must be in [0, 90) deg");
    if (geometry.is_collinear() && beam_waist) fail("collinear geometry takes no beam waist");
    if (!geometry.is_collinear() && !beam_waist) fail("noncollinear geometry needs a beam waist");
    if (beam_waist && !(*beam_waist > 0.0)) fail("beam waist must be > 0");
    if (!(crystal_length > 0.0)) fail("crystal length must be > 0");
    if (!(pump_sigma > 0.0)) fail("pump width must be > 0");
    if (pump_order < 0) fail("pump order must be >= 0");
    if (!(transverse_scale > 0.0)) fail("transverse_scale must be > 0");
    if (!(cut_angle >= 0.0 && cut_angle <= 0.5 * pi)) fail("cut angle must be in [0, 90] deg");
}

PdcConfig resolve_pdc(const PdcParams& p, const CrystalCatalog& catalog) {
    PdcConfig cfg;
    cfg.crystal = catalog.get(p.crystal);
    cfg.type = p.type;
    cfg.geometry = p.theta_s_deg == 0.0 ? Geometry::collinear() : Geometry::noncollinear(deg_to_rad(p.theta_s_deg));
    cfg.roles = p.roles ? *p.roles : default_roles(cfg.crystal, p.type);
    cfg.pump_wavelength_nm = p.pump_wavelength_nm;
    cfg.pump_sigma = sigma_omega_from_nm(p.pump_sigma_nm, p.pump_wavelength_nm);
    cfg.pump_order = p.pump_order;
    cfg.crystal_length = p.crystal_length_mm * 1e-3;
    if (p.beam_waist_um) cfg.beam_waist = *p.beam_waist_um * 1e-6;
    cfg.transverse_scale = p.transverse_scale;
    if (p.cut_angle_deg) {
        cfg.cut_angle = deg_to_rad(*p.cut_angle_deg);
    } else {
        cfg.validate();  // cut angle not needed yet, range checks first
        const auto roots = find_pm_angles(cfg.crystal, cfg.type, cfg.geometry, cfg.pump_wavelength_nm, cfg.roles);
        if (roots.empty())
            throw Error(Stage::pm, ErrorCode::no_phase_matching,
                        cfg.crystal.name + " at " + std::to_string(cfg.pump_wavelength_nm) + " nm");
        cfg.cut_angle = roots.front().theta;
        if (roots.size() > 1) {
            const auto gvm = find_gvm_angles(cfg.crystal, cfg.type, cfg.geometry, cfg.pump_wavelength_nm, cfg.roles);
            if (gvm.empty())
                throw Error(Stage::pm, ErrorCode::multiple_solutions,
                            "roots " + list_roots(roots) + " and no GVM angle to choose between them");
            const double target = gvm.front();
            cfg.cut_angle = std::min_element(roots.begin(), roots.end(), [&](const PmRoot& a, const PmRoot& b) {
                                return std::abs(a.theta - target) < std::abs(b.theta - target);
                            })->theta;
        }
    }
    cfg.validate();
    return cfg;
}

double daughter_axis_angle(PdcType type, double theta_c, double theta_j) {
    if (type == PdcType::type_i || theta_j == 0.0) return theta_c;
    return std::acos(std::cos(theta_c) * std::cos(theta_j));
}

MismatchComponents mismatch(const PdcConfig& cfg, double omega_s, double omega_i) {
    const auto& c = cfg.crystal;
    const double ts = cfg.geometry.theta_s;
    const double daughter = daughter_axis_angle(cfg.type, cfg.cut_angle, ts);
    const double kp = wavenumber(c, omega_s + omega_i, cfg.roles.pump, cfg.cut_angle);
    const double ks = wavenumber(c, omega_s, cfg.roles.signal, daughter);
    const double ki = wavenumber(c, omega_i, cfg.roles.idler, daughter);
    if (cfg.geometry.is_collinear()) return {kp - ks - ki, 0.0};
    return {kp - (ks + ki) * std::cos(ts), (ki - ks) * std::sin(ts)};
}

std::optional<double> pm_residual(const CrystalModel& c, PdcType type, const PolarizationRoles& roles, Geometry g,
                                  double pump_nm, double theta, double* theta_i) {
    return pm_residual_at(samples_at(c, pump_nm), type, roles, g.theta_s, theta, theta_i);
}

double gvm_residual(const CrystalModel& c, PdcType type, const PolarizationRoles& roles, Geometry g, double pump_nm,
                    double theta) {
    return gvm_residual_at(samples_at(c, pump_nm), type, roles, g.theta_s, theta);
}

std::vector<PmRoot> find_pm_angles(const CrystalModel& c, PdcType type, Geometry g, double pump_nm,
                                   const PolarizationRoles& roles) {
    return pm_roots(samples_at(c, pump_nm), type, roles, g.theta_s);
}

std::vector<PmRoot> find_pm_angles(const CrystalModel& c, PdcType type, Geometry g, double pump_nm) {
    return find_pm_angles(c, type, g, pump_nm, default_roles(c, type));
}

double find_pm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm, const PolarizationRoles& roles) {
    const auto roots = find_pm_angles(c, type, g, pump_nm, roles);
    if (roots.empty())
        throw Error(Stage::pm, ErrorCode::no_phase_matching,
                    c.name + " " + std::string(to_string(type)) + " at " + std::to_string(pump_nm) + " nm");
    if (roots.size() > 1) throw Error(Stage::pm, ErrorCode::multiple_solutions, "roots " + list_roots(roots));
    return roots.front().theta;
}

double find_pm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm) {
    return find_pm_angle(c, type, g, pump_nm, default_roles(c, type));
}

std::vector<double> find_gvm_angles(const CrystalModel& c, PdcType type, Geometry g, double pump_nm,
                                    const PolarizationRoles& roles) {
    return gvm_roots(samples_at(c, pump_nm), type, roles, g.theta_s);
}

double find_gvm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm, const PolarizationRoles& roles) {
    const auto roots = find_gvm_angles(c, type, g, pump_nm, roles);
    if (roots.empty())
        throw Error(Stage::pm, ErrorCode::no_gvm_angle,
                    c.name + " " + std::string(to_string(type)) + " with " + std::string(to_string(roles.signal)) +
                        " signal at " + std::to_string(pump_nm) + " nm");
    return roots.front();
}

double find_gvm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm) {
    return find_gvm_angle(c, type, g, pump_nm, default_roles(c, type));
}

std::pair<double, double> pump_window_nm(const CrystalModel& c) {
    return {c.range_lo_um * 1e3, 0.5 * c.range_hi_um * 1e3};
}

GvmSolution find_gvm_wavelength(const CrystalModel& c, PdcType type, double theta_s, const PolarizationRoles& roles,
                                double lo_nm, double hi_nm) {
    GvmSolution sol;
    sol.theta_s = theta_s;
    const auto [wlo, whi] = pump_window_nm(c);
    const int first = static_cast<int>(std::ceil(std::max(lo_nm, wlo)));
    const int last = static_cast<int>(std::floor(std::min(hi_nm, whi)));

    // PM residual along the GVM curve; its sign changes where the two curves cross
    struct Point {
        double nm, theta, f;
    };
    std::vector<std::pair<Point, Point>> brackets;
    std::optional<Point> prev;
    std::optional<double> branch;
    for (int l = first; l <= last; ++l) {
        const Samples s = samples_at(c, l);
        const auto roots = gvm_roots(s, type, roles, theta_s);
        std::optional<Point> cur;
        if (!roots.empty()) {
            double th = roots.front();
            if (branch)
                th = *std::min_element(roots.begin(), roots.end(),
                                       [&](double x, double y) { return std::abs(x - *branch) < std::abs(y - *branch); });
            if (auto f = pm_residual_at(s, type, roles, theta_s, th, nullptr)) cur = Point{double(l), th, *f};
            branch = th;
        } else {
            branch.reset();
        }
        if (cur && prev && (cur->f < 0.0) != (prev->f < 0.0) && std::abs(cur->theta - prev->theta) < deg_to_rad(2.0))
            brackets.push_back({*prev, *cur});
        if (cur && cur->f == 0.0) brackets.push_back({*cur, *cur});
        prev = cur;
    }
    sol.crossings = static_cast<int>(brackets.size());
    if (brackets.empty()) return sol;

    const auto [a, b] = brackets.front();
    double guess = a.theta;
    auto F = [&](double nm) {
        const auto th = gvm_angle_near(c, type, roles, theta_s, nm, guess);
        if (!th) return std::numeric_limits<double>::quiet_NaN();
        guess = *th;
        return pm_residual_at(samples_at(c, nm), type, roles, theta_s, *th, nullptr)
            .value_or(std::numeric_limits<double>::quiet_NaN());
    };
    const double nm = a.nm == b.nm ? a.nm : refine(F, a.nm, b.nm, a.f, b.f, 1e-10);
    const auto th = gvm_angle_near(c, type, roles, theta_s, nm, guess);
    if (!th) return sol;
    double ti = 0.0;
    const Samples s = samples_at(c, nm);
    const auto res = pm_residual_at(s, type, roles, theta_s, *th, &ti);
    if (!res) return sol;
    sol.status = GvmStatus::found;
    sol.lambda_gvm_nm = nm;
    sol.theta_gvm = *th;
    sol.theta_i = ti;
    sol.residual_pm = *res;
    sol.residual_gvm = gvm_residual_at(s, type, roles, theta_s, *th);
    return sol;
}

GvmSolution find_gvm_wavelength(const CrystalModel& c, PdcType type, double theta_s, const PolarizationRoles& roles) {
    const auto [lo, hi] = pump_window_nm(c);
    return find_gvm_wavelength(c, type, theta_s, roles, lo, hi);
}

GvmSolution find_gvm_wavelength(const CrystalModel& c, PdcType type, double theta_s) {
    return find_gvm_wavelength(c, type, theta_s, default_roles(c, type));
}

std::vector<GvmSolution> gvm_scan(const CrystalModel& c, PdcType type, std::span<const double> theta_s,
                                  const PolarizationRoles& roles) {
    std::vector<GvmSolution> out(theta_s.size());
    const long n = static_cast<long>(theta_s.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < n; ++j) {
        try {
            out[j] = find_gvm_wavelength(c, type, theta_s[j], roles);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<GvmSolution> gvm_scan(const CrystalModel& c, PdcType type, std::span<const double> theta_s) {
    return gvm_scan(c, type, theta_s, default_roles(c, type));
}

std::vector<CurveSample> sample_curves(const CrystalModel& c, PdcType type, Geometry g, const PolarizationRoles& roles,
                                       double lo_nm, double hi_nm, double step_nm) {
    std::vector<CurveSample> out;
    const auto [wlo, whi] = pump_window_nm(c);
    lo_nm = std::max(lo_nm, wlo);
    hi_nm = std::min(hi_nm, whi);
    for (int j = 0;; ++j) {
        const double nm = lo_nm + j * step_nm;
        if (nm > hi_nm + 1e-9) break;
        const Samples s = samples_at(c, nm);
        CurveSample cs{nm, std::nullopt, std::nullopt};
        const auto gv = gvm_roots(s, type, roles, g.theta_s);
        if (!gv.empty()) cs.theta_gvm = gv.front();
        const auto pm = pm_roots(s, type, roles, g.theta_s);
        if (!pm.empty()) {
            const double target = cs.theta_gvm.value_or(pm.front().theta);
            cs.theta_pm = std::min_element(pm.begin(), pm.end(), [&](const PmRoot& x, const PmRoot& y) {
                              return std::abs(x.theta - target) < std::abs(y.theta - target);
                          })->theta;
        }
        out.push_back(cs);
    }
    return out;
}

namespace reference {

std::vector<GvmSolution> gvm_scan_serial(const CrystalModel& c, PdcType type, std::span<const double> theta_s,
                                         const PolarizationRoles& roles) {
    std::vector<GvmSolution> out;
    out.reserve(theta_s.size());
    std::optional<double> seed;
    for (double ts : theta_s) {
        GvmSolution s;
        if (seed) s = find_gvm_wavelength(c, type, ts, roles, *seed - 40.0, *seed + 40.0);
        if (!s.found()) s = find_gvm_wavelength(c, type, ts, roles);
        if (s.found()) seed = s.lambda_gvm_nm;
        else seed.reset();
        out.push_back(s);
    }
    return out;
}

}  // namespace reference

}  // namespace pdcadd
