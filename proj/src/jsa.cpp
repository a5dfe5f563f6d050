#include "pdcadd/jsa.hpp"

#include "pdcadd/errors.hpp"
#include "pdcadd/units.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdcadd {

namespace {

double pm_shape(double x, PmModel model) {
    if (model == PmModel::gaussian) return std::exp(-gamma_sinc * x * x);
    return x == 0.0 ? 1.0 : std::sin(x) / x;
}

int half_max_count(const auto& values) {
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, v);
    int n = 0;
    for (double v : values) n += v >= 0.5 * peak;
    return n;
}

void require_resolved(int points, const char* what, const char* axis) {
    if (points < 8) {
        std::ostringstream os;
        os << what << " FWHM spans " << points << " points along the " << axis << " axis (need >= 8)";
        throw Error(Stage::jsa, ErrorCode::grid_too_coarse, os.str());
    }
}

// Resolution checks, then the sum |R|^2 dw dw = 1 normalization.
void finish(JsaGrid& out, const Eigen::MatrixXd& phi_abs, int pump_order, double sigma, double omega_p0) {
    const auto& g = out.grid;
    std::vector<double> line(g.signal.size());
    for (size_t j = 0; j < line.size(); ++j)
        line[j] = std::abs(pump_spectrum(pump_order, sigma, omega_p0, g.signal[j] + g.center_i));
    require_resolved(half_max_count(line), "pump", "signal");
    line.resize(g.idler.size());
    for (size_t k = 0; k < line.size(); ++k)
        line[k] = std::abs(pump_spectrum(pump_order, sigma, omega_p0, g.center_s + g.idler[k]));
    require_resolved(half_max_count(line), "pump", "idler");

    Eigen::Index jr = 0, kr = 0;
    phi_abs.maxCoeff(&jr, &kr);
    const Eigen::VectorXd row = phi_abs.row(jr).transpose(), col = phi_abs.col(kr);
    require_resolved(half_max_count(std::vector<double>(row.data(), row.data() + row.size())), "phasematching", "idler");
    require_resolved(half_max_count(std::vector<double>(col.data(), col.data() + col.size())), "phasematching", "signal");

    const double nrm = out.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm))
        throw Error(Stage::jsa, ErrorCode::degenerate_grid, "JSA vanishes on the grid (norm " + std::to_string(nrm) + ")");
    out.amplitude /= std::sqrt(nrm);
}

void check_grid_in_range(const PdcConfig& cfg, const FrequencyGrid& g) {
    const auto& c = cfg.crystal;
    const double ws[2] = {g.signal.front(), g.signal.back()};
    const double wi[2] = {g.idler.front(), g.idler.back()};
    for (double w : ws) wavenumber(c, w, cfg.roles.signal, cfg.cut_angle);
    for (double w : wi) wavenumber(c, w, cfg.roles.idler, cfg.cut_angle);
    for (double a : ws)
        for (double b : wi) wavenumber(c, a + b, cfg.roles.pump, cfg.cut_angle);
}

}  // namespace

FrequencyGrid FrequencyGrid::centered(double omega_s0, double omega_i0, int n, int m, double half_s, double half_i) {
    FrequencyGrid g;
    g.center_s = omega_s0;
    g.center_i = omega_i0;
    if (n >= 2 && m >= 2) {
        g.d_signal = 2.0 * half_s / (n - 1);
        g.d_idler = 2.0 * half_i / (m - 1);
        for (int j = 0; j < n; ++j) g.signal.push_back(omega_s0 + (j - 0.5 * (n - 1)) * g.d_signal);
        for (int k = 0; k < m; ++k) g.idler.push_back(omega_i0 + (k - 0.5 * (m - 1)) * g.d_idler);
    }
    g.validate();
    return g;
}

void FrequencyGrid::validate() const {
    if (signal.size() < 16 || idler.size() < 16)
        throw Error(Stage::jsa, ErrorCode::invalid_config, "grid needs N, M >= 16");
    if (!(d_signal > 0.0) || !(d_idler > 0.0)) throw Error(Stage::jsa, ErrorCode::invalid_config, "grid span must be > 0");
    if (signal.front() <= 0.0 || idler.front() <= 0.0)
        throw Error(Stage::jsa, ErrorCode::invalid_config, "grid reaches non-positive frequencies");
}

FrequencyGrid make_grid(const PdcConfig& cfg, int n, int m, double span_sigma) {
    if (!(span_sigma > 0.0)) throw Error(Stage::jsa, ErrorCode::invalid_config, "span must be > 0");
    double half_s = span_sigma * cfg.pump_sigma, half_i = half_s;
    if (!cfg.geometry.is_collinear() && cfg.beam_waist) {
        const LinearDispersion kp = linear_dispersion(cfg);
        const double w = cfg.transverse_scale * *cfg.beam_waist;
        const double st = std::sin(cfg.geometry.theta_s);
        // amplitude std of exp(-gamma w^2 dk^2/4) along each axis
        auto width = [&](double slope) { return std::sqrt(2.0) / (w * std::sqrt(gamma_sinc) * std::abs(slope)); };
        half_s = std::max(half_s, 3.0 * width(kp.signal * st));
        half_i = std::max(half_i, 3.0 * width(kp.idler * st));
    }
    return FrequencyGrid::centered(cfg.omega_s0(), cfg.omega_i0(), n, m, half_s, half_i);
}

std::string_view to_string(PmModel m) { return m == PmModel::sinc ? "sinc" : "gaussian"; }

PmModel parse_pm_model(std::string_view s) {
    if (s == "sinc") return PmModel::sinc;
    if (s == "gaussian") return PmModel::gaussian;
    throw Error(Stage::config, ErrorCode::invalid_config, "model must be sinc or gaussian, got '" + std::string(s) + "'");
}

double JsaGrid::norm() const { return amplitude.squaredNorm() * grid.d_signal * grid.d_idler; }

double hermite_function(int order, double x) {
    double prev = 0.0;
    double cur = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    for (int n = 0; n < order; ++n) {
        const double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(double(n) / (n + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double pump_spectrum(int order, double sigma, double omega_p0, double omega) {
    return hermite_function(order, (omega - omega_p0) / sigma) / std::sqrt(sigma);
}

std::complex<double> phasematching_function(const PdcConfig& cfg, double omega_s, double omega_i, PmModel model) {
    const MismatchComponents dk = mismatch(cfg, omega_s, omega_i);
    const double phi_z = pm_shape(0.5 * dk.longitudinal * cfg.crystal_length, model);
    if (cfg.geometry.is_collinear()) return phi_z;
    const double w = cfg.transverse_scale * cfg.beam_waist.value_or(0.0);
    return phi_z * std::exp(-0.25 * gamma_sinc * dk.transverse * dk.transverse * w * w);
}

JsaGrid build_jsa(const PdcConfig& cfg, const FrequencyGrid& grid, PmModel model) {
    cfg.validate();
    grid.validate();
    check_grid_in_range(cfg, grid);
    const auto& c = cfg.crystal;
    const int n = grid.n(), m = grid.m();
    const double ts = cfg.geometry.theta_s;
    const bool collinear = cfg.geometry.is_collinear();
    const double daughter = daughter_axis_angle(cfg.type, cfg.cut_angle, ts);
    const double cs = std::cos(ts), sn = std::sin(ts);
    const double L = cfg.crystal_length;
    const double w = cfg.transverse_scale * cfg.beam_waist.value_or(0.0);
    const double wp0 = cfg.omega_p0();

    std::vector<double> ks(n), ki(m);
    for (int j = 0; j < n; ++j) ks[j] = wavenumber(c, grid.signal[j], cfg.roles.signal, daughter);
    for (int k = 0; k < m; ++k) ki[k] = wavenumber(c, grid.idler[k], cfg.roles.idler, daughter);

    JsaGrid out;
    out.grid = grid;
    out.amplitude.resize(n, m);
    Eigen::MatrixXd phi_abs(n, m);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < m; ++k) {
            const double wp = grid.signal[j] + grid.idler[k];
            const double kp = wavenumber(c, wp, cfg.roles.pump, cfg.cut_angle);
            double phi;
            if (collinear) {
                phi = pm_shape(0.5 * (kp - ks[j] - ki[k]) * L, model);
            } else {
                const double dz = kp - (ks[j] + ki[k]) * cs;
                const double dt = (ki[k] - ks[j]) * sn;
                phi = pm_shape(0.5 * dz * L, model) * std::exp(-0.25 * gamma_sinc * dt * dt * w * w);
            }
            phi_abs(j, k) = std::abs(phi);
            out.amplitude(j, k) = pump_spectrum(cfg.pump_order, cfg.pump_sigma, wp0, wp) * phi;
        }
    }
    finish(out, phi_abs, cfg.pump_order, cfg.pump_sigma, wp0);
    return out;
}

LinearDispersion linear_dispersion(const PdcConfig& cfg) {
    const auto& c = cfg.crystal;
    const double daughter = daughter_axis_angle(cfg.type, cfg.cut_angle, cfg.geometry.theta_s);
    return {inverse_group_velocity(c, cfg.pump_wavelength_nm, cfg.roles.pump, cfg.cut_angle).value,
            inverse_group_velocity(c, cfg.signal_wavelength_nm(), cfg.roles.signal, daughter).value,
            inverse_group_velocity(c, cfg.idler_wavelength_nm(), cfg.roles.idler, daughter).value};
}

JsaGrid build_gaussian_jsa(double sigma, double L, const LinearDispersion& kp, const FrequencyGrid& grid,
                           int pump_order) {
    grid.validate();
    if (!(sigma > 0.0) || !(L >= 0.0)) throw Error(Stage::jsa, ErrorCode::invalid_config, "need sigma > 0, L >= 0");
    const int n = grid.n(), m = grid.m();
    const double as = kp.pump - kp.signal, ai = kp.pump - kp.idler;
    JsaGrid out;
    out.grid = grid;
    out.amplitude.resize(n, m);
    Eigen::MatrixXd phi_abs(n, m);
    const double wp0 = grid.center_s + grid.center_i;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        const double es = grid.signal[j] - grid.center_s;
        for (int k = 0; k < m; ++k) {
            const double ei = grid.idler[k] - grid.center_i;
            const double x = 0.5 * L * (as * es + ai * ei);
            const double phi = std::exp(-gamma_sinc * x * x);
            phi_abs(j, k) = phi;
            out.amplitude(j, k) = pump_spectrum(pump_order, sigma, wp0, grid.signal[j] + grid.idler[k]) * phi;
        }
    }
    finish(out, phi_abs, pump_order, sigma, wp0);
    return out;
}

JsaGrid apply_idler_filter(const JsaGrid& jsa, const FilterSpec& filter) {
    if (!(filter.width_nm > 0.0)) throw Error(Stage::jsa, ErrorCode::invalid_config, "filter width must be > 0");
    const double center = filter.center_nm.value_or(nm_from_omega(jsa.grid.center_i));
    JsaGrid out = jsa;
    int kept = 0;
    for (int k = 0; k < jsa.grid.m(); ++k) {
        const double nm = nm_from_omega(jsa.grid.idler[k]);
        if (std::abs(nm - center) <= 0.5 * filter.width_nm) ++kept;
        else out.amplitude.col(k).setZero();
    }
    const double before = jsa.norm(), after = out.norm();
    if (kept == 0 || !(after > 0.0)) {
        std::ostringstream os;
        os << "idler band " << center << " +/- " << 0.5 * filter.width_nm << " nm leaves nothing on the grid";
        throw Error(Stage::jsa, ErrorCode::empty_filter, os.str());
    }
    out.amplitude /= std::sqrt(after);
    out.retained_fraction = jsa.retained_fraction * after / before;
    return out;
}

JsaMoments moments(const JsaGrid& jsa) {
    const auto& g = jsa.grid;
    double w = 0.0, ms = 0.0, mi = 0.0, ss = 0.0, si = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        const double es = g.signal[j] - g.center_s;
        for (int k = 0; k < g.m(); ++k) {
            const double ei = g.idler[k] - g.center_i;
            const double p = std::norm(jsa.amplitude(j, k));
            w += p;
            ms += p * es;
            mi += p * ei;
            ss += p * es * es;
            si += p * ei * ei;
        }
    }
    JsaMoments out;
    out.mean_s = ms / w;
    out.mean_i = mi / w;
    out.std_s = std::sqrt(std::max(0.0, ss / w - out.mean_s * out.mean_s));
    out.std_i = std::sqrt(std::max(0.0, si / w - out.mean_i * out.mean_i));
    return out;
}

namespace reference {

JsaGrid build_jsa_serial(const PdcConfig& cfg, const FrequencyGrid& grid, PmModel model) {
    cfg.validate();
    grid.validate();
    JsaGrid out;
    out.grid = grid;
    out.amplitude.resize(grid.n(), grid.m());
    Eigen::MatrixXd phi_abs(grid.n(), grid.m());
    const double wp0 = cfg.omega_p0();
    for (int j = 0; j < grid.n(); ++j) {
        for (int k = 0; k < grid.m(); ++k) {
            const std::complex<double> phi = phasematching_function(cfg, grid.signal[j], grid.idler[k], model);
            phi_abs(j, k) = std::abs(phi);
            out.amplitude(j, k) = pump_spectrum(cfg.pump_order, cfg.pump_sigma, wp0, grid.signal[j] + grid.idler[k]) * phi;
        }
    }
    finish(out, phi_abs, cfg.pump_order, cfg.pump_sigma, wp0);
    return out;
}

}  // namespace reference

}  // namespace pdcadd
