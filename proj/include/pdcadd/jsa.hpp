#pragma once

#include "pdcadd/phase_matching.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

namespace pdcadd {

struct FrequencyGrid {
    std::vector<double> signal;  // rad/s
    std::vector<double> idler;   // rad/s
    double d_signal = 0.0;
    double d_idler = 0.0;
    double center_s = 0.0;
    double center_i = 0.0;

    int n() const { return static_cast<int>(signal.size()); }
    int m() const { return static_cast<int>(idler.size()); }

    // n points over [center - half, center + half] per axis
    static FrequencyGrid centered(double omega_s0, double omega_i0, int n, int m, double half_span_s,
                                  double half_span_i);
    void validate() const;
};

// Default grid: +/- span_sigma * sigma per axis. Noncollinear configs widen an
// axis when needed so it covers three transverse phasematching widths.
FrequencyGrid make_grid(const PdcConfig& config, int n = 512, int m = 512, double span_sigma = 5.0);

enum class PmModel { sinc, gaussian };

std::string_view to_string(PmModel m);
PmModel parse_pm_model(std::string_view s);

struct JsaGrid {
    FrequencyGrid grid;
    Eigen::MatrixXcd amplitude;     // [signal, idler]
    double retained_fraction = 1.0; // of |R|^2, after filters

    double norm() const;  // sum |R|^2 dws dwi
};

struct FilterSpec {
    std::optional<double> center_nm;  // degenerate idler wavelength if unset
    double width_nm = 0.0;

    bool operator==(const FilterSpec&) const = default;
};

// Normalized Hermite-Gauss function psi_n(x).
double hermite_function(int order, double x);

// psi_order((omega - omega_p0)/sigma)/sqrt(sigma); real-valued.
double pump_spectrum(int order, double sigma, double omega_p0, double omega);

std::complex<double> phasematching_function(const PdcConfig& config, double omega_s, double omega_i, PmModel model);

JsaGrid build_jsa(const PdcConfig& config, const FrequencyGrid& grid, PmModel model);

// k' of the three waves at the central wavelengths, s/m
struct LinearDispersion {
    double pump = 0.0;
    double signal = 0.0;
    double idler = 0.0;
};

LinearDispersion linear_dispersion(const PdcConfig& config);

// First-order Taylor JSA with the Gaussian phasematching surrogate, perfect
// phasematching at the grid center.
JsaGrid build_gaussian_jsa(double sigma, double length_m, const LinearDispersion& kp, const FrequencyGrid& grid,
                           int pump_order = 0);

JsaGrid apply_idler_filter(const JsaGrid& jsa, const FilterSpec& filter);

struct JsaMoments {
    double mean_s = 0.0;  // offset from grid center, rad/s
    double mean_i = 0.0;
    double std_s = 0.0;
    double std_i = 0.0;
};

JsaMoments moments(const JsaGrid& jsa);

namespace reference {
// Point-by-point construction through phasematching_function.
JsaGrid build_jsa_serial(const PdcConfig& config, const FrequencyGrid& grid, PmModel model);
}  // namespace reference

}  // namespace pdcadd
