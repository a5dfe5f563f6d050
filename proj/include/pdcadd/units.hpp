#pragma once

#include <numbers>

namespace pdcadd {

inline constexpr double c_light = 299792458.0;  // m/s
inline constexpr double pi = std::numbers::pi;

// Gaussian surrogate of sinc(x): exp(-gamma x^2) with the same FWHM.
inline constexpr double gamma_sinc = 0.193;

constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

// vacuum wavelength (nm) <-> angular frequency (rad/s)
constexpr double omega_from_nm(double nm) { return 2.0 * pi * c_light / (nm * 1e-9); }
constexpr double nm_from_omega(double omega) { return 2.0 * pi * c_light / omega * 1e9; }

// Width sigma_lambda (nm) around lambda0 (nm) to sigma_omega (rad/s).
constexpr double sigma_omega_from_nm(double sigma_nm, double lambda0_nm) {
    return 2.0 * pi * c_light * (sigma_nm * 1e-9) / ((lambda0_nm * 1e-9) * (lambda0_nm * 1e-9));
}
constexpr double sigma_nm_from_omega(double sigma_omega, double lambda0_nm) {
    return sigma_omega * (lambda0_nm * 1e-9) * (lambda0_nm * 1e-9) / (2.0 * pi * c_light) * 1e9;
}

}  // namespace pdcadd
