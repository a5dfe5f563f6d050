#pragma once

#include "pdcadd/crystal.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pdcadd {

enum class PdcType { type_i, type_ii };

std::string_view to_string(PdcType t);
PdcType parse_pdc_type(std::string_view s);

// Internal signal angle from the pump. Zero means collinear.
struct Geometry {
    double theta_s = 0.0;

    static Geometry collinear() { return {}; }
    static Geometry noncollinear(double theta_s) { return {theta_s}; }
    bool is_collinear() const { return theta_s == 0.0; }
};

struct PolarizationRoles {
    Polarization pump = Polarization::extraordinary;
    Polarization signal = Polarization::ordinary;
    Polarization idler = Polarization::extraordinary;

    bool operator==(const PolarizationRoles&) const = default;
};

// Negative crystals: e -> o + e (II), e -> o + o (I). Positive crystals
// mirror the assignment so that phase matching exists at all.
PolarizationRoles default_roles(const CrystalModel& c, PdcType type);

// Degenerate PDC scenario in SI units. Build it with resolve_pdc() from
// interface units, or fill it directly and call validate().
struct PdcConfig {
    CrystalModel crystal;
    PdcType type = PdcType::type_ii;
    Geometry geometry;
    PolarizationRoles roles;
    double pump_wavelength_nm = 0.0;
    double pump_sigma = 0.0;          // rad/s, amplitude standard deviation
    int pump_order = 0;
    double crystal_length = 0.0;      // m
    std::optional<double> beam_waist; // m, noncollinear only
    double cut_angle = 0.0;           // rad
    // w_eff = transverse_scale * w0 in the transverse phasematching factor
    double transverse_scale = 1.0;

    double signal_wavelength_nm() const { return 2.0 * pump_wavelength_nm; }
    double idler_wavelength_nm() const { return 2.0 * pump_wavelength_nm; }
    double omega_p0() const;
    double omega_s0() const;
    double omega_i0() const;

    void validate() const;
};

// Interface-unit description of a scenario. The cut angle defaults to the
// phase-matching angle at the pump wavelength.
struct PdcParams {
    std::string crystal;
    PdcType type = PdcType::type_ii;
    double theta_s_deg = 0.0;
    double pump_wavelength_nm = 0.0;
    double pump_sigma_nm = 0.0;
    int pump_order = 0;
    double crystal_length_mm = 0.0;
    std::optional<double> beam_waist_um;
    std::optional<double> cut_angle_deg;
    double transverse_scale = 1.0;
    std::optional<PolarizationRoles> roles;

    bool operator==(const PdcParams&) const = default;
};

PdcConfig resolve_pdc(const PdcParams& p, const CrystalCatalog& catalog = CrystalCatalog::builtin());

struct MismatchComponents {
    double longitudinal = 0.0;  // rad/m
    double transverse = 0.0;    // rad/m
};

// Exact mismatch with theta_i = -theta_s; ordinary/extraordinary waves as in
// config.roles.
MismatchComponents mismatch(const PdcConfig& config, double omega_s, double omega_i);

struct PmRoot {
    double theta = 0.0;    // cut angle, rad
    double theta_i = 0.0;  // idler angle from the coupled system, rad
};

// Degenerate phase-matching residual 2 n_p - n_s cos(theta_s) - n_i cos(theta_i)
// at cut angle theta; for noncollinear Type-II theta_i solves the transverse
// equation. Nullopt when the transverse equation has no solution.
std::optional<double> pm_residual(const CrystalModel& c, PdcType type, const PolarizationRoles& roles,
                                  Geometry g, double pump_nm, double theta, double* theta_i = nullptr);
// k'_p cos(theta_s) - k'_s, s/m
double gvm_residual(const CrystalModel& c, PdcType type, const PolarizationRoles& roles, Geometry g,
                    double pump_nm, double theta);

// Angle of a daughter wave to the optic axis. Type-I daughters sit on the cut
// angle; Type-II ones leave the principal plane at angle `theta_j`.
double daughter_axis_angle(PdcType type, double theta_c, double theta_j);

std::vector<PmRoot> find_pm_angles(const CrystalModel& c, PdcType type, Geometry g, double pump_nm,
                                   const PolarizationRoles& roles);
std::vector<PmRoot> find_pm_angles(const CrystalModel& c, PdcType type, Geometry g, double pump_nm);
// Throws NoPhaseMatching or MultipleSolutions (the message lists roots).
double find_pm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm,
                     const PolarizationRoles& roles);
double find_pm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm);

std::vector<double> find_gvm_angles(const CrystalModel& c, PdcType type, Geometry g, double pump_nm,
                                    const PolarizationRoles& roles);
// Smallest root; throws NoGvmAngle.
double find_gvm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm,
                      const PolarizationRoles& roles);
double find_gvm_angle(const CrystalModel& c, PdcType type, Geometry g, double pump_nm);

enum class GvmStatus { found, no_solution };

struct GvmSolution {
    GvmStatus status = GvmStatus::no_solution;
    double lambda_gvm_nm = 0.0;
    double theta_gvm = 0.0;  // rad
    double theta_s = 0.0;    // rad
    double theta_i = 0.0;    // rad
    double residual_pm = 0.0;
    double residual_gvm = 0.0;  // s/m
    int crossings = 0;

    bool found() const { return status == GvmStatus::found; }
};

// Pump wavelength where the PM and GVM angle curves cross, scanned over the
// range in which pump and daughters are all inside the dispersion data.
GvmSolution find_gvm_wavelength(const CrystalModel& c, PdcType type, double theta_s,
                                const PolarizationRoles& roles);
GvmSolution find_gvm_wavelength(const CrystalModel& c, PdcType type, double theta_s);
// Same, restricted to a pump-wavelength window.
GvmSolution find_gvm_wavelength(const CrystalModel& c, PdcType type, double theta_s,
                                const PolarizationRoles& roles, double lo_nm, double hi_nm);

// One entry per angle, parallel over angles.
std::vector<GvmSolution> gvm_scan(const CrystalModel& c, PdcType type, std::span<const double> theta_s);
std::vector<GvmSolution> gvm_scan(const CrystalModel& c, PdcType type, std::span<const double> theta_s,
                                  const PolarizationRoles& roles);

struct CurveSample {
    double pump_nm = 0.0;
    std::optional<double> theta_pm;   // rad, root closest to the GVM angle
    std::optional<double> theta_gvm;  // rad
};

// theta_PM(lambda_p) and theta_GVM(lambda_p) on a wavelength grid.
std::vector<CurveSample> sample_curves(const CrystalModel& c, PdcType type, Geometry g, const PolarizationRoles& roles,
                                       double lo_nm, double hi_nm, double step_nm);

// Pump wavelength window [lo, hi] for which pump and degenerate daughters
// are inside the validity range.
std::pair<double, double> pump_window_nm(const CrystalModel& c);

namespace reference {
// Serial scan; each angle seeds its wavelength window from the previous
// solution and falls back to the full window.
std::vector<GvmSolution> gvm_scan_serial(const CrystalModel& c, PdcType type, std::span<const double> theta_s,
                                         const PolarizationRoles& roles);
}  // namespace reference

}  // namespace pdcadd
