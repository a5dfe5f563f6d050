#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pdcadd {

enum class CrystalClass { uniaxial, biaxial };
enum class OpticalSign { negative, positive };
enum class Polarization { ordinary, extraordinary };

enum class SellmeierForm {
    pole_ir,         // A + B/(l^2-C) + D l^2/(l^2-E)
    pole_quadratic,  // A + B/(l^2-C) - D l^2
    three_pole,      // 1 + sum A_k l^2/(l^2-B_k)
};

struct SellmeierAxis {
    std::string axis;
    std::vector<double> coefficients;
};

struct PrincipalPlane {
    std::string ordinary;
    std::string at_0;
    std::string at_90;
};

struct CrystalModel {
    std::string name;
    CrystalClass crystal_class = CrystalClass::uniaxial;
    OpticalSign sign = OpticalSign::negative;
    SellmeierForm form = SellmeierForm::pole_quadratic;
    double range_lo_um = 0.0;
    double range_hi_um = 0.0;
    std::vector<SellmeierAxis> axes;
    std::optional<PrincipalPlane> principal_plane;  // biaxial only
    std::string source_note;

    bool in_range(double wavelength_nm) const;
    // Throws InvalidModel when the invariants do not hold.
    void validate() const;
};

class CrystalCatalog {
public:
    // Parses the multi-document YAML format of data/crystals.yaml.
    static CrystalCatalog from_yaml(std::string_view text);
    static CrystalCatalog from_file(const std::string& path);
    // The data file compiled into the library.
    static const CrystalCatalog& builtin();

    const CrystalModel& get(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::vector<CrystalModel> models_;
};

std::string_view builtin_crystal_yaml();

CrystalModel load_crystal(std::string_view name);
CrystalModel load_crystal(std::string_view name, const CrystalCatalog& catalog);

// Principal indices. `extraordinary` means the principal value at theta = pi/2.
double refractive_index(const CrystalModel& c, double wavelength_nm, Polarization pol);
double extraordinary_index_at_angle(const CrystalModel& c, double wavelength_nm, double theta);
// ordinary ignores theta
double index_of(const CrystalModel& c, double wavelength_nm, Polarization pol, double theta);

// dn/dlambda per nm, analytic from the Sellmeier form.
double index_derivative(const CrystalModel& c, double wavelength_nm, Polarization pol, double theta);

enum class DerivativeMethod { analytic, finite_difference };

struct InverseGroupVelocity {
    double value = 0.0;  // s/m
    double wavelength_nm = 0.0;
    Polarization polarization = Polarization::ordinary;
    double theta = 0.0;
};

InverseGroupVelocity inverse_group_velocity(const CrystalModel& c, double wavelength_nm, Polarization pol,
                                            double theta,
                                            DerivativeMethod method = DerivativeMethod::analytic);

// Principal indices and slopes at one wavelength. Angle scans at fixed
// wavelength only need the index ellipse, not a fresh Sellmeier evaluation.
struct DispersionSample {
    double wavelength_nm = 0.0;
    double n_o = 0.0, dn_o = 0.0;    // dn per micrometre
    double n_a = 0.0, dn_a = 0.0;    // theta = 0
    double n_b = 0.0, dn_b = 0.0;    // theta = pi/2

    double index(Polarization pol, double theta) const;
    double inverse_group_velocity(Polarization pol, double theta) const;  // s/m
    double wavenumber(Polarization pol, double theta) const;              // rad/m
};

DispersionSample sample_dispersion(const CrystalModel& c, double wavelength_nm);

// Wavenumber n omega / c in rad/m for angular frequency omega.
double wavenumber(const CrystalModel& c, double omega, Polarization pol, double theta);

std::string_view to_string(Polarization p);
std::string_view to_string(OpticalSign s);
Polarization parse_polarization(std::string_view s);

}  // namespace pdcadd
