#include "pdcadd/crystal.hpp"

#include "pdcadd/errors.hpp"
#include "pdcadd/units.hpp"
#include "crystals_embedded.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pdcadd {

namespace {

[[noreturn]] void bad_model(const std::string& what) {
    throw Error(Stage::dispersion, ErrorCode::invalid_model, what);
}

size_t expected_coefficients(SellmeierForm f) {
    switch (f) {
    case SellmeierForm::pole_ir: return 5;
    case SellmeierForm::pole_quadratic: return 4;
    case SellmeierForm::three_pole: return 6;
    }
    return 0;
}

SellmeierForm parse_form(const std::string& s) {
    if (s == "pole_ir") return SellmeierForm::pole_ir;
    if (s == "pole_quadratic") return SellmeierForm::pole_quadratic;
    if (s == "three_pole") return SellmeierForm::three_pole;
    bad_model("unknown Sellmeier form '" + s + "'");
}

// n^2 and d(n^2)/dl, l in micrometres
struct Sq {
    double f, df;
};

Sq sellmeier(SellmeierForm form, const std::vector<double>& k, double l) {
    const double l2 = l * l;
    switch (form) {
    case SellmeierForm::pole_ir: {
        const double a = l2 - k[2], b = l2 - k[4];
        return {k[0] + k[1] / a + k[3] * l2 / b, -2.0 * k[1] * l / (a * a) - 2.0 * k[3] * k[4] * l / (b * b)};
    }
    case SellmeierForm::pole_quadratic: {
        const double a = l2 - k[2];
        return {k[0] + k[1] / a - k[3] * l2, -2.0 * k[1] * l / (a * a) - 2.0 * k[3] * l};
    }
    case SellmeierForm::three_pole: {
        double f = 1.0, df = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double A = k[2 * j], B = k[2 * j + 1];
            const double a = l2 - B;
            f += A * l2 / a;
            df += -2.0 * A * B * l / (a * a);
        }
        return {f, df};
    }
    }
    return {0.0, 0.0};
}

const SellmeierAxis& axis_named(const CrystalModel& c, const std::string& name) {
    for (const auto& a : c.axes)
        if (a.axis == name) return a;
    bad_model(c.name + ": no axis '" + name + "'");
}

struct Principal {
    const SellmeierAxis* ordinary;
    const SellmeierAxis* at_0;
    const SellmeierAxis* at_90;
};

Principal principal(const CrystalModel& c) {
    if (c.crystal_class == CrystalClass::uniaxial) {
        const auto* o = &axis_named(c, "o");
        return {o, o, &axis_named(c, "e")};
    }
    const auto& p = *c.principal_plane;
    return {&axis_named(c, p.ordinary), &axis_named(c, p.at_0), &axis_named(c, p.at_90)};
}

// n and dn/dl (per micrometre)
struct Nd {
    double n, dn;
};

Nd axis_index(const CrystalModel& c, const SellmeierAxis& a, double l_um) {
    const Sq s = sellmeier(c.form, a.coefficients, l_um);
    const double n = std::sqrt(s.f);
    return {n, s.df / (2.0 * n)};
}

void check_range(const CrystalModel& c, double wavelength_nm) {
    if (!std::isfinite(wavelength_nm) || !c.in_range(wavelength_nm)) {
        std::ostringstream os;
        os << c.name << ": wavelength " << wavelength_nm << " nm outside validity range [" << c.range_lo_um * 1e3
           << ", " << c.range_hi_um * 1e3 << "] nm";
        throw Error(Stage::dispersion, ErrorCode::out_of_validity_range, os.str());
    }
}

Nd ellipse(const Nd& a, const Nd& b, double theta) {
    const double cs = std::cos(theta), sn = std::sin(theta);
    const double u = cs * cs / (a.n * a.n) + sn * sn / (b.n * b.n);
    const double du = -2.0 * cs * cs * a.dn / (a.n * a.n * a.n) - 2.0 * sn * sn * b.dn / (b.n * b.n * b.n);
    const double n = 1.0 / std::sqrt(u);
    return {n, -0.5 * du * n * n * n};
}

Nd index_and_slope(const CrystalModel& c, double wavelength_nm, Polarization pol, double theta) {
    check_range(c, wavelength_nm);
    const double l = wavelength_nm * 1e-3;
    const Principal p = principal(c);
    if (pol == Polarization::ordinary) return axis_index(c, *p.ordinary, l);
    return ellipse(axis_index(c, *p.at_0, l), axis_index(c, *p.at_90, l), theta);
}

Nd sample_nd(const DispersionSample& s, Polarization pol, double theta) {
    if (pol == Polarization::ordinary) return {s.n_o, s.dn_o};
    return ellipse({s.n_a, s.dn_a}, {s.n_b, s.dn_b}, theta);
}

}  // namespace

bool CrystalModel::in_range(double wavelength_nm) const {
    const double l = wavelength_nm * 1e-3;
    // relative slack so integer-nm endpoints of the range stay inside
    return l >= range_lo_um * (1.0 - 1e-12) && l <= range_hi_um * (1.0 + 1e-12);
}

void CrystalModel::validate() const {
    if (name.empty()) bad_model("crystal without a name");
    if (!(range_lo_um > 0.0) || !(range_lo_um < range_hi_um)) bad_model(name + ": validity range must satisfy 0 < lo < hi");
    const size_t want_axes = crystal_class == CrystalClass::uniaxial ? 2 : 3;
    if (axes.size() != want_axes)
        bad_model(name + ": expected " + std::to_string(want_axes) + " axes, got " + std::to_string(axes.size()));
    if (crystal_class == CrystalClass::biaxial && !principal_plane) bad_model(name + ": biaxial model needs principal_plane");
    if (crystal_class == CrystalClass::uniaxial && principal_plane) bad_model(name + ": principal_plane is for biaxial models");
    for (const auto& a : axes)
        if (a.coefficients.size() != expected_coefficients(form))
            bad_model(name + ": axis " + a.axis + " has " + std::to_string(a.coefficients.size()) + " coefficients");
    principal(*this);  // resolves axis names
    if (source_note.empty()) bad_model(name + ": source note missing");
    // sample the range, every index must be real and > 1
    for (int j = 0; j <= 200; ++j) {
        const double l = range_lo_um + (range_hi_um - range_lo_um) * j / 200.0;
        for (const auto& a : axes) {
            const double f = sellmeier(form, a.coefficients, l).f;
            if (!(f > 1.0) || !std::isfinite(f)) {
                std::ostringstream os;
                os << name << ": axis " << a.axis << " gives n^2 = " << f << " at " << l << " um";
                bad_model(os.str());
            }
        }
    }
}

CrystalCatalog CrystalCatalog::from_yaml(std::string_view text) {
    CrystalCatalog cat;
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(std::string(text));
    } catch (const YAML::Exception& e) {
        bad_model(std::string("crystal data does not parse: ") + e.what());
    }
    for (const auto& d : docs) {
        if (!d || d.IsNull()) continue;
        try {
            CrystalModel m;
            m.name = d["name"].as<std::string>();
            const auto cls = d["class"].as<std::string>();
            if (cls == "uniaxial") m.crystal_class = CrystalClass::uniaxial;
            else if (cls == "biaxial") m.crystal_class = CrystalClass::biaxial;
            else bad_model(m.name + ": class must be uniaxial or biaxial");
            const auto sign = d["sign"].as<std::string>("negative");
            if (sign == "negative") m.sign = OpticalSign::negative;
            else if (sign == "positive") m.sign = OpticalSign::positive;
            else bad_model(m.name + ": sign must be negative or positive");
            m.form = parse_form(d["form"].as<std::string>());
            const auto range = d["range_um"].as<std::vector<double>>();
            if (range.size() != 2) bad_model(m.name + ": range_um needs two values");
            m.range_lo_um = range[0];
            m.range_hi_um = range[1];
            for (const auto& a : d["axes"])
                m.axes.push_back({a["axis"].as<std::string>(), a["coefficients"].as<std::vector<double>>()});
            if (d["principal_plane"]) {
                const auto& p = d["principal_plane"];
                m.principal_plane = PrincipalPlane{p["ordinary"].as<std::string>(), p["at_0"].as<std::string>(),
                                                   p["at_90"].as<std::string>()};
            }
            m.source_note = d["source"].as<std::string>("");
            m.validate();
            cat.models_.push_back(std::move(m));
        } catch (const YAML::Exception& e) {
            bad_model(std::string("malformed crystal document: ") + e.what());
        }
    }
    if (cat.models_.empty()) bad_model("crystal data holds no documents");
    return cat;
}

CrystalCatalog CrystalCatalog::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::dispersion, ErrorCode::io, "cannot open crystal data '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_yaml(ss.str());
}

const CrystalCatalog& CrystalCatalog::builtin() {
    static const CrystalCatalog cat = from_yaml(builtin_crystal_yaml());
    return cat;
}

const CrystalModel& CrystalCatalog::get(std::string_view name) const {
    for (const auto& m : models_)
        if (m.name == name) return m;
    std::string known;
    for (const auto& m : models_) known += (known.empty() ? "" : ", ") + m.name;
    throw Error(Stage::dispersion, ErrorCode::unknown_crystal, "'" + std::string(name) + "' (known: " + known + ")");
}

std::vector<std::string> CrystalCatalog::names() const {
    std::vector<std::string> out;
    for (const auto& m : models_) out.push_back(m.name);
    return out;
}

std::string_view builtin_crystal_yaml() { return embedded::crystal_yaml; }

CrystalModel load_crystal(std::string_view name) { return CrystalCatalog::builtin().get(name); }

CrystalModel load_crystal(std::string_view name, const CrystalCatalog& catalog) { return catalog.get(name); }

double refractive_index(const CrystalModel& c, double wavelength_nm, Polarization pol) {
    return index_and_slope(c, wavelength_nm, pol, pi / 2).n;
}

double extraordinary_index_at_angle(const CrystalModel& c, double wavelength_nm, double theta) {
    return index_and_slope(c, wavelength_nm, Polarization::extraordinary, theta).n;
}

double index_of(const CrystalModel& c, double wavelength_nm, Polarization pol, double theta) {
    return index_and_slope(c, wavelength_nm, pol, theta).n;
}

double index_derivative(const CrystalModel& c, double wavelength_nm, Polarization pol, double theta) {
    return index_and_slope(c, wavelength_nm, pol, theta).dn * 1e-3;
}

InverseGroupVelocity inverse_group_velocity(const CrystalModel& c, double wavelength_nm, Polarization pol,
                                            double theta, DerivativeMethod method) {
    InverseGroupVelocity out{0.0, wavelength_nm, pol, theta};
    if (method == DerivativeMethod::analytic) {
        const Nd nd = index_and_slope(c, wavelength_nm, pol, theta);
        out.value = (nd.n - wavelength_nm * 1e-3 * nd.dn) / c_light;
        return out;
    }
    // central differences at h and h/2; Richardson combination, and the
    // two raw estimates must agree before we trust either
    const double h = 0.05;
    check_range(c, wavelength_nm - h);
    check_range(c, wavelength_nm + h);
    auto n = [&](double l) { return index_of(c, l, pol, theta); };
    const double d1 = (n(wavelength_nm + h) - n(wavelength_nm - h)) / (2 * h);
    const double d2 = (n(wavelength_nm + h / 2) - n(wavelength_nm - h / 2)) / h;
    const double scale = std::max(std::abs(d2), 1e-12);
    if (std::abs(d1 - d2) > 1e-5 * scale)
        throw Error(Stage::dispersion, ErrorCode::numerical_derivative_unstable,
                    c.name + ": finite-difference steps disagree at " + std::to_string(wavelength_nm) + " nm");
    const double d = (4.0 * d2 - d1) / 3.0;
    out.value = (n(wavelength_nm) - wavelength_nm * d) / c_light;
    return out;
}

double DispersionSample::index(Polarization pol, double theta) const { return sample_nd(*this, pol, theta).n; }

double DispersionSample::inverse_group_velocity(Polarization pol, double theta) const {
    const Nd nd = sample_nd(*this, pol, theta);
    return (nd.n - wavelength_nm * 1e-3 * nd.dn) / c_light;
}

double DispersionSample::wavenumber(Polarization pol, double theta) const {
    return index(pol, theta) * 2.0 * pi / (wavelength_nm * 1e-9);
}

DispersionSample sample_dispersion(const CrystalModel& c, double wavelength_nm) {
    check_range(c, wavelength_nm);
    const double l = wavelength_nm * 1e-3;
    const Principal p = principal(c);
    const Nd o = axis_index(c, *p.ordinary, l), a = axis_index(c, *p.at_0, l), b = axis_index(c, *p.at_90, l);
    return {wavelength_nm, o.n, o.dn, a.n, a.dn, b.n, b.dn};
}

double wavenumber(const CrystalModel& c, double omega, Polarization pol, double theta) {
    return index_of(c, nm_from_omega(omega), pol, theta) * omega / c_light;
}

std::string_view to_string(Polarization p) { return p == Polarization::ordinary ? "ordinary" : "extraordinary"; }

std::string_view to_string(OpticalSign s) { return s == OpticalSign::negative ? "negative" : "positive"; }

Polarization parse_polarization(std::string_view s) {
    if (s == "o" || s == "ordinary") return Polarization::ordinary;
    if (s == "e" || s == "extraordinary") return Polarization::extraordinary;
    throw Error(Stage::config, ErrorCode::invalid_config, "polarization must be o or e, got '" + std::string(s) + "'");
}

}  // namespace pdcadd
