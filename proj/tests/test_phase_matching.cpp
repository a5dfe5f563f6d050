#include "pdcadd/errors.hpp"
#include "pdcadd/phase_matching.hpp"
#include "pdcadd/units.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace pdcadd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no pdcadd::Error thrown");
    return ErrorCode::io;
}

PdcParams kdp_params() {
    PdcParams p;
    p.crystal = "KDP";
    p.type = PdcType::type_ii;
    p.pump_wavelength_nm = 415.0;
    p.pump_sigma_nm = 3.0;
    p.crystal_length_mm = 5.0;
    return p;
}

}  // namespace

TEST_CASE("phase matching angles from the tables", "[pm][oracle]") {
    const auto kdp = load_crystal("KDP");
    CHECK_THAT(rad_to_deg(find_pm_angle(kdp, PdcType::type_ii, Geometry::collinear(), 415.0)), WithinAbs(67.74, 0.5));
    const auto bbo = load_crystal("BBO");
    CHECK_THAT(rad_to_deg(find_pm_angle(bbo, PdcType::type_i, Geometry::collinear(), 771.0)), WithinAbs(19.83, 0.5));
    CHECK(code_of([&] { find_pm_angle(kdp, PdcType::type_ii, Geometry::collinear(), 300.0); }) ==
          ErrorCode::no_phase_matching);
}

TEST_CASE("no phase matching means no sign change of the residual", "[pm]") {
    const auto kdp = load_crystal("KDP");
    const auto roles = default_roles(kdp, PdcType::type_ii);
    double lo = 1e9, hi = -1e9;
    for (int j = 1; j <= 1800; ++j) {
        const auto r = pm_residual(kdp, PdcType::type_ii, roles, Geometry::collinear(), 300.0, deg_to_rad(0.05 * j));
        REQUIRE(r);
        lo = std::min(lo, *r);
        hi = std::max(hi, *r);
    }
    CHECK(lo * hi > 0.0);
}

TEST_CASE("GVM angles", "[pm][oracle]") {
    const auto kdp = load_crystal("KDP");
    CHECK_THAT(rad_to_deg(find_gvm_angle(kdp, PdcType::type_ii, Geometry::collinear(), 415.0)), WithinAbs(67.74, 0.5));

    // extraordinary signal never reaches the pump group velocity in KDP
    const PolarizationRoles e_signal{Polarization::extraordinary, Polarization::extraordinary, Polarization::ordinary};
    CHECK(code_of([&] { find_gvm_angle(kdp, PdcType::type_ii, Geometry::collinear(), 415.0, e_signal); }) ==
          ErrorCode::no_gvm_angle);

    // theta_s = 0 is the collinear condition itself
    const auto roles = default_roles(kdp, PdcType::type_ii);
    const double th = 1.1;
    const double direct = inverse_group_velocity(kdp, 415.0, Polarization::extraordinary, th).value -
                          inverse_group_velocity(kdp, 830.0, Polarization::ordinary, 0.0).value;
    CHECK(gvm_residual(kdp, PdcType::type_ii, roles, Geometry::noncollinear(0.0), 415.0, th) == direct);
}

TEST_CASE("GVM wavelengths", "[pm][oracle]") {
    const auto kdp = load_crystal("KDP");
    const auto s = find_gvm_wavelength(kdp, PdcType::type_ii, 0.0);
    REQUIRE(s.found());
    CHECK_THAT(s.lambda_gvm_nm, WithinAbs(415.0, 3.0));
    CHECK_THAT(rad_to_deg(s.theta_gvm), WithinAbs(67.74, 0.5));

    const auto ln = load_crystal("LN");
    CHECK_FALSE(find_gvm_wavelength(ln, PdcType::type_ii, 0.0).found());
    const auto l1 = find_gvm_wavelength(ln, PdcType::type_i, 0.0);
    REQUIRE(l1.found());
    CHECK_THAT(l1.lambda_gvm_nm, WithinAbs(1012.0, 3.0));
    CHECK_THAT(rad_to_deg(l1.theta_gvm), WithinAbs(44.95, 0.5));
}

TEST_CASE("noncollinear GVM scans", "[pm][oracle]") {
    const auto bbo = load_crystal("BBO");
    const double a_bbo[] = {0.0, deg_to_rad(5.325)};
    const auto b = gvm_scan(bbo, PdcType::type_ii, a_bbo);
    REQUIRE(b.size() == 2);
    REQUIRE(b[1].found());
    CHECK_THAT(b[0].lambda_gvm_nm, WithinAbs(585.0, 3.0));
    CHECK_THAT(b[1].lambda_gvm_nm, WithinAbs(398.0, 3.0));
    CHECK_THAT(rad_to_deg(b[1].theta_gvm), WithinAbs(49.1, 0.5));

    const auto bibo = load_crystal("BiBO");
    const double a_bibo[] = {deg_to_rad(5.0)};
    const auto c = gvm_scan(bibo, PdcType::type_i, a_bibo);
    REQUIRE(c[0].found());
    CHECK_THAT(c[0].lambda_gvm_nm, WithinAbs(708.0, 3.0));
    CHECK_THAT(rad_to_deg(c[0].theta_gvm), WithinAbs(8.02, 0.5));

    const auto kdp = load_crystal("KDP");
    const double zero[] = {0.0};
    const auto k = gvm_scan(kdp, PdcType::type_ii, zero);
    const auto t = find_gvm_wavelength(kdp, PdcType::type_ii, 0.0);
    CHECK(k[0].lambda_gvm_nm == t.lambda_gvm_nm);
    CHECK(k[0].theta_gvm == t.theta_gvm);
}

TEST_CASE("residuals vanish at every returned solution", "[pm][property]") {
    for (const char* name : {"KDP", "BBO", "BiBO", "KTP", "LN"}) {
        const auto c = load_crystal(name);
        for (auto type : {PdcType::type_i, PdcType::type_ii}) {
            for (double deg : {0.0, 2.0, 5.0}) {
                const auto s = find_gvm_wavelength(c, type, deg_to_rad(deg));
                if (!s.found()) continue;
                INFO(name << " " << to_string(type) << " " << deg);
                CHECK(std::abs(s.residual_pm) < 1e-8);
                CHECK(std::abs(s.residual_gvm) < 1e-6);
            }
        }
    }
}

TEST_CASE("PM and GVM curves are continuous at 1 nm spacing", "[pm][property]") {
    struct Case {
        const char* crystal;
        PdcType type;
        double deg, lo, hi;
    };
    // windows where both curves are flatter than 0.2 deg/nm
    for (const Case& k : {Case{"BBO", PdcType::type_ii, 0.0, 520, 650}, Case{"BBO", PdcType::type_ii, 5.325, 392, 430},
                          Case{"BiBO", PdcType::type_i, 5.0, 660, 690}, Case{"KTP", PdcType::type_i, 0.0, 860, 940},
                          Case{"KTP", PdcType::type_ii, 0.0, 680, 740}}) {
        const auto c = load_crystal(k.crystal);
        const auto curves = sample_curves(c, k.type, Geometry{deg_to_rad(k.deg)}, default_roles(c, k.type), k.lo, k.hi, 1.0);
        INFO(k.crystal << " " << to_string(k.type) << " " << k.deg);
        REQUIRE(curves.size() > 10);
        for (size_t j = 1; j < curves.size(); ++j) {
            const auto &a = curves[j - 1], &b = curves[j];
            REQUIRE(a.theta_pm);
            REQUIRE(a.theta_gvm);
            if (b.theta_pm) CHECK(rad_to_deg(std::abs(*a.theta_pm - *b.theta_pm)) < 0.2);
            if (b.theta_gvm) CHECK(rad_to_deg(std::abs(*a.theta_gvm - *b.theta_gvm)) < 0.2);
        }
    }
}

TEST_CASE("steep curve stretches have no jumps", "[pm][property]") {
    // KDP near 400 nm and BiBO near the end of its GVM branch are steeper
    // than 0.2 deg/nm; any such step must dissolve at 0.1 nm spacing
    struct Case {
        const char* crystal;
        PdcType type;
        double deg, lo, hi;
    };
    for (const Case& k : {Case{"KDP", PdcType::type_ii, 0.0, 395, 470}, Case{"BiBO", PdcType::type_i, 5.0, 660, 720},
                          Case{"BBO", PdcType::type_ii, 5.325, 370, 430}}) {
        const auto c = load_crystal(k.crystal);
        const auto roles = default_roles(c, k.type);
        const Geometry g{deg_to_rad(k.deg)};
        const auto curves = sample_curves(c, k.type, g, roles, k.lo, k.hi, 1.0);
        INFO(k.crystal << " " << to_string(k.type) << " " << k.deg);
        int refined = 0;
        for (size_t j = 1; j < curves.size(); ++j) {
            const auto &a = curves[j - 1], &b = curves[j];
            REQUIRE(a.theta_pm);
            REQUIRE(a.theta_gvm);
            REQUIRE(b.theta_pm);
            REQUIRE(b.theta_gvm);
            const double dp = rad_to_deg(std::abs(*a.theta_pm - *b.theta_pm));
            const double dg = rad_to_deg(std::abs(*a.theta_gvm - *b.theta_gvm));
            CHECK(dp < 2.0);
            CHECK(dg < 2.0);
            if (dp < 0.2 && dg < 0.2) continue;
            ++refined;
            const auto fine = sample_curves(c, k.type, g, roles, a.pump_nm, b.pump_nm, 0.1);
            for (size_t q = 1; q < fine.size(); ++q) {
                CHECK(rad_to_deg(std::abs(*fine[q].theta_pm - *fine[q - 1].theta_pm)) < 0.1 * std::max(dp, 0.2) * 1.5);
                CHECK(rad_to_deg(std::abs(*fine[q].theta_gvm - *fine[q - 1].theta_gvm)) < 0.1 * std::max(dg, 0.2) * 1.5);
            }
        }
        CHECK(refined > 0);
    }
}

TEST_CASE("small signal angles converge to the collinear solution", "[pm][property]") {
    for (const char* name : {"KDP", "BBO", "BiBO", "KTP"}) {
        const auto c = load_crystal(name);
        const auto a = find_gvm_wavelength(c, PdcType::type_ii, 0.0);
        const auto b = find_gvm_wavelength(c, PdcType::type_ii, deg_to_rad(0.01));
        REQUIRE(a.found());
        REQUIRE(b.found());
        CHECK(std::abs(a.lambda_gvm_nm - b.lambda_gvm_nm) < 1.0);
    }
}

TEST_CASE("Type-I daughters share one group velocity", "[pm][property]") {
    for (const char* name : {"KDP", "BBO", "LN", "KTP", "BiBO"}) {
        const auto c = load_crystal(name);
        const auto roles = default_roles(c, PdcType::type_i);
        CHECK(roles.signal == roles.idler);
        const double l = 0.5 * (c.range_lo_um + c.range_hi_um) * 1e3;
        const double th = daughter_axis_angle(PdcType::type_i, 0.6, 0.08);
        CHECK(th == 0.6);
        CHECK(inverse_group_velocity(c, l, roles.signal, th).value == inverse_group_velocity(c, l, roles.idler, th).value);
    }
}

TEST_CASE("polarization roles follow the optical sign", "[pm]") {
    const auto kdp = load_crystal("KDP");
    const auto r = default_roles(kdp, PdcType::type_ii);
    CHECK(r.pump == Polarization::extraordinary);
    CHECK(r.signal == Polarization::ordinary);
    CHECK(r.idler == Polarization::extraordinary);
    const auto ktp = load_crystal("KTP");
    const auto q = default_roles(ktp, PdcType::type_ii);
    CHECK(q.pump == Polarization::ordinary);
    CHECK(q.signal == Polarization::extraordinary);
    CHECK(q.idler == Polarization::ordinary);
}

TEST_CASE("mismatch components", "[pm]") {
    const auto kdp = resolve_pdc(kdp_params());
    for (double d : {-3e12, 0.0, 2e12}) {
        const auto m = mismatch(kdp, kdp.omega_s0() + d, kdp.omega_i0() - 0.5 * d);
        CHECK(m.transverse == 0.0);
    }
    CHECK(std::abs(mismatch(kdp, kdp.omega_s0(), kdp.omega_i0()).longitudinal) < 1e-3);

    PdcParams bibo;
    bibo.crystal = "BiBO";
    bibo.type = PdcType::type_i;
    bibo.theta_s_deg = 5.0;
    bibo.pump_wavelength_nm = 708.0;
    bibo.pump_sigma_nm = 6.0;
    bibo.crystal_length_mm = 1.0;
    bibo.beam_waist_um = 550.0;
    const auto b = resolve_pdc(bibo);
    const auto mb = mismatch(b, b.omega_s0(), b.omega_i0());
    CHECK(std::abs(mb.longitudinal) < 1e-3);
    CHECK(std::abs(mb.transverse) < 1e-3);

    PdcParams bbo;
    bbo.crystal = "BBO";
    bbo.type = PdcType::type_ii;
    bbo.theta_s_deg = 5.325;
    bbo.pump_wavelength_nm = 398.0;
    bbo.pump_sigma_nm = 5.0;
    bbo.crystal_length_mm = 0.3;
    bbo.beam_waist_um = 170.0;
    const auto c = resolve_pdc(bbo);
    CHECK(std::abs(mismatch(c, c.omega_s0(), c.omega_i0()).transverse) > 100.0);
}

TEST_CASE("config validation", "[pm]") {
    auto p = kdp_params();
    const auto cfg = resolve_pdc(p);
    CHECK_THAT(rad_to_deg(cfg.cut_angle), WithinAbs(67.74, 0.5));
    CHECK_THAT(cfg.signal_wavelength_nm(), WithinRel(830.0, 1e-15));

    p.beam_waist_um = 100.0;
    CHECK(code_of([&] { resolve_pdc(p); }) == ErrorCode::invalid_config);
    p = kdp_params();
    p.theta_s_deg = 3.0;
    CHECK(code_of([&] { resolve_pdc(p); }) == ErrorCode::invalid_config);
    p = kdp_params();
    p.crystal_length_mm = 0.0;
    CHECK(code_of([&] { resolve_pdc(p); }) == ErrorCode::invalid_config);
    p = kdp_params();
    p.pump_sigma_nm = -1.0;
    CHECK(code_of([&] { resolve_pdc(p); }) == ErrorCode::invalid_config);
    p = kdp_params();
    p.pump_wavelength_nm = 900.0;  // daughters at 1800 nm, past the KDP data
    CHECK(code_of([&] { resolve_pdc(p); }) == ErrorCode::out_of_validity_range);
    p = kdp_params();
    p.crystal = "XYZ";
    CHECK(code_of([&] { resolve_pdc(p); }) == ErrorCode::unknown_crystal);
    p = kdp_params();
    p.cut_angle_deg = 60.0;
    CHECK_THAT(rad_to_deg(resolve_pdc(p).cut_angle), WithinAbs(60.0, 1e-12));

    CHECK(parse_pdc_type("I") == PdcType::type_i);
    CHECK(parse_pdc_type("II") == PdcType::type_ii);
    CHECK(code_of([] { parse_pdc_type("III"); }) == ErrorCode::invalid_config);
}

TEST_CASE("parallel and serial scans agree", "[pm]") {
    const auto bbo = load_crystal("BBO");
    std::vector<double> a;
    for (int j = 0; j <= 16; ++j) a.push_back(deg_to_rad(0.5 * j));
    const auto roles = default_roles(bbo, PdcType::type_ii);
    const auto p = gvm_scan(bbo, PdcType::type_ii, a, roles);
    const auto s = reference::gvm_scan_serial(bbo, PdcType::type_ii, a, roles);
    REQUIRE(p.size() == s.size());
    for (size_t j = 0; j < p.size(); ++j) {
        CHECK(p[j].status == s[j].status);
        if (p[j].found()) {
            CHECK_THAT(p[j].lambda_gvm_nm, WithinAbs(s[j].lambda_gvm_nm, 1e-6));
            CHECK_THAT(p[j].theta_gvm, WithinAbs(s[j].theta_gvm, 1e-9));
        }
    }
}
