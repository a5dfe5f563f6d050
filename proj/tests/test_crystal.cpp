#include "pdcadd/crystal.hpp"
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

const char* tiny_yaml = R"(
name: TOY
class: uniaxial
sign: negative
form: pole_quadratic
range_um: [0.3, 2.0]
axes:
  - axis: o
    coefficients: [2.7, 0.02, 0.02, 0.01]
  - axis: e
    coefficients: [2.4, 0.01, 0.02, 0.01]
source: test data
)";

}  // namespace

// Pinned values below come from evaluating the published Sellmeier
// expressions independently (double precision, outside this library).
TEST_CASE("index values against independent evaluation", "[crystal][oracle]") {
    const auto kdp = load_crystal("KDP");
    CHECK_THAT(refractive_index(kdp, 830.0, Polarization::ordinary), WithinAbs(1.5005883658504573, 1e-12));
    CHECK_THAT(refractive_index(kdp, 830.0, Polarization::extraordinary), WithinAbs(1.4628276277138004, 1e-12));
    CHECK_THAT(extraordinary_index_at_angle(kdp, 415.0, deg_to_rad(67.74)), WithinAbs(1.4843370737934776, 1e-12));

    const auto bbo = load_crystal("BBO");
    CHECK_THAT(refractive_index(bbo, 585.0, Polarization::ordinary), WithinAbs(1.6700983030907486, 1e-12));
    CHECK_THAT(refractive_index(bbo, 585.0, Polarization::extraordinary), WithinAbs(1.551679478108751, 1e-12));
}

TEST_CASE("KDP pump and signal group velocities match at the GVM angle", "[crystal][oracle]") {
    const auto kdp = load_crystal("KDP");
    const double th = find_gvm_angle(kdp, PdcType::type_ii, Geometry::collinear(), 415.0);
    const double kp = inverse_group_velocity(kdp, 415.0, Polarization::extraordinary, th).value;
    const double ks = inverse_group_velocity(kdp, 830.0, Polarization::ordinary, 0.0).value;
    CHECK_THAT(kp, WithinRel(ks, 1e-9));
    // independent finite-difference value of k'_o(830 nm)
    CHECK_THAT(ks, WithinRel(5.08919959685488e-09, 1e-8));
}

TEST_CASE("catalog loading", "[crystal]") {
    const auto kdp = load_crystal("KDP");
    CHECK(kdp.crystal_class == CrystalClass::uniaxial);
    CHECK(kdp.axes.size() == 2);
    CHECK_FALSE(kdp.principal_plane);

    const auto bibo = load_crystal("BiBO");
    CHECK(bibo.crystal_class == CrystalClass::biaxial);
    CHECK(bibo.axes.size() == 3);
    REQUIRE(bibo.principal_plane);
    CHECK(bibo.principal_plane->ordinary == "x");

    CHECK(code_of([] { load_crystal("XYZ"); }) == ErrorCode::unknown_crystal);

    const auto names = CrystalCatalog::builtin().names();
    for (const char* n : {"KDP", "BBO", "LN", "KTP", "BiBO"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    for (const auto& n : names) {
        const auto& c = CrystalCatalog::builtin().get(n);
        CHECK(c.range_lo_um < c.range_hi_um);
        CHECK_FALSE(c.source_note.empty());
    }
}

TEST_CASE("custom crystal data", "[crystal]") {
    const auto cat = CrystalCatalog::from_yaml(tiny_yaml);
    const auto toy = load_crystal("TOY", cat);
    CHECK(toy.sign == OpticalSign::negative);
    CHECK(refractive_index(toy, 800.0, Polarization::ordinary) > 1.0);

    std::string bad = tiny_yaml;
    bad.replace(bad.find("[2.4, 0.01"), 10, "[-9.0, 0.0");
    CHECK(code_of([&] { CrystalCatalog::from_yaml(bad); }) == ErrorCode::invalid_model);

    std::string biaxial_without_plane = tiny_yaml;
    biaxial_without_plane.replace(biaxial_without_plane.find("uniaxial"), 8, "biaxial");
    CHECK(code_of([&] { CrystalCatalog::from_yaml(biaxial_without_plane); }) == ErrorCode::invalid_model);

    std::string reversed = tiny_yaml;
    reversed.replace(reversed.find("[0.3, 2.0]"), 10, "[2.0, 0.3]");
    CHECK(code_of([&] { CrystalCatalog::from_yaml(reversed); }) == ErrorCode::invalid_model);

    CHECK(code_of([] { CrystalCatalog::from_file("/nonexistent/crystals.yaml"); }) == ErrorCode::io);
}

TEST_CASE("validity range is enforced", "[crystal]") {
    const auto kdp = load_crystal("KDP");
    CHECK(code_of([&] { refractive_index(kdp, 150.0, Polarization::ordinary); }) == ErrorCode::out_of_validity_range);
    CHECK(code_of([&] { inverse_group_velocity(kdp, 1600.0, Polarization::ordinary, 0.0); }) ==
          ErrorCode::out_of_validity_range);
    CHECK_NOTHROW(refractive_index(kdp, 1500.0, Polarization::ordinary));
    CHECK_NOTHROW(refractive_index(kdp, 200.0, Polarization::ordinary));
    try {
        refractive_index(kdp, 150.0, Polarization::ordinary);
    } catch (const Error& e) {
        CHECK(e.stage() == Stage::dispersion);
        CHECK(std::string(e.what()).find("dispersion") != std::string::npos);
    }
}

TEST_CASE("index ellipse limits and ordering", "[crystal]") {
    const auto bbo = load_crystal("BBO");
    const double no = refractive_index(bbo, 585.0, Polarization::ordinary);
    const double ne = refractive_index(bbo, 585.0, Polarization::extraordinary);
    CHECK(no > ne);
    CHECK_THAT(extraordinary_index_at_angle(bbo, 585.0, 0.0), WithinRel(no, 1e-14));
    CHECK_THAT(extraordinary_index_at_angle(bbo, 585.0, pi / 2), WithinRel(ne, 1e-14));

    const auto kdp = load_crystal("KDP");
    const double n = extraordinary_index_at_angle(kdp, 415.0, deg_to_rad(67.74));
    CHECK(n < refractive_index(kdp, 415.0, Polarization::ordinary));
    CHECK(n > refractive_index(kdp, 415.0, Polarization::extraordinary));
}

TEST_CASE("index ellipse stays between principal values", "[crystal][property]") {
    for (const auto& name : CrystalCatalog::builtin().names()) {
        const auto& c = CrystalCatalog::builtin().get(name);
        for (int j = 0; j <= 20; ++j) {
            const double l = c.range_lo_um * 1e3 + (c.range_hi_um - c.range_lo_um) * 1e3 * j / 20.0;
            const double na = extraordinary_index_at_angle(c, l, 0.0);
            const double nb = extraordinary_index_at_angle(c, l, pi / 2);
            for (int k = 0; k <= 18; ++k) {
                const double n = extraordinary_index_at_angle(c, l, deg_to_rad(5.0 * k));
                CHECK(n >= std::min(na, nb) - 1e-15);
                CHECK(n <= std::max(na, nb) + 1e-15);
                CHECK(n > 1.0);
            }
        }
    }
}

TEST_CASE("analytic group velocity matches finite differences", "[crystal][property]") {
    for (const auto& name : CrystalCatalog::builtin().names()) {
        const auto& c = CrystalCatalog::builtin().get(name);
        const double lo = c.range_lo_um * 1e3 + 1.0, hi = c.range_hi_um * 1e3 - 1.0;
        for (auto pol : {Polarization::ordinary, Polarization::extraordinary}) {
            for (int j = 0; j < 50; ++j) {
                const double l = lo + (hi - lo) * j / 49.0;
                const double th = deg_to_rad(1.7 * j);
                const double a = inverse_group_velocity(c, l, pol, th).value;
                const double f = inverse_group_velocity(c, l, pol, th, DerivativeMethod::finite_difference).value;
                CHECK_THAT(a, WithinRel(f, 1e-8));
            }
        }
    }
}

TEST_CASE("index and k' are continuous under small wavelength steps", "[crystal][property]") {
    for (const auto& name : CrystalCatalog::builtin().names()) {
        const auto& c = CrystalCatalog::builtin().get(name);
        const double lo = c.range_lo_um * 1e3 + 1.0, hi = c.range_hi_um * 1e3 - 1.0;
        for (int j = 0; j < 40; ++j) {
            const double l = lo + (hi - lo) * j / 39.0;
            for (auto pol : {Polarization::ordinary, Polarization::extraordinary}) {
                CHECK_THAT(index_of(c, l + 0.01, pol, 0.7), WithinRel(index_of(c, l, pol, 0.7), 1e-3));
                CHECK_THAT(inverse_group_velocity(c, l + 0.01, pol, 0.7).value,
                           WithinRel(inverse_group_velocity(c, l, pol, 0.7).value, 1e-3));
            }
        }
    }
}

TEST_CASE("dispersion sample agrees with the direct calls", "[crystal]") {
    const auto ktp = load_crystal("KTP");
    const auto s = sample_dispersion(ktp, 900.0);
    for (double th : {0.0, 0.4, 1.2}) {
        for (auto pol : {Polarization::ordinary, Polarization::extraordinary}) {
            CHECK_THAT(s.index(pol, th), WithinRel(index_of(ktp, 900.0, pol, th), 1e-14));
            CHECK_THAT(s.inverse_group_velocity(pol, th),
                       WithinRel(inverse_group_velocity(ktp, 900.0, pol, th).value, 1e-12));
        }
    }
    const double w = omega_from_nm(900.0);
    CHECK_THAT(wavenumber(ktp, w, Polarization::ordinary, 0.0), WithinRel(s.wavenumber(Polarization::ordinary, 0.0), 1e-12));
}

TEST_CASE("enum parsing", "[crystal]") {
    CHECK(parse_polarization("o") == Polarization::ordinary);
    CHECK(parse_polarization("e") == Polarization::extraordinary);
    CHECK(code_of([] { parse_polarization("x"); }) == ErrorCode::invalid_config);
}
