#include "pdcadd/errors.hpp"
#include "pdcadd/schmidt.hpp"
#include "pdcadd/units.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

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

JsaGrid separable_jsa(int n, int m) {
    JsaGrid j;
    j.grid = FrequencyGrid::centered(2.0e15, 2.1e15, n, m, 5e12, 4e12);
    j.amplitude.resize(n, m);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < m; ++b) {
            const double x = (j.grid.signal[a] - j.grid.center_s) / 1e12;
            const double y = (j.grid.idler[b] - j.grid.center_i) / 1.3e12;
            j.amplitude(a, b) = std::exp(-x * x / 2) * (1.0 + 0.3 * y) * std::exp(-y * y / 2) * std::polar(1.0, 0.2 * x);
        }
    j.amplitude /= std::sqrt(j.norm());
    return j;
}

// sqrt(sum |a - b|^2 dws dwi)
double measure_distance(const JsaGrid& j, const Eigen::MatrixXcd& b) {
    return std::sqrt((j.amplitude - b).squaredNorm() * j.grid.d_signal * j.grid.d_idler);
}

}  // namespace

TEST_CASE("effective mode number", "[schmidt][oracle]") {
    CHECK(effective_mode_number(std::vector<double>{1.0, 0.0}) == 1.0);
    CHECK_THAT(effective_mode_number(std::vector<double>{0.5, 0.5}), WithinRel(2.0, 1e-15));
    CHECK_THAT(effective_mode_number(std::vector<double>{0.7, 0.2, 0.1}), WithinRel(1.0 / 0.54, 1e-14));
    CHECK_THAT(effective_mode_number(std::vector<double>{7.0, 2.0, 1.0}), WithinRel(1.0 / 0.54, 1e-14));
    CHECK(code_of([] { effective_mode_number(std::vector<double>{0.0, 0.0}); }) == ErrorCode::all_zero);
}

TEST_CASE("closed-form K", "[schmidt][oracle]") {
    CHECK_THAT(analytic_K(RCoefficients{0.0, 3.0}), WithinRel(std::sqrt(1.0 + 1.0 / 9.0), 1e-14));
    CHECK_THAT(analytic_K(RCoefficients{0.0, 3.0}), WithinAbs(1.0541, 1e-4));
    CHECK_THAT(analytic_K(RCoefficients{0.0, 1e4}), WithinAbs(1.0, 1e-8));
    CHECK_THAT(analytic_K_single(3.0), WithinRel(analytic_K(RCoefficients{0.0, 3.0}), 1e-15));
    CHECK_THAT(analytic_K_matrix(RCoefficients{0.0, 1.0}), WithinRel(std::sqrt(2.0), 1e-14));
    CHECK(code_of([] { analytic_K(RCoefficients{1.5, 1.5}); }) == ErrorCode::degenerate_ratio);
}

TEST_CASE("matrix and closed-form K agree", "[schmidt][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int t = 0; t < 1000; ++t) {
        RCoefficients r{u(rng), u(rng)};
        if (std::abs(r.signal - r.idler) < 1e-6) continue;
        CHECK_THAT(analytic_K_matrix(r), WithinRel(analytic_K(r), 1e-10));
    }
}

TEST_CASE("kernel matrices scale with the pump width", "[schmidt]") {
    const RCoefficients r{0.4, 2.5};
    const auto a = gaussian_kernel_matrices(r, 1.0);
    const auto b = gaussian_kernel_matrices(r, 3.0);
    CHECK((b.V * 9.0 - a.V).norm() < 1e-14 * a.V.norm());
    CHECK((b.W * 9.0 - a.W).norm() < 1e-14 * a.W.norm());
    CHECK_THAT(analytic_K_matrix(r, 3.0), WithinRel(analytic_K_matrix(r, 1.0), 1e-12));
    CHECK((a.V - a.V.transpose()).norm() == 0.0);
    CHECK((a.W - a.W.transpose()).norm() == 0.0);
}

TEST_CASE("separable JSA is single-mode", "[schmidt][oracle]") {
    const auto d = decompose(separable_jsa(96, 80));
    REQUIRE(d.rank() == 1);
    CHECK_THAT(d.eigenvalues[0], WithinAbs(1.0, 1e-14));
    CHECK(d.K == 1.0);
}

TEST_CASE("r coefficients", "[schmidt]") {
    const auto cfg = test::reference_pdc("kdp_collinear_t2");
    const auto r = r_coefficients(cfg);
    CHECK(r.signal < 0.05);
    CHECK_THAT(bandwidth_witness(cfg), WithinRel(r.idler * r.idler, 1e-12));
    const auto z = r_coefficients(cfg.pump_sigma, 0.0, linear_dispersion(cfg));
    CHECK(z.signal == 0.0);
    CHECK(z.idler == 0.0);
    CHECK(code_of([] { r_coefficients(test::reference_pdc("bbo_noncollinear_t2")); }) == ErrorCode::not_collinear);
}

TEST_CASE("mode overlap", "[schmidt][oracle]") {
    const auto grid = FrequencyGrid::centered(2e15, 2e15, 256, 256, 6e12, 6e12);
    const auto g0 = pump_reference_mode(0, 1e12, grid);
    const auto g1 = pump_reference_mode(1, 1e12, grid);
    CHECK_THAT(mode_overlap(g0, g0), WithinAbs(1.0, 1e-14));
    CHECK(mode_overlap(g0, g1) < 1e-20);
    const auto other = FrequencyGrid::centered(2e15, 2e15, 128, 128, 6e12, 6e12);
    CHECK(code_of([&] { mode_overlap(g0, pump_reference_mode(0, 1e12, other)); }) == ErrorCode::axis_mismatch);
}

TEST_CASE("reconstruction and mode orthonormality", "[schmidt][property]") {
    for (const char* name : {"kdp_collinear_t2", "kdp_hg1", "bbo_noncollinear_t2", "bibo_noncollinear_t1"}) {
        const auto jsa = test::reference_jsa(name, PmModel::sinc, 256);
        const auto d = decompose(jsa, 0.0);
        INFO(name);
        CHECK(measure_distance(jsa, reconstruct(d)) < 1e-8);
        CHECK(d.K >= 1.0);
        double sum = 0.0;
        for (double l : d.eigenvalues) sum += l;
        CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const auto fa = signal_mode(d, a), fb = signal_mode(d, b);
                std::complex<double> ip = 0.0;
                for (size_t j = 0; j < fa.axis.size(); ++j) ip += std::conj(fa.values[j]) * fb.values[j] * fa.weights[j];
                CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
            }
        // phase convention: largest signal sample real-positive
        const auto f0 = signal_mode(d, 0);
        Eigen::Index at = 0;
        f0.values.cwiseAbs().maxCoeff(&at);
        CHECK(f0.values[at].real() > 0.0);
        CHECK(std::abs(f0.values[at].imag()) < 1e-14 * std::abs(f0.values[at]));
    }
}

TEST_CASE("rank cutoff controls K = 1", "[schmidt]") {
    const auto jsa = test::reference_jsa("kdp_collinear_t2", PmModel::sinc, 256);
    const auto full = decompose(jsa);
    REQUIRE(full.rank() > 1);
    const double ratio = full.eigenvalues[1] / full.eigenvalues[0];
    const auto cut = decompose(jsa, ratio * 1.01, false);
    CHECK(cut.rank() == 1);
    CHECK(cut.K == 1.0);
}

TEST_CASE("pump-shaped first modes", "[schmidt]") {
    for (const char* name : {"kdp_collinear_t2", "kdp_hg1"}) {
        const auto cfg = test::reference_pdc(name);
        const auto grid = make_grid(cfg, 256, 256);
        const auto d = decompose(build_jsa(cfg, grid, PmModel::sinc));
        CHECK(mode_overlap(signal_mode(d, 0), pump_reference_mode(cfg, grid)) > 0.95);
    }
}

TEST_CASE("SVD matches the Gaussian closed form", "[schmidt][property]") {
    // GVM-like draws: pump slower than both daughters
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int done = 0;
    while (done < 6) {
        const RCoefficients r{1.5 * u(rng), 0.5 + 5.5 * u(rng)};
        if (r.idler - r.signal < 0.3 || analytic_K(r) > 3.0) continue;
        const double sigma = 1e12 * (1.0 + 9.0 * u(rng)), L = 1e-3 * (1.0 + 9.0 * u(rng));
        const double scale = sigma * L * std::sqrt(gamma_sinc / 2);
        const LinearDispersion kp{5e-9, 5e-9 - r.signal / scale, 5e-9 - r.idler / scale};
        const auto got = r_coefficients(sigma, L, kp);
        CHECK_THAT(got.signal, WithinRel(r.signal, 1e-9));
        CHECK_THAT(got.idler, WithinRel(r.idler, 1e-9));
        // |R|^2 = exp(-x^T A x); cov = (2A)^-1 sets the span per axis
        const double as = kp.pump - kp.signal, ai = kp.pump - kp.idler;
        const double q = 2 * gamma_sinc * L * L / 4;
        Eigen::Matrix2d A;
        A << 1 / (sigma * sigma) + q * as * as, 1 / (sigma * sigma) + q * as * ai, 1 / (sigma * sigma) + q * as * ai,
            1 / (sigma * sigma) + q * ai * ai;
        const Eigen::Matrix2d cov = (2 * A).inverse();
        const auto grid = FrequencyGrid::centered(2e15, 2e15, 384, 384, 9 * std::sqrt(cov(0, 0)), 9 * std::sqrt(cov(1, 1)));
        const double k_svd = decompose(build_gaussian_jsa(sigma, L, kp, grid), 1e-14, false).K;
        CHECK_THAT(k_svd, WithinRel(analytic_K(r), 0.02));
        ++done;
    }
}
