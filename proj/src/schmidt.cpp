#include "pdcadd/schmidt.hpp"

#include "pdcadd/errors.hpp"
#include "pdcadd/units.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdcadd {

namespace {

std::vector<double> trapezoid(int n, double d) {
    std::vector<double> w(n, d);
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

ModeFunction column_mode(const Eigen::MatrixXcd& modes, const std::vector<double>& axis,
                         const std::vector<double>& weights, int index) {
    if (index < 0 || index >= modes.cols())
        throw Error(Stage::schmidt, ErrorCode::invalid_config, "mode index " + std::to_string(index) + " out of range");
    return {axis, weights, modes.col(index)};
}

}  // namespace

SchmidtDecomposition decompose(const JsaGrid& jsa, double rank_cutoff, bool with_modes) {
    const auto& g = jsa.grid;
    const int n = g.n(), m = g.m();
    if (jsa.amplitude.rows() != n || jsa.amplitude.cols() != m)
        throw Error(Stage::schmidt, ErrorCode::axis_mismatch, "amplitude shape does not match its grid");
    if (!jsa.amplitude.allFinite())
        throw Error(Stage::schmidt, ErrorCode::degenerate_grid, "JSA has non-finite entries");
    if (!(jsa.amplitude.cwiseAbs().maxCoeff() > 0.0))
        throw Error(Stage::schmidt, ErrorCode::degenerate_grid, "JSA is numerically zero");

    SchmidtDecomposition out;
    out.signal_axis = g.signal;
    out.idler_axis = g.idler;
    out.signal_weights = trapezoid(n, g.d_signal);
    out.idler_weights = trapezoid(m, g.d_idler);
    Eigen::VectorXd ws(n), wi(m);
    for (int j = 0; j < n; ++j) ws[j] = std::sqrt(out.signal_weights[j]);
    for (int k = 0; k < m; ++k) wi[k] = std::sqrt(out.idler_weights[k]);

    // symmetric weighting keeps this a plain SVD
    const Eigen::MatrixXcd B = ws.asDiagonal() * jsa.amplitude * wi.asDiagonal();
    const unsigned opts = with_modes ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(B, opts);
    const Eigen::VectorXd s = svd.singularValues();
    if (!(s[0] > 0.0)) throw Error(Stage::schmidt, ErrorCode::degenerate_grid, "JSA is numerically zero");

    const double l1 = s[0] * s[0];
    int rank = 0;
    while (rank < s.size() && s[rank] * s[rank] >= rank_cutoff * l1) ++rank;
    double total = 0.0;
    for (int r = 0; r < rank; ++r) total += s[r] * s[r];
    for (int r = 0; r < rank; ++r) out.eigenvalues.push_back(s[r] * s[r] / total);
    out.scale = total;
    out.K = effective_mode_number(out.eigenvalues);

    if (with_modes) {
        out.signal_modes = ws.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(rank);
        out.idler_modes = wi.cwiseInverse().asDiagonal() * svd.matrixV().leftCols(rank);
        // largest signal sample real-positive; the idler mode takes the same
        // factor so phi psi^* is unchanged
        for (int r = 0; r < rank; ++r) {
            Eigen::Index jmax = 0;
            out.signal_modes.col(r).cwiseAbs().maxCoeff(&jmax);
            const std::complex<double> z = out.signal_modes(jmax, r);
            const std::complex<double> ph = std::conj(z) / std::abs(z);
            out.signal_modes.col(r) *= ph;
            out.idler_modes.col(r) *= ph;
        }
    }
    return out;
}

double effective_mode_number(std::span<const double> l) {
    double s = 0.0, s2 = 0.0;
    for (double x : l) {
        if (!(x >= 0.0)) throw Error(Stage::schmidt, ErrorCode::invalid_config, "eigenvalues must be >= 0");
        s += x;
        s2 += x * x;
    }
    if (!(s > 0.0)) throw Error(Stage::schmidt, ErrorCode::all_zero, "all eigenvalues vanish");
    return s * s / s2;
}

RCoefficients r_coefficients(double sigma, double L, const LinearDispersion& kp) {
    const double f = sigma * L * std::sqrt(0.5 * gamma_sinc);
    return {f * std::abs(kp.pump - kp.signal), f * std::abs(kp.pump - kp.idler)};
}

RCoefficients r_coefficients(const PdcConfig& cfg) {
    if (!cfg.geometry.is_collinear())
        throw Error(Stage::schmidt, ErrorCode::not_collinear, "the closed-form r coefficients need a collinear config");
    return r_coefficients(cfg.pump_sigma, cfg.crystal_length, linear_dispersion(cfg));
}

double bandwidth_witness(const PdcConfig& cfg) {
    const LinearDispersion kp = linear_dispersion(cfg);
    const double d = kp.pump - kp.idler;
    return cfg.pump_sigma * cfg.pump_sigma * gamma_sinc * cfg.crystal_length * cfg.crystal_length * d * d / 2.0;
}

double analytic_K(const RCoefficients& r) {
    const double d = r.signal - r.idler;
    if (std::abs(d) <= 1e-14 * std::max({1.0, r.signal, r.idler}))
        throw Error(Stage::schmidt, ErrorCode::degenerate_ratio, "r_s == r_i, the Gaussian closed form diverges");
    return std::sqrt((1.0 + r.signal * r.signal) * (1.0 + r.idler * r.idler) / (d * d));
}

double analytic_K_single(double r_i) { return analytic_K({0.0, r_i}); }

namespace {

template <class T>
std::pair<Eigen::Matrix<T, 2, 2>, Eigen::Matrix<T, 4, 4>> kernel_matrices(const RCoefficients& r, T sigma) {
    const T rs = r.signal, ri = r.idler;
    const T a = 1 + rs * rs, b = 1 + ri * ri, c = 1 + rs * ri;
    const T s2 = sigma * sigma;
    Eigen::Matrix<T, 2, 2> V;
    V << a, c, c, b;
    Eigen::Matrix<T, 4, 4> W;
    W << 2 * a, c, 0, c,
         c, 2 * b, c, 0,
         0, c, 2 * a, c,
         c, 0, c, 2 * b;
    return {V / s2, W / s2};
}

}  // namespace

GaussianKernelMatrices gaussian_kernel_matrices(const RCoefficients& r, double sigma) {
    const auto [V, W] = kernel_matrices<double>(r, sigma);
    return {V, W};
}

double analytic_K_matrix(const RCoefficients& r, double sigma) {
    const double d = r.signal - r.idler;
    if (std::abs(d) <= 1e-14 * std::max({1.0, r.signal, r.idler}))
        throw Error(Stage::schmidt, ErrorCode::degenerate_ratio, "r_s == r_i makes V singular");
    // det V = (r_s - r_i)^2 / sigma^4 comes out of a cancelling difference;
    // extended precision keeps ~K^2 eps below 1e-10 for K up to ~1e4
    const auto [V, W] = kernel_matrices<long double>(r, sigma);
    return static_cast<double>(std::sqrt(W.determinant()) / (4 * V.determinant()));
}

ModeFunction signal_mode(const SchmidtDecomposition& d, int index) {
    return column_mode(d.signal_modes, d.signal_axis, d.signal_weights, index);
}

ModeFunction idler_mode(const SchmidtDecomposition& d, int index) {
    return column_mode(d.idler_modes, d.idler_axis, d.idler_weights, index);
}

ModeFunction pump_reference_mode(int order, double sigma, const FrequencyGrid& g) {
    ModeFunction out{g.signal, trapezoid(g.n(), g.d_signal), Eigen::VectorXcd(g.n())};
    const double wp0 = g.center_s + g.center_i;
    for (int j = 0; j < g.n(); ++j) out.values[j] = pump_spectrum(order, sigma, wp0, g.signal[j] + g.center_i);
    double nrm = 0.0;
    for (int j = 0; j < g.n(); ++j) nrm += out.weights[j] * std::norm(out.values[j]);
    out.values /= std::sqrt(nrm);
    return out;
}

ModeFunction pump_reference_mode(const PdcConfig& cfg, const FrequencyGrid& g) {
    return pump_reference_mode(cfg.pump_order, cfg.pump_sigma, g);
}

double mode_overlap(const ModeFunction& a, const ModeFunction& b) {
    const size_t n = a.axis.size();
    bool same = n == b.axis.size() && n == static_cast<size_t>(a.values.size()) &&
                n == static_cast<size_t>(b.values.size()) && a.weights.size() == n;
    for (size_t j = 0; same && j < n; ++j)
        same = std::abs(a.axis[j] - b.axis[j]) <= 1e-9 * std::abs(a.axis[j]);
    if (!same) throw Error(Stage::schmidt, ErrorCode::axis_mismatch, "modes are sampled on different axes");
    std::complex<double> ip = 0.0;
    double na = 0.0, nb = 0.0;
    for (size_t j = 0; j < n; ++j) {
        ip += a.weights[j] * std::conj(a.values[j]) * b.values[j];
        na += a.weights[j] * std::norm(a.values[j]);
        nb += a.weights[j] * std::norm(b.values[j]);
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw Error(Stage::schmidt, ErrorCode::all_zero, "overlap with a zero mode");
    return std::norm(ip) / (na * nb);
}

Eigen::MatrixXcd reconstruct(const SchmidtDecomposition& d, int rank) {
    if (d.signal_modes.cols() == 0)
        throw Error(Stage::schmidt, ErrorCode::invalid_config, "decomposition was computed without modes");
    if (rank < 0 || rank > d.rank()) rank = d.rank();
    // eigenvalues carry unit sum, `scale` restores the JSA's own measure
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d.signal_modes.rows(), d.idler_modes.rows());
    for (int r = 0; r < rank; ++r)
        out += std::sqrt(d.eigenvalues[r] * d.scale) * d.signal_modes.col(r) * d.idler_modes.col(r).adjoint();
    return out;
}

}  // namespace pdcadd
