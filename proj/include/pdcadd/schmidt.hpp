#pragma once

#include "pdcadd/jsa.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pdcadd {

struct SchmidtDecomposition {
    std::vector<double> eigenvalues;  // descending, sum 1, above the cutoff
    // Columns are modes sampled on the grid axes, unit norm under the
    // trapezoid measure. Empty when decompose() ran without modes.
    Eigen::MatrixXcd signal_modes;
    Eigen::MatrixXcd idler_modes;
    std::vector<double> signal_axis;
    std::vector<double> idler_axis;
    std::vector<double> signal_weights;
    std::vector<double> idler_weights;
    double K = 1.0;
    double scale = 1.0;  // retained sum of squared singular values


    int rank() const { return static_cast<int>(eigenvalues.size()); }
};

SchmidtDecomposition decompose(const JsaGrid& jsa, double rank_cutoff = 1e-12, bool with_modes = true);

// (sum l)^2 / sum l^2; throws AllZero.
double effective_mode_number(std::span<const double> eigenvalues);

struct RCoefficients {
    double signal = 0.0;
    double idler = 0.0;
};

// r_j = sigma L sqrt(gamma/2) |k'_p - k'_j|; throws NotCollinear.
RCoefficients r_coefficients(const PdcConfig& config);
RCoefficients r_coefficients(double sigma, double length_m, const LinearDispersion& kp);

// sigma^2 gamma L^2 (k'_p - k'_i)^2 / 2, equal to r_i^2
double bandwidth_witness(const PdcConfig& config);

// sqrt((1+rs^2)(1+ri^2)/(rs-ri)^2); throws DegenerateRatio when rs == ri.
double analytic_K(const RCoefficients& r);
double analytic_K_single(double r_i);  // rs = 0

struct GaussianKernelMatrices {
    Eigen::Matrix2d V;
    Eigen::Matrix4d W;
};

// Quadratic forms of the Gaussian JSA (V) and of |R|^2 integrated over two
// copies (W) in units where the pump width is sigma.
GaussianKernelMatrices gaussian_kernel_matrices(const RCoefficients& r, double sigma = 1.0);

// sqrt(det W) / (4 det V) at sigma = 1
double analytic_K_matrix(const RCoefficients& r, double sigma = 1.0);

struct ModeFunction {
    std::vector<double> axis;
    std::vector<double> weights;
    Eigen::VectorXcd values;
};

ModeFunction signal_mode(const SchmidtDecomposition& d, int index);
ModeFunction idler_mode(const SchmidtDecomposition& d, int index);

// Pump shape alpha_p(omega_s + omega_i0) on the signal axis, unit norm.
ModeFunction pump_reference_mode(const PdcConfig& config, const FrequencyGrid& grid);
ModeFunction pump_reference_mode(int order, double sigma, const FrequencyGrid& grid);

// |<mode|reference>|^2 with grid quadrature; throws AxisMismatch.
double mode_overlap(const ModeFunction& mode, const ModeFunction& reference);

// sum_{n < rank} sqrt(l_n) phi_n psi_n^* on the grid (same scaling as the JSA).
Eigen::MatrixXcd reconstruct(const SchmidtDecomposition& d, int rank = -1);

}  // namespace pdcadd
