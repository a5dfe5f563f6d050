#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pdcadd {

// Product space with levels 0..N_m in mode m. Basis index is lexicographic
// in the occupations, mode 0 most significant.
class FockSpace {
public:
    FockSpace() = default;
    explicit FockSpace(std::vector<int> truncation);
    FockSpace(int modes, int truncation);

    int modes() const { return static_cast<int>(trunc_.size()); }
    long dim() const { return dim_; }
    const std::vector<int>& truncation() const { return trunc_; }
    long stride(int mode) const { return stride_[mode]; }
    int occupation(long index, int mode) const { return static_cast<int>((index / stride_[mode]) % (trunc_[mode] + 1)); }
    long index(std::span<const int> occupations) const;

private:
    std::vector<int> trunc_;
    std::vector<long> stride_;
    long dim_ = 0;
};

struct ValidityReport {
    double hermiticity = 0.0;  // max |rho - rho^H|
    double trace_error = 0.0;  // |Tr rho - 1|
    double min_eigenvalue = 0.0;

    bool ok(double tol = 1e-10) const { return hermiticity <= tol && trace_error <= tol && min_eigenvalue >= -tol; }
};

struct FockDensityMatrix {
    FockSpace space;
    Eigen::MatrixXcd matrix;

    int mode_count() const { return space.modes(); }
    std::complex<double> trace() const { return matrix.trace(); }
    ValidityReport check() const;
};

// Channel in the eigenbasis of the addition matrix; normalized on construction.
struct AdditionChannel {
    std::vector<double> eigenvalues;

    AdditionChannel() = default;
    explicit AdditionChannel(std::vector<double> lambda);
    int modes() const { return static_cast<int>(eigenvalues.size()); }
};

enum class ModeKind { vacuum, coherent, thermal, squeezed_vacuum };

struct ModeState {
    ModeKind kind = ModeKind::vacuum;
    std::complex<double> alpha = 0.0;  // coherent amplitude
    double nbar = 0.0;                 // thermal mean photon number
    double squeeze = 0.0;              // squeezing factor R

    static ModeState vacuum() { return {}; }
    static ModeState coherent(std::complex<double> a) { return {ModeKind::coherent, a, 0.0, 0.0}; }
    static ModeState thermal(double n) { return {ModeKind::thermal, 0.0, n, 0.0}; }
    static ModeState squeezed_vacuum(double r) { return {ModeKind::squeezed_vacuum, 0.0, 0.0, r}; }

    double mean_photons() const;
};

using InputStateSpec = std::vector<ModeState>;

// Fock populations/amplitudes of one mode truncated at N_max; `leak` is the
// population above N_max before renormalization.
struct SingleModeState {
    Eigen::MatrixXcd rho;
    double leak = 0.0;
};

SingleModeState single_mode_state(const ModeState& s, int n_max);

// Smallest N_max with population above N_max < tol. With headroom the level
// N_max itself also holds < tol, so one photon can be added.
int adequate_truncation(const ModeState& s, double tol = 1e-8, bool headroom = true);

// Throws TruncationTooSmall when a mode leaks >= 1e-8.
FockDensityMatrix build_input_state(const InputStateSpec& spec, std::vector<int> truncation);
FockDensityMatrix build_input_state(const InputStateSpec& spec, int truncation);

FockDensityMatrix pure_state(const FockSpace& space, const Eigen::VectorXcd& psi);

struct AdditionResult {
    FockDensityMatrix output;
    double probability = 0.0;  // sum l_n (1 + n_n), relative units
};

// rho_out = sum_n l_n a_n^+ rho a_n / P. Throws ModeCountMismatch and,
// when a populated top level would be pushed out, TruncationOverflow.
AdditionResult apply_addition(const FockDensityMatrix& rho, const AdditionChannel& channel);

std::vector<double> mean_photon_numbers(const FockDensityMatrix& rho);
double purity(const FockDensityMatrix& rho);

// a_mode^+ psi; the top level of `mode` must be empty.
Eigen::VectorXcd apply_creation(const FockSpace& space, const Eigen::VectorXcd& psi, int mode);
// (1 + n_k)(1 + n_l) - |<psi| a_k a_l^+ |psi>|^2
double cauchy_schwarz_gap(const FockSpace& space, const Eigen::VectorXcd& psi, int k, int l);

// (1 + q^2 (1+n)^2) / (1 + q (1+n))^2, q = l1/l2; q = inf gives 1
double analytic_purity_two_mode(double ratio, double nbar);
double k_from_ratio(double ratio);
// inverse of k_from_ratio on ratio >= 1; K = 1 maps to infinity
double ratio_from_k(double K);

struct PuritySurface {
    std::vector<double> k;
    std::vector<double> nbar;
    std::vector<double> purity;  // row-major [k][nbar]

    double at(size_t ik, size_t in) const { return purity[ik * nbar.size() + in]; }
};

// Throws KOutOfRange for K outside [1, 2].
PuritySurface purity_surface(std::span<const double> k_samples, std::span<const double> nbar_samples);

struct NonsaturationReport {
    int trials = 0;
    int modes = 0;
    int truncation = 0;
    std::uint64_t seed = 0;
    double min_purity_gap = 0.0;      // min 1 - purity
    double max_purity = 0.0;
    double min_cs_gap = 0.0;          // min over trials and pairs
    double min_cs_relative_gap = 0.0; // gap / bound
    double max_formula_error = 0.0;   // purity vs the pair-overlap formula
    bool all_mixed = false;           // every purity < 1 - 1e-9
};

// Haar-random pure inputs on occupations <= truncation - 1, random channels
// unless one is given. Trials draw from independent seeded streams.
NonsaturationReport verify_nonsaturation(int trials, int modes, int truncation, std::uint64_t seed,
                                         const std::optional<AdditionChannel>& channel = std::nullopt);

namespace reference {
// Dense creation-operator matrices, sum_n l_n A_n rho A_n^H.
AdditionResult apply_addition_dense(const FockDensityMatrix& rho, const AdditionChannel& channel);
}  // namespace reference

}  // namespace pdcadd
